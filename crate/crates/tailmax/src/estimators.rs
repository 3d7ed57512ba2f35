//! TOMD and TODD estimators.
//!
//! The TOMD estimator averages block minima of the per-member ratios
//!
//! ```text
//! r_i = 2 T_θ(F*_{q,M}(ũ_i, ṽ_i)) / (log ũ_i + log ṽ_i),   clamped to [0,2],
//! ```
//!
//! where the members are randomly grouped into blocks of size `m`. The TODD
//! estimator regresses `log(i − 0.5)` on the log order statistics of
//! `w = q / max(u,v)` over the diagonal square and reports the slope
//! magnitude.

use rand::seq::SliceRandom;

use crate::empirical::{fstar_inclusive_counts, DiagonalSelection, RectangleSelection};
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

/// TOMD estimate with its tuning parameters.
#[derive(Debug, Clone)]
pub struct TomdEstimate {
    pub value: f64,
    pub q: f64,
    /// Block size.
    pub m: usize,
    pub theta: f64,
    pub group_seed: u64,
    /// Member count m_{q,n}.
    pub m_q: usize,
    /// Number of blocks ⌈m_q/m⌉.
    pub n_blocks: usize,
}

/// TODD estimate.
#[derive(Debug, Clone)]
pub struct ToddEstimate {
    pub value: f64,
    pub q: f64,
    pub n_q: usize,
}

/// Box–Cox-type transform T_θ(t) = (t^θ − 1)/θ, with T_0 = log.
pub fn t_theta(t: f64, theta: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("t must lie in (0,1], got {t}")));
    }
    if theta < 0.0 {
        return Err(Error::invalid(format!("theta must be nonnegative, got {theta}")));
    }
    Ok(if theta == 0.0 {
        t.ln()
    } else {
        ((theta * t.ln()).exp_m1()) / theta
    })
}

/// Average block-minima TOMD estimator over an MTD rectangle selection.
pub fn tomd_estimate(
    selection: &RectangleSelection,
    m: usize,
    theta: f64,
    group_seed: u64,
) -> Result<TomdEstimate> {
    if selection.scaled_pairs.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no members in the MTD rectangle at q={}",
            selection.q
        )));
    }
    if m == 0 {
        return Err(Error::invalid("block size m must be positive"));
    }
    let m_q = selection.m_q();
    let counts = fstar_inclusive_counts(&selection.scaled_pairs);
    let mut ratios = Vec::with_capacity(m_q);
    for (k, &(ut, vt)) in selection.scaled_pairs.iter().enumerate() {
        let f = counts[k] as f64 / m_q as f64;
        let den = ut.ln() + vt.ln();
        let r = if den == 0.0 {
            // a member sitting at (1,1): ratio pinned to the clamp ends
            if f < 1.0 {
                2.0
            } else {
                0.0
            }
        } else {
            2.0 * t_theta(f, theta)? / den
        };
        ratios.push(r.clamp(0.0, 2.0));
    }
    let mut rng = rng_from_seed(group_seed);
    ratios.shuffle(&mut rng);
    let n_blocks = m_q.div_ceil(m);
    let mut sum = 0.0;
    let mut comp = 0.0; // Neumaier compensation
    for block in ratios.chunks(m) {
        let bm = block.iter().cloned().fold(f64::INFINITY, f64::min);
        let t = sum + bm;
        comp += if sum.abs() >= bm.abs() { (sum - t) + bm } else { (bm - t) + sum };
        sum = t;
    }
    let value = (sum + comp) / n_blocks as f64;
    Ok(TomdEstimate { value, q: selection.q, m, theta, group_seed, m_q, n_blocks })
}

/// Log-rank OLS TODD estimator over the diagonal selection.
///
/// The regression of `log(i − 0.5)` on `log w_{i:n_q}` has slope `−κ`; the
/// returned value is the slope magnitude so reported orders are positive.
pub fn todd_estimate(selection: &DiagonalSelection) -> Result<ToddEstimate> {
    let n_q = selection.w_values.len();
    if n_q < 3 {
        return Err(Error::EmptySelection(format!(
            "need at least 3 diagonal members at q={}, got {n_q}",
            selection.q
        )));
    }
    let xs: Vec<f64> = selection.w_values.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = (1..=n_q).map(|i| (i as f64 - 0.5).ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n_q as f64;
    let ybar = ys.iter().sum::<f64>() / n_q as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate(
            "all diagonal w-values are equal; TODD regression undefined".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    Ok(ToddEstimate { value: slope.abs(), q: selection.q, n_q })
}

/// Relative difference (TOMD/TODD − 1)·100, in percent.
pub fn relative_difference(tomd: f64, todd: f64) -> Result<f64> {
    if todd == 0.0 {
        return Err(Error::Degenerate("relative difference undefined for todd = 0".into()));
    }
    Ok((tomd / todd - 1.0) * 100.0)
}
