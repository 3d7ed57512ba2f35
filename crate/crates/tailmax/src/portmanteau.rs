//! Multivariate portmanteau white-noise diagnostics.
//!
//! All tests target H0: the autocovariance matrices Γ_1, …, Γ_L of the
//! bivariate series vanish. Writing `t_l = tr(Γ̂_l' Γ̂_0⁻¹ Γ̂_l Γ̂_0⁻¹)`:
//!
//! - Box–Pierce (multivariate):  `n Σ t_l`,
//! - Ljung–Box (multivariate):   `n(n+2) Σ t_l/(n−l)`,
//! - Hosking:                    `n² Σ t_l/(n−l)`,
//! - Li–McLeod:                  `n Σ t_l + d²L(L+1)/(2n)`,
//!
//! each referred to χ² with d²L degrees of freedom, and the Mahdi–McLeod
//! determinant statistic `−3n/(2L+1) · ln|R̂_L|` on the block-Toeplitz
//! correlation matrix of order L, referred to χ² with
//! `1.5 d²L(L+1)/(2L+1)` degrees of freedom.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortmanteauKind {
    BoxPierceMV,
    LjungBoxMV,
    Hosking,
    LiMcLeod,
    MahdiMcLeod,
}

pub const ALL_KINDS: [PortmanteauKind; 5] = [
    PortmanteauKind::BoxPierceMV,
    PortmanteauKind::LjungBoxMV,
    PortmanteauKind::Hosking,
    PortmanteauKind::LiMcLeod,
    PortmanteauKind::MahdiMcLeod,
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortmanteauResult {
    pub test_kind: PortmanteauKind,
    pub lag: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Sample autocovariance matrices Γ̂_0..Γ̂_L of the demeaned series.
fn autocovariances(x: &[f64], y: &[f64], max_lag: usize) -> Vec<DMatrix<f64>> {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut out = Vec::with_capacity(max_lag + 1);
    for l in 0..=max_lag {
        let mut g = DMatrix::zeros(2, 2);
        for t in l..n {
            let a = [x[t] - mx, y[t] - my];
            let b = [x[t - l] - mx, y[t - l] - my];
            for i in 0..2 {
                for j in 0..2 {
                    g[(i, j)] += a[i] * b[j];
                }
            }
        }
        out.push(g / n as f64);
    }
    out
}

/// Run all five portmanteau tests at every lag `1..=max_lag`.
pub fn portmanteau_suite(x: &[f64], y: &[f64], max_lag: usize) -> Result<Vec<PortmanteauResult>> {
    if x.len() != y.len() {
        return Err(Error::Data("portmanteau series must have equal length".into()));
    }
    let n = x.len();
    if max_lag == 0 {
        return Err(Error::invalid("max_lag must be positive"));
    }
    if n < 5 * max_lag {
        return Err(Error::Data(format!(
            "series of length {n} too short for max_lag {max_lag} (need at least {})",
            5 * max_lag
        )));
    }
    let d = 2.0_f64;
    let gammas = autocovariances(x, y, max_lag);
    let g0_inv = gammas[0]
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular lag-0 autocovariance matrix".into()))?;
    // guard against numerically singular inputs that still invert
    if gammas[0].determinant().abs() < 1e-300 {
        return Err(Error::Degenerate("singular lag-0 autocovariance matrix".into()));
    }
    let traces: Vec<f64> = (1..=max_lag)
        .map(|l| (gammas[l].transpose() * &g0_inv * &gammas[l] * &g0_inv).trace())
        .collect();
    // correlation blocks for the Mahdi-McLeod determinant statistic
    let sd = [gammas[0][(0, 0)].sqrt(), gammas[0][(1, 1)].sqrt()];
    let corr: Vec<DMatrix<f64>> = gammas
        .iter()
        .map(|g| {
            let mut r = g.clone();
            for i in 0..2 {
                for j in 0..2 {
                    r[(i, j)] /= sd[i] * sd[j];
                }
            }
            r
        })
        .collect();
    let nf = n as f64;
    let mut results = Vec::new();
    for big_l in 1..=max_lag {
        let lf = big_l as f64;
        let sum_bp: f64 = traces[..big_l].iter().sum();
        let sum_lb: f64 = traces[..big_l]
            .iter()
            .enumerate()
            .map(|(i, t)| t / (nf - (i + 1) as f64))
            .sum();
        for kind in ALL_KINDS {
            let (stat, df) = match kind {
                PortmanteauKind::BoxPierceMV => (nf * sum_bp, d * d * lf),
                PortmanteauKind::LjungBoxMV => (nf * (nf + 2.0) * sum_lb, d * d * lf),
                PortmanteauKind::Hosking => (nf * nf * sum_lb, d * d * lf),
                PortmanteauKind::LiMcLeod => {
                    (nf * sum_bp + d * d * lf * (lf + 1.0) / (2.0 * nf), d * d * lf)
                }
                PortmanteauKind::MahdiMcLeod => {
                    let dim = 2 * (big_l + 1);
                    let mut block = DMatrix::zeros(dim, dim);
                    for bi in 0..=big_l {
                        for bj in 0..=big_l {
                            let r = if bi >= bj {
                                corr[bi - bj].clone()
                            } else {
                                corr[bj - bi].transpose()
                            };
                            block.view_mut((2 * bi, 2 * bj), (2, 2)).copy_from(&r);
                        }
                    }
                    let det = block.determinant();
                    if !(det > 0.0) {
                        return Err(Error::Degenerate(
                            "non-positive block-Toeplitz correlation determinant".into(),
                        ));
                    }
                    let stat = -3.0 * nf / (2.0 * lf + 1.0) * det.ln();
                    let df = 1.5 * d * d * lf * (lf + 1.0) / (2.0 * lf + 1.0);
                    (stat, df)
                }
            };
            let chi = ChiSquared::new(df).map_err(|e| Error::Degenerate(e.to_string()))?;
            let p_value = (1.0 - chi.cdf(stat.max(0.0))).clamp(0.0, 1.0);
            results.push(PortmanteauResult { test_kind: kind, lag: big_l, statistic: stat, p_value });
        }
    }
    Ok(results)
}

/// Percentage of (test, lag) combinations with p > `alpha`, pooled and per
/// test kind.
pub fn retention_summary(
    results: &[PortmanteauResult],
    alpha: f64,
) -> (f64, Vec<(PortmanteauKind, f64)>) {
    let pooled = 100.0 * results.iter().filter(|r| r.p_value > alpha).count() as f64
        / results.len().max(1) as f64;
    let per_kind = ALL_KINDS
        .iter()
        .map(|&k| {
            let of_kind: Vec<_> = results.iter().filter(|r| r.test_kind == k).collect();
            let pct = 100.0 * of_kind.iter().filter(|r| r.p_value > alpha).count() as f64
                / of_kind.len().max(1) as f64;
            (k, pct)
        })
        .collect();
    (pooled, per_kind)
}
