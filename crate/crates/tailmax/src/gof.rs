//! One-sided goodness-of-fit tests of the bound F*_q(u,v) ≥ uv.
//!
//! Direction `BelowIndependence` tests H0: F* ≥ uv against dips below the
//! independence surface; `AboveIndependence` tests the boundary H0*: F* = uv
//! against excursions above it. Three statistics are provided:
//!
//! - K-S: `√m · sup (d)₊` with `d = uv − F*` (below) or `F* − uv` (above),
//!   the supremum evaluated exactly over the step-function cell structure;
//! - C-vM: `Σ_k (d(ũ_k, ṽ_k))₊²`, the integral against dF* (the `m_q`
//!   prefactor cancels the empirical 1/m_q weights);
//! - A-D: the C-vM sum weighted by `1/(u(1−u)v(1−v))` at the member point.
//!
//! Critical values are the level-quantiles of the statistic over member sets
//! resampled from an independence null.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{fstar_inclusive_counts, Fenwick, RectangleSelection};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatKind {
    Ks,
    CvM,
    Ad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// H0: F* ≥ uv — reject on mass below the independence surface.
    BelowIndependence,
    /// H0*: F* = uv — reject on mass above the independence surface.
    AboveIndependence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Retain,
    Reject,
}

/// Null resampling scheme for critical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResampleScheme {
    /// Coordinates on the rank grid k/(m+1) under independent permutations
    /// (default; the exact H0* null for rank-derived member sets).
    IndependenceGrid,
    /// Independent uniform coordinates.
    IidUniform,
    /// Resample the observed member pairs with replacement (not a null for
    /// H0*; exposed for sensitivity analysis only).
    PairBootstrap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic_kind: StatKind,
    pub direction: Direction,
    pub statistic: f64,
    pub critical_value: f64,
    pub level: f64,
    pub n_resamples: usize,
    pub decision: Decision,
    pub seed: u64,
}

/// Signed deviation in the test direction.
fn deviation(direction: Direction, uv: f64, fstar: f64) -> f64 {
    match direction {
        Direction::BelowIndependence => uv - fstar,
        Direction::AboveIndependence => fstar - uv,
    }
}

/// Exact supremum of `(d)₊` over the unit square for the empirical F* of
/// `pairs`. The step structure reduces the supremum to a grid of candidate
/// corners: for the below direction, cell upper-right corners (distinct
/// coordinates plus 1) with strict counts (left limits of F*); for the above
/// direction, cell lower-left corners (distinct member coordinates) with
/// inclusive counts. `O(g_u · g_v · log m)` via a column sweep.
fn ks_sup(pairs: &[(f64, f64)], direction: Direction) -> f64 {
    let m = pairs.len() as f64;
    let mut us: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    us.sort_by(f64::total_cmp);
    us.dedup();
    let mut vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    vs.sort_by(f64::total_cmp);
    vs.dedup();
    let below = matches!(direction, Direction::BelowIndependence);
    if below {
        if *us.last().unwrap() < 1.0 {
            us.push(1.0);
        }
        if *vs.last().unwrap() < 1.0 {
            vs.push(1.0);
        }
    }
    // members sorted by u, inserted column by column into a Fenwick over
    // v-ranks; strict ranks for the below direction, inclusive otherwise
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let rank_of = |v: f64, strict: bool| -> usize {
        if strict {
            vs.partition_point(|&x| x < v)
        } else {
            vs.partition_point(|&x| x <= v)
        }
    };
    let mut bit = Fenwick::new(vs.len());
    let mut next = 0usize;
    let mut sup = 0.0f64;
    for &ua in &us {
        if below {
            // strict in u: insert members with u < ua before querying
            while next < order.len() && pairs[order[next]].0 < ua {
                bit.add(rank_of(pairs[order[next]].1, false));
                next += 1;
            }
            for &vb in &vs {
                let cnt = bit.prefix(rank_of(vb, true)) as f64;
                sup = sup.max(ua * vb - cnt / m);
            }
        } else {
            // inclusive in u: insert members with u <= ua first
            while next < order.len() && pairs[order[next]].0 <= ua {
                bit.add(rank_of(pairs[order[next]].1, false));
                next += 1;
            }
            for &vb in &vs {
                let cnt = bit.prefix(rank_of(vb, false)) as f64;
                sup = sup.max(cnt / m - ua * vb);
            }
        }
    }
    sup
}

/// Compute one statistic on an explicit scaled member set.
pub fn gof_statistic_on(pairs: &[(f64, f64)], kind: StatKind, direction: Direction) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptySelection("goodness-of-fit statistic needs members".into()));
    }
    let m = pairs.len() as f64;
    match kind {
        StatKind::Ks => Ok(m.sqrt() * ks_sup(pairs, direction)),
        StatKind::CvM | StatKind::Ad => {
            let counts = fstar_inclusive_counts(pairs);
            let mut sum = 0.0;
            for (k, &(u, v)) in pairs.iter().enumerate() {
                let d = deviation(direction, u * v, counts[k] as f64 / m).max(0.0);
                if d == 0.0 {
                    continue;
                }
                let mut term = d * d;
                if kind == StatKind::Ad {
                    // clamp inside the weight only, keeping it finite at the
                    // grid edges without discarding members
                    let lo = 1.0 / (2.0 * m);
                    let uc = u.clamp(lo, 1.0 - lo);
                    let vc = v.clamp(lo, 1.0 - lo);
                    term /= uc * (1.0 - uc) * vc * (1.0 - vc);
                }
                sum += term;
            }
            Ok(sum)
        }
    }
}

/// Compute one statistic on the scaled members of an MTD rectangle.
pub fn gof_statistic(
    selection: &RectangleSelection,
    kind: StatKind,
    direction: Direction,
) -> Result<f64> {
    gof_statistic_on(&selection.scaled_pairs, kind, direction)
}

/// Draw one synthetic member set of size `m_q` under the given scheme.
fn resample_member_set<R: Rng>(
    scheme: ResampleScheme,
    m_q: usize,
    source: Option<&[(f64, f64)]>,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    match scheme {
        ResampleScheme::IndependenceGrid => {
            let grid: Vec<f64> = (1..=m_q).map(|k| k as f64 / (m_q + 1) as f64).collect();
            let mut v = grid.clone();
            v.shuffle(rng);
            Ok(grid.into_iter().zip(v).collect())
        }
        ResampleScheme::IidUniform => {
            Ok((0..m_q).map(|_| (rng.gen(), rng.gen())).collect())
        }
        ResampleScheme::PairBootstrap => {
            let src = source.ok_or_else(|| {
                Error::invalid("pair bootstrap requires the observed member set")
            })?;
            if src.is_empty() {
                return Err(Error::EmptySelection("pair bootstrap from empty member set".into()));
            }
            Ok((0..m_q).map(|_| src[rng.gen_range(0..src.len())]).collect())
        }
    }
}

/// Level-quantile of the statistic over `n_resamples` null member sets.
///
/// The quantile convention is the order statistic at index ⌈level·N⌉. Trials
/// run in parallel with per-trial derived seeds; the result depends only on
/// `(m_q, kind, direction, n_resamples, level, seed, scheme)`.
pub fn resampled_critical_value_with(
    m_q: usize,
    kind: StatKind,
    direction: Direction,
    n_resamples: usize,
    level: f64,
    seed: u64,
    scheme: ResampleScheme,
    source: Option<&[(f64, f64)]>,
) -> Result<f64> {
    if m_q == 0 {
        return Err(Error::EmptySelection("critical value needs m_q >= 1".into()));
    }
    if n_resamples < 100 {
        return Err(Error::invalid("need at least 100 resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level must lie in (0,1), got {level}")));
    }
    let mut stats = (0..n_resamples)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(derive_seed(seed, trial as u64));
            let set = resample_member_set(scheme, m_q, source, &mut rng)?;
            gof_statistic_on(&set, kind, direction)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    let idx = (level * n_resamples as f64).ceil() as usize;
    Ok(stats[idx.clamp(1, n_resamples) - 1])
}

/// [`resampled_critical_value_with`] under the default independence-grid null.
pub fn resampled_critical_value(
    m_q: usize,
    kind: StatKind,
    direction: Direction,
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<f64> {
    resampled_critical_value_with(
        m_q,
        kind,
        direction,
        n_resamples,
        level,
        seed,
        ResampleScheme::IndependenceGrid,
        None,
    )
}

/// Full test: statistic, resampled critical value, and the retain/reject
/// decision (retain iff statistic < critical value).
pub fn gof_test(
    selection: &RectangleSelection,
    kind: StatKind,
    direction: Direction,
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<GofResult> {
    gof_test_with_scheme(
        selection,
        kind,
        direction,
        n_resamples,
        level,
        seed,
        ResampleScheme::IndependenceGrid,
    )
}

pub fn gof_test_with_scheme(
    selection: &RectangleSelection,
    kind: StatKind,
    direction: Direction,
    n_resamples: usize,
    level: f64,
    seed: u64,
    scheme: ResampleScheme,
) -> Result<GofResult> {
    let statistic = gof_statistic(selection, kind, direction)?;
    let critical_value = resampled_critical_value_with(
        selection.m_q(),
        kind,
        direction,
        n_resamples,
        level,
        seed,
        scheme,
        Some(&selection.scaled_pairs),
    )?;
    let decision = if statistic < critical_value { Decision::Retain } else { Decision::Reject };
    Ok(GofResult {
        statistic_kind: kind,
        direction,
        statistic,
        critical_value,
        level,
        n_resamples,
        decision,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn comonotone(m: usize) -> Vec<(f64, f64)> {
        (1..=m)
            .map(|k| (k as f64 / (m + 1) as f64, k as f64 / (m + 1) as f64))
            .collect()
    }

    #[test]
    fn comonotone_below_statistics_vanish() {
        // F*(k/(m+1), k/(m+1)) = k/m >= (k/(m+1))^2 at every member point
        let pairs = comonotone(40);
        assert_abs_diff_eq!(
            gof_statistic_on(&pairs, StatKind::CvM, Direction::BelowIndependence).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            gof_statistic_on(&pairs, StatKind::Ad, Direction::BelowIndependence).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_member_at_corner() {
        let pairs = vec![(1.0, 1.0)];
        for kind in [StatKind::CvM, StatKind::Ad] {
            for dir in [Direction::BelowIndependence, Direction::AboveIndependence] {
                assert_abs_diff_eq!(gof_statistic_on(&pairs, kind, dir).unwrap(), 0.0);
            }
        }
        assert_abs_diff_eq!(
            gof_statistic_on(&pairs, StatKind::Ks, Direction::AboveIndependence).unwrap(),
            0.0
        );
        // below: F* vanishes off the corner, so sup (uv - F*) is approached
        // at (1-, 1-) and the exact supremum is 1 (member-point evaluation
        // would give 0; the supremum convention is deliberate)
        assert_abs_diff_eq!(
            gof_statistic_on(&pairs, StatKind::Ks, Direction::BelowIndependence).unwrap(),
            1.0
        );
    }

    #[test]
    fn empty_selection_errors() {
        assert!(gof_statistic_on(&[], StatKind::Ks, Direction::BelowIndependence).is_err());
    }

    fn brute_force_ks(pairs: &[(f64, f64)], direction: Direction, grid: usize) -> f64 {
        // dense-grid evaluation; approaches cell corners from inside for the
        // below direction by evaluating strict counts explicitly
        let m = pairs.len() as f64;
        let mut sup = 0.0f64;
        for i in 0..=grid {
            for j in 0..=grid {
                let (u, v) = (i as f64 / grid as f64, j as f64 / grid as f64);
                let (inc, strict) = pairs.iter().fold((0usize, 0usize), |(a, s), &(x, y)| {
                    (
                        a + usize::from(x <= u && y <= v),
                        s + usize::from(x < u && y < v),
                    )
                });
                let d = match direction {
                    Direction::BelowIndependence => u * v - strict as f64 / m,
                    Direction::AboveIndependence => inc as f64 / m - u * v,
                };
                sup = sup.max(d);
            }
        }
        m.sqrt() * sup
    }

    #[test]
    fn ks_dominates_dense_grid() {
        let mut rng = rng_from_seed(31);
        for trial in 0..10 {
            let m = 3 + trial * 3;
            let set = resample_member_set(ResampleScheme::IidUniform, m, None, &mut rng).unwrap();
            for dir in [Direction::BelowIndependence, Direction::AboveIndependence] {
                let fast = gof_statistic_on(&set, StatKind::Ks, dir).unwrap();
                let brute = brute_force_ks(&set, dir, 500);
                assert!(
                    brute <= fast + 1e-9,
                    "m={m} {dir:?}: brute {brute} > fast {fast}"
                );
                // the grid should also come close to the exact supremum
                assert!(fast - brute < 0.05 * (m as f64).sqrt());
            }
        }
    }

    #[test]
    fn ks_above_known_value() {
        // single member at (0.5, 0.5): F* jumps to 1 there, so
        // sup (F* - uv) = 1 - 0.25 = 0.75, scaled by sqrt(1)
        let pairs = vec![(0.5, 0.5)];
        let s = gof_statistic_on(&pairs, StatKind::Ks, Direction::AboveIndependence).unwrap();
        assert_abs_diff_eq!(s, 0.75, epsilon = 1e-12);
        // below: sup over corners of uv - F*_strict; best at (1,1) left-limit
        // where the strict count is 0 along u<0.5 or v<0.5 -> corner (1, 0.5)
        // gives 0.5 - 0 = 0.5; corner (1,1) gives 1 - 1 = 0
        let s = gof_statistic_on(&pairs, StatKind::Ks, Direction::BelowIndependence).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cvm_hand_computed() {
        // members (0.8, 0.8) and (0.9, 0.9): F* = {0.5, 1.0};
        // above deviations: {0.5 - 0.64, 1 - 0.81} -> {0, 0.19}
        let pairs = vec![(0.8, 0.8), (0.9, 0.9)];
        let s = gof_statistic_on(&pairs, StatKind::CvM, Direction::AboveIndependence).unwrap();
        assert_abs_diff_eq!(s, 0.19f64 * 0.19, epsilon = 1e-12);
        // below deviations: {0.64 - 0.5, 0.81 - 1} -> {0.14, 0}
        let s = gof_statistic_on(&pairs, StatKind::CvM, Direction::BelowIndependence).unwrap();
        assert_abs_diff_eq!(s, 0.14f64 * 0.14, epsilon = 1e-12);
    }

    #[test]
    fn ad_weight_stays_finite_at_edges() {
        let pairs = vec![(1.0, 0.25), (0.5, 1.0), (0.25, 0.125)];
        let s = gof_statistic_on(&pairs, StatKind::Ad, Direction::AboveIndependence).unwrap();
        assert!(s.is_finite());
        let s = gof_statistic_on(&pairs, StatKind::Ad, Direction::BelowIndependence).unwrap();
        assert!(s.is_finite());
    }

    #[test]
    fn critical_value_determinism_and_quantiles() {
        let a = resampled_critical_value(30, StatKind::Ks, Direction::AboveIndependence, 200, 0.95, 5)
            .unwrap();
        let b = resampled_critical_value(30, StatKind::Ks, Direction::AboveIndependence, 200, 0.95, 5)
            .unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        // higher level -> no smaller critical value
        let lo = resampled_critical_value(30, StatKind::Ks, Direction::AboveIndependence, 200, 0.5, 5)
            .unwrap();
        assert!(lo <= a);
        assert!(resampled_critical_value(0, StatKind::Ks, Direction::AboveIndependence, 200, 0.95, 5)
            .is_err());
        assert!(resampled_critical_value(30, StatKind::Ks, Direction::AboveIndependence, 50, 0.95, 5)
            .is_err());
        assert!(resampled_critical_value(30, StatKind::Ks, Direction::AboveIndependence, 200, 1.5, 5)
            .is_err());
    }

    #[test]
    fn comonotone_alternative_rejected() {
        // H0* rejected essentially always for comonotone member sets
        let m = 60;
        let sel = RectangleSelection {
            q: 0.1,
            phi_star_n: 0.1,
            member_indices: (0..m).collect(),
            scaled_pairs: comonotone(m),
            n: m,
        };
        for kind in [StatKind::Ks, StatKind::CvM, StatKind::Ad] {
            let r = gof_test(&sel, kind, Direction::AboveIndependence, 500, 0.95, 9).unwrap();
            assert_eq!(r.decision, Decision::Reject, "{kind:?}");
            // and the below direction retains (statistic 0 for CvM/AD)
            let r = gof_test(&sel, kind, Direction::BelowIndependence, 500, 0.95, 9).unwrap();
            assert_eq!(r.decision, Decision::Retain, "{kind:?}");
        }
    }

    #[test]
    fn pair_bootstrap_scheme() {
        let mut rng = rng_from_seed(17);
        let src = comonotone(20);
        let set =
            resample_member_set(ResampleScheme::PairBootstrap, 20, Some(&src), &mut rng).unwrap();
        assert_eq!(set.len(), 20);
        assert!(set.iter().all(|p| src.contains(p)));
        assert!(resample_member_set(ResampleScheme::PairBootstrap, 20, None, &mut rng).is_err());
    }
}
