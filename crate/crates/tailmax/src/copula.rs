//! Analytic copulas with closed-form maximal-dependence paths.
//!
//! Three families are implemented: the independence copula `uv`, the
//! Marshall–Olkin copula `min(u^{1-a} v, u v^{1-b})`, and the generalized
//! Clayton copula
//!
//! ```text
//! C(u,v) = u^{γ1/γ*} (u^{-1/γ*} + v^{-1/γ0} - 1)^{-γ0},   γ* = γ0 + γ1.
//! ```
//!
//! Each family exposes its maximal-tail-dependence path `(φ*(q), q²/φ*(q))`,
//! the maximal tail probability `Π*(q) = C(φ*(q), ψ*(q))`, and the tail order
//! of maximal dependence κ*. These serve as exact oracles for the empirical
//! machinery and its tests.

use crate::error::{Error, Result};

/// An analytic copula family with known maximal-dependence structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaModel {
    Independence,
    /// Marshall–Olkin with parameters `a, b ∈ [0,1]`.
    MarshallOlkin { a: f64, b: f64 },
    /// Generalized Clayton with `γ0 > 0`, `γ1 ≥ 0`.
    GeneralizedClayton { gamma0: f64, gamma1: f64 },
}

/// Closed-form maximal-dependence path of a model.
#[derive(Debug, Clone, Copy)]
pub struct MtdOracle {
    model: CopulaModel,
    /// Tail order of maximal dependence κ* ∈ [1,2].
    pub tomd: f64,
}

impl CopulaModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaModel::Independence => Ok(()),
            CopulaModel::MarshallOlkin { a, b } => {
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return Err(Error::invalid(format!(
                        "Marshall-Olkin requires a, b in [0,1], got a={a}, b={b}"
                    )));
                }
                Ok(())
            }
            CopulaModel::GeneralizedClayton { gamma0, gamma1 } => {
                if !(gamma0 > 0.0) || !(gamma1 >= 0.0) {
                    return Err(Error::invalid(format!(
                        "generalized Clayton requires gamma0 > 0, gamma1 >= 0, got ({gamma0}, {gamma1})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Evaluate the copula at `(u, v)`.
    pub fn value(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("copula arguments must lie in [0,1], got ({u}, {v})")));
        }
        self.validate()?;
        Ok(self.value_unchecked(u, v))
    }

    /// `value` without range checks; callers guarantee `u, v ∈ [0,1]`.
    pub(crate) fn value_unchecked(&self, u: f64, v: f64) -> f64 {
        match *self {
            CopulaModel::Independence => u * v,
            CopulaModel::MarshallOlkin { a, b } => {
                // a = b = 0 degenerates to independence; the general branch
                // would evaluate 0^0 terms consistently but route explicitly.
                if a == 0.0 && b == 0.0 {
                    return u * v;
                }
                if u == 0.0 || v == 0.0 {
                    return 0.0;
                }
                // min(u^{1-a} v, u v^{1-b}) in log-space
                let lu = u.ln();
                let lv = v.ln();
                (((1.0 - a) * lu + lv).min(lu + (1.0 - b) * lv)).exp()
            }
            CopulaModel::GeneralizedClayton { gamma0, gamma1 } => {
                if u == 0.0 || v == 0.0 {
                    return 0.0;
                }
                let gs = gamma0 + gamma1;
                let t = (-u.ln() / gs).exp() + (-v.ln() / gamma0).exp() - 1.0;
                ((gamma1 / gs) * u.ln() - gamma0 * t.ln()).exp()
            }
        }
    }

    /// Closed-form MTD path and tail order.
    pub fn mtd_oracle(&self) -> Result<MtdOracle> {
        self.validate()?;
        let tomd = match *self {
            CopulaModel::Independence => 2.0,
            CopulaModel::MarshallOlkin { a, b } => {
                if a + b == 0.0 {
                    2.0
                } else {
                    2.0 - 2.0 * a * b / (a + b)
                }
            }
            CopulaModel::GeneralizedClayton { gamma0, gamma1 } => {
                1.0 + gamma1 / (gamma1 + 2.0 * gamma0)
            }
        };
        Ok(MtdOracle { model: *self, tomd })
    }
}

impl MtdOracle {
    /// First path leg φ*(q).
    pub fn phi_star(&self, q: f64) -> f64 {
        match self.model {
            // flat profile: the diagonal path is the canonical maximizer
            CopulaModel::Independence => q,
            CopulaModel::MarshallOlkin { a, b } => {
                if a + b == 0.0 {
                    q
                } else {
                    // φ*(q) = q^{2b/(a+b)}
                    (2.0 * b / (a + b) * q.ln()).exp()
                }
            }
            CopulaModel::GeneralizedClayton { gamma0, gamma1 } => {
                if gamma1 == 0.0 {
                    // exchangeable Clayton: diagonal path
                    q
                } else {
                    gc_phi_star(gamma0, gamma1, q)
                }
            }
        }
    }

    /// Second path leg ψ*(q) = q²/φ*(q).
    pub fn psi_star(&self, q: f64) -> f64 {
        q * q / self.phi_star(q)
    }

    /// Maximal tail probability Π*(q) = C(φ*(q), ψ*(q)).
    pub fn pi_star(&self, q: f64) -> f64 {
        self.model.value_unchecked(self.phi_star(q), self.psi_star(q))
    }
}

/// Solve the generalized-Clayton first-order condition for φ*(q):
///
/// ```text
/// x^{-1/γ0} (x^{-1/γ*} - γ1/γ*) = (1 - γ1/γ*) q^{-2/γ0}
/// ```
///
/// The left side is strictly decreasing on `[q², 1]`, so bisection converges
/// unconditionally; iterated to a residual below 1e-12 in the log form.
pub fn gc_phi_star(gamma0: f64, gamma1: f64, q: f64) -> f64 {
    let gs = gamma0 + gamma1;
    let r = gamma1 / gs;
    let resid = |x: f64| -> f64 {
        // log of both sides; the bracket term is positive on the root's side
        let lhs = -x.ln() / gamma0 + ((-x.ln() / gs).exp() - r).ln();
        let rhs = (1.0 - r).ln() - 2.0 * q.ln() / gamma0;
        lhs - rhs
    };
    let (mut lo, mut hi) = (q * q, 1.0_f64);
    // residual is positive at lo, negative at hi
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if resid(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The limiting scaled rectangle distribution of the generalized Clayton:
///
/// ```text
/// F0*(u,v) = u^{γ1/γ*} ( ((1-γ1/γ*) u^{-1/γ*} + v^{-1/γ0}) / (2-γ1/γ*) )^{-γ0}
/// ```
pub fn gc_f0_star(gamma0: f64, gamma1: f64, u: f64, v: f64) -> Result<f64> {
    CopulaModel::GeneralizedClayton { gamma0, gamma1 }.validate()?;
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("arguments must lie in [0,1], got ({u}, {v})")));
    }
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    let gs = gamma0 + gamma1;
    let r = gamma1 / gs;
    let t = ((1.0 - r) * (-u.ln() / gs).exp() + (-v.ln() / gamma0).exp()) / (2.0 - r);
    Ok((r * u.ln() - gamma0 * t.ln()).exp())
}

/// Maximizer of the limiting profile `x ↦ F0`-scale rectangle mass:
/// `x* = q^{2γ*/(γ* + γ0)}`, the small-`q` limit of [`gc_phi_star`].
pub fn gc_f0_argmax(gamma0: f64, gamma1: f64, q: f64) -> f64 {
    let gs = gamma0 + gamma1;
    (2.0 * gs / (gs + gamma0) * q.ln()).exp()
}

/// Brute-force maximizer of `x ↦ C(x, q²/x)` over `[q², 1]`.
///
/// Scans a log-spaced grid of the given resolution and refines the best
/// bracket by golden-section search. Test-oracle plumbing only; the analytic
/// paths in [`MtdOracle`] are authoritative.
pub fn numeric_phi_star(model: &CopulaModel, q: f64, resolution: usize) -> Result<f64> {
    model.validate()?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("q must lie in (0,1], got {q}")));
    }
    if resolution < 100 {
        return Err(Error::invalid("resolution must be at least 100"));
    }
    let q2 = q * q;
    let profile = |x: f64| model.value_unchecked(x, q2 / x);
    let llo = q2.ln();
    let lhi = 0.0_f64;
    let mut best_i = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut flat = true;
    let first = profile(q2);
    for i in 0..=resolution {
        let x = (llo + (lhi - llo) * i as f64 / resolution as f64).exp();
        let val = profile(x);
        if (val - first).abs() > 1e-14 {
            flat = false;
        }
        if val > best_val {
            best_val = val;
            best_i = i;
        }
    }
    if flat {
        // degenerate profile (independence): fall back to the diagonal
        return Ok(q);
    }
    // golden-section refinement on the bracketing cells
    let cell = (lhi - llo) / resolution as f64;
    let mut a = llo + cell * best_i.saturating_sub(1) as f64;
    let mut b = (llo + cell * (best_i + 1) as f64).min(lhi);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (profile(c.exp()), profile(d.exp()));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = profile(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = profile(d.exp());
        }
    }
    Ok((0.5 * (a + b)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn independence_value() {
        let c = CopulaModel::Independence;
        assert_abs_diff_eq!(c.value(0.3, 0.5).unwrap(), 0.15, epsilon = 1e-15);
    }

    #[test]
    fn mo_comonotone_value() {
        let c = CopulaModel::MarshallOlkin { a: 1.0, b: 1.0 };
        assert_abs_diff_eq!(c.value(0.3, 0.5).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn gc_value_high_precision() {
        // independent arbitrary-precision evaluation of the closed form
        let c = CopulaModel::GeneralizedClayton { gamma0: 0.4, gamma1: 0.2 };
        assert_abs_diff_eq!(
            c.value(0.25, 0.25).unwrap(),
            0.14251606847667780,
            epsilon = 1e-14
        );
    }

    #[test]
    fn copula_margins() {
        let models = [
            CopulaModel::Independence,
            CopulaModel::MarshallOlkin { a: 0.7, b: 0.3 },
            CopulaModel::GeneralizedClayton { gamma0: 0.4, gamma1: 0.8 },
        ];
        for m in &models {
            for i in 1..20 {
                let u = i as f64 / 20.0;
                assert_abs_diff_eq!(m.value(u, 1.0).unwrap(), u, epsilon = 1e-12);
                assert_abs_diff_eq!(m.value(1.0, u).unwrap(), u, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn value_rejects_out_of_range() {
        assert!(CopulaModel::Independence.value(1.5, 0.5).is_err());
        assert!(CopulaModel::Independence.value(0.5, -0.1).is_err());
    }

    #[test]
    fn mo_oracle_closed_forms() {
        // a = b: phi*(q) = q, kappa* = 2 - a
        let o = CopulaModel::MarshallOlkin { a: 0.6, b: 0.6 }.mtd_oracle().unwrap();
        assert_abs_diff_eq!(o.phi_star(0.05), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(o.tomd, 1.4, epsilon = 1e-15);
        // Pi*(q) = q^{kappa*} exactly for M-O
        for &(a, b) in &[(0.25, 0.75), (1.0, 0.5), (0.5, 0.5)] {
            let o = CopulaModel::MarshallOlkin { a, b }.mtd_oracle().unwrap();
            for &q in &[0.01, 0.05, 0.1, 0.25] {
                assert_abs_diff_eq!(o.pi_star(q), q.powf(o.tomd), epsilon = 1e-12);
                assert_abs_diff_eq!(o.phi_star(q) * o.psi_star(q), q * q, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gc_tomd_values() {
        let o = CopulaModel::GeneralizedClayton { gamma0: 0.1, gamma1: 0.8 }.mtd_oracle().unwrap();
        assert_abs_diff_eq!(o.tomd, 1.8, epsilon = 1e-15);
        let o = CopulaModel::GeneralizedClayton { gamma0: 0.4, gamma1: 0.0 }.mtd_oracle().unwrap();
        assert_abs_diff_eq!(o.tomd, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gc_phi_star_matches_high_precision_roots() {
        // roots of the first-order condition computed independently at 50 digits
        let cases = [
            (0.1, 0.8, 0.01, 0.000306109986034304557),
            (0.1, 0.8, 0.05, 0.00554522931983629285),
            (0.1, 0.8, 0.1, 0.019295102365961586),
            (0.4, 0.8, 0.01, 0.00138923154733786302),
            (0.4, 0.8, 0.05, 0.0154480813496284684),
            (0.4, 0.8, 0.1, 0.0433139701758720997),
            (0.4, 0.2, 0.01, 0.00438791105903895751),
            (0.4, 0.2, 0.05, 0.0302638199443048459),
            (0.4, 0.2, 0.1, 0.0694789314257952547),
        ];
        for &(g0, g1, q, root) in &cases {
            let x = gc_phi_star(g0, g1, q);
            assert!((x / root - 1.0).abs() < 1e-10, "({g0},{g1}) q={q}: {x} vs {root}");
        }
    }

    #[test]
    fn gc_phi_star_residual_small() {
        for &(g0, g1) in &[(0.1, 0.8), (0.4, 0.8), (0.4, 0.2)] {
            let gs: f64 = g0 + g1;
            for &q in &[0.01_f64, 0.05, 0.1, 0.25] {
                let x = gc_phi_star(g0, g1, q);
                let lhs = x.powf(-1.0 / g0) * (x.powf(-1.0 / gs) - g1 / gs);
                let rhs = (1.0 - g1 / gs) * q.powf(-2.0 / g0);
                assert!((lhs / rhs - 1.0).abs() <= 1e-10, "residual at q={q}");
            }
        }
    }

    #[test]
    fn gc_f0_star_values() {
        assert_abs_diff_eq!(gc_f0_star(0.4, 0.8, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gc_f0_star(0.4, 0.8, 0.3, 0.7).unwrap(),
            0.31006861188304512,
            epsilon = 1e-13
        );
        // gamma1 = 0: F0*(u,v) = ((u^{-1/g0} + v^{-1/g0})/2)^{-g0}
        let f = gc_f0_star(0.4, 0.0, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-14);
        assert!(f >= 0.25);
    }

    #[test]
    fn gc_f0_star_bounds_on_grid() {
        // uv <= F0* <= (uv)^{kappa*/2}
        let (g0, g1) = (0.4, 0.8);
        let k = CopulaModel::GeneralizedClayton { gamma0: g0, gamma1: g1 }
            .mtd_oracle()
            .unwrap()
            .tomd;
        for i in 1..=20 {
            for j in 1..=20 {
                let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                let f = gc_f0_star(g0, g1, u, v).unwrap();
                assert!(f >= u * v - 1e-12);
                assert!(f <= (u * v).powf(k / 2.0) + 1e-12);
            }
        }
    }

    #[test]
    fn gc_fq_star_dominates_independence() {
        // F_q*(u,v) = C(phi* u, psi* v) / Pi*(q) >= uv on a grid
        for &q in &[0.01, 0.05, 0.1] {
            let m = CopulaModel::GeneralizedClayton { gamma0: 0.4, gamma1: 0.8 };
            let o = m.mtd_oracle().unwrap();
            let (p, s, pi) = (o.phi_star(q), o.psi_star(q), o.pi_star(q));
            for i in 1..=50 {
                for j in 1..=50 {
                    let (u, v) = (i as f64 / 50.0, j as f64 / 50.0);
                    let fq = m.value_unchecked(p * u, s * v) / pi;
                    assert!(fq >= u * v - 1e-12, "q={q} u={u} v={v}: {fq} < {}", u * v);
                }
            }
        }
    }

    #[test]
    fn gc_f0_argmax_shares_the_small_q_exponent() {
        // phi*(q) is regularly varying with the same exponent as the
        // limit-path maximizer q^{2 gs/(gs+g0)}; the ratio tends to a
        // constant, so the log-slopes agree as q -> 0
        let (g0, g1) = (0.4, 0.8);
        let expo = 2.0 * (g0 + g1) / (2.0 * g0 + g1);
        let slope = |q: f64| gc_phi_star(g0, g1, q).ln() / q.ln();
        assert!((slope(1e-6) - expo).abs() < (slope(1e-3) - expo).abs());
        assert!((slope(1e-6) - expo).abs() < 0.03);
        let r1 = gc_phi_star(g0, g1, 1e-6) / gc_f0_argmax(g0, g1, 1e-6);
        let r2 = gc_phi_star(g0, g1, 1e-8) / gc_f0_argmax(g0, g1, 1e-8);
        assert!((r1 / r2 - 1.0).abs() < 1e-4, "ratio not settling: {r1} vs {r2}");
    }

    #[test]
    fn numeric_phi_star_matches_closed_forms() {
        for &(a, b) in &[(0.25, 0.25), (0.25, 0.75), (0.5, 0.5), (0.75, 1.0), (1.0, 0.5)] {
            let m = CopulaModel::MarshallOlkin { a, b };
            let o = m.mtd_oracle().unwrap();
            for &q in &[0.01, 0.05, 0.1] {
                let x = numeric_phi_star(&m, q, 4000).unwrap();
                assert!(
                    (x - o.phi_star(q)).abs() <= 1e-6,
                    "M-O({a},{b}) q={q}: {x} vs {}",
                    o.phi_star(q)
                );
            }
        }
        // MO(1, 0.5), q = 0.05: q^{2/3}
        let x = numeric_phi_star(&CopulaModel::MarshallOlkin { a: 1.0, b: 0.5 }, 0.05, 4000).unwrap();
        assert_abs_diff_eq!(x, 0.13572088082974533, epsilon = 1e-6);
    }

    #[test]
    fn numeric_phi_star_flat_profile_returns_q() {
        let x = numeric_phi_star(&CopulaModel::Independence, 0.1, 1000).unwrap();
        assert_abs_diff_eq!(x, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn numeric_phi_star_tracks_gc_bisection() {
        for &(g0, g1) in &[(0.1, 0.8), (0.4, 0.2)] {
            let m = CopulaModel::GeneralizedClayton { gamma0: g0, gamma1: g1 };
            for &q in &[0.05, 0.1] {
                let num = numeric_phi_star(&m, q, 4000).unwrap();
                let ana = gc_phi_star(g0, g1, q);
                assert!((num / ana - 1.0).abs() < 1e-4, "({g0},{g1}) q={q}");
            }
        }
    }

    proptest! {
        #[test]
        fn two_increasing(
            a in 0.0..=1.0f64, b in 0.0..=1.0f64,
            g0 in 0.05..=2.0f64, g1 in 0.0..=2.0f64,
            u1 in 0.0..=1.0f64, du in 0.0..=1.0f64,
            v1 in 0.0..=1.0f64, dv in 0.0..=1.0f64,
        ) {
            let u2 = (u1 + du).min(1.0);
            let v2 = (v1 + dv).min(1.0);
            for m in [
                CopulaModel::Independence,
                CopulaModel::MarshallOlkin { a, b },
                CopulaModel::GeneralizedClayton { gamma0: g0, gamma1: g1 },
            ] {
                let vol = m.value_unchecked(u2, v2) - m.value_unchecked(u1, v2)
                    - m.value_unchecked(u2, v1) + m.value_unchecked(u1, v1);
                prop_assert!(vol >= -1e-12);
            }
        }

        #[test]
        fn path_legs_multiply_to_q_squared(q in 0.001..=1.0f64) {
            let o = CopulaModel::GeneralizedClayton { gamma0: 0.4, gamma1: 0.8 }
                .mtd_oracle().unwrap();
            let (p, s) = (o.phi_star(q), o.psi_star(q));
            prop_assert!(p >= q * q * (1.0 - 1e-12) && p <= 1.0 + 1e-12);
            prop_assert!((p * s / (q * q) - 1.0).abs() < 1e-12);
        }
    }
}
