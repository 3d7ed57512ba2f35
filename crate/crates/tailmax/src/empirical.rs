//! Pseudo-observations, the empirical copula, and the empirical
//! maximal-dependence rectangle.
//!
//! The central routine is [`mtd_maximizer`]: for a threshold `q` it maximizes
//! the step function `x ↦ C_n(x, q²/x)` over `x ∈ [q², 1]` exactly. A pair
//! `(u_i, v_i)` is counted at `x` iff `x ∈ [u_i, q²/v_i]`, so the profile is
//! piecewise constant with breakpoints at the interval ends; an event sweep
//! over those ends finds the global maximum in `O(n log n)`.

use crate::error::{Error, Result};

/// Paired pseudo-observations on the unit square, in time order.
#[derive(Debug, Clone)]
pub struct PseudoSample {
    pub pairs: Vec<(f64, f64)>,
    pub source_label: String,
}

/// The empirical MTD rectangle at threshold `q`.
#[derive(Debug, Clone)]
pub struct RectangleSelection {
    pub q: f64,
    /// Empirical maximizer φ*_n(q) ∈ [q², 1].
    pub phi_star_n: f64,
    /// Indices (into the sample) of the pairs inside the rectangle.
    pub member_indices: Vec<usize>,
    /// Members rescaled to the unit square: (u_i/φ*_n, v_i·φ*_n/q²).
    pub scaled_pairs: Vec<(f64, f64)>,
    /// Size of the originating sample.
    pub n: usize,
}

/// The diagonal (square) selection at threshold `q`.
#[derive(Debug, Clone)]
pub struct DiagonalSelection {
    pub q: f64,
    pub member_indices: Vec<usize>,
    /// w_i = q / max(u_i, v_i), sorted descending.
    pub w_values: Vec<f64>,
}

impl PseudoSample {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// Empirical copula C_n(u,v) = (1/n)·#{i : u_i ≤ u, v_i ≤ v}.
    pub fn empirical_copula(&self, u: f64, v: f64) -> f64 {
        let cnt = self.pairs.iter().filter(|&&(a, b)| a <= u && b <= v).count();
        cnt as f64 / self.n() as f64
    }
}

/// Ranks of `vals` (1-based, ascending), ties broken by first occurrence.
fn ranks(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let mut r = vec![0usize; vals.len()];
    for (pos, &i) in idx.iter().enumerate() {
        r[i] = pos + 1;
    }
    r
}

/// Rank-transform a pair of aligned series into pseudo-observations
/// u_i = rank(x_i)/(n+1). Smallest values map near zero, so differenced log
/// prices place joint extreme losses at the lower-left corner.
pub fn pseudo_observations(x: &[f64], y: &[f64], source_label: &str) -> Result<PseudoSample> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Data("need at least 2 paired observations".into()));
    }
    let n1 = (x.len() + 1) as f64;
    let rx = ranks(x);
    let ry = ranks(y);
    let pairs = rx
        .iter()
        .zip(&ry)
        .map(|(&a, &b)| (a as f64 / n1, b as f64 / n1))
        .collect();
    Ok(PseudoSample { pairs, source_label: source_label.to_string() })
}

/// Find φ*_n(q) = argmax_{x ∈ [q²,1]} C_n(x, q²/x) and the member rectangle.
///
/// Ties between maximizing candidates are broken toward the diagonal square:
/// the candidate minimizing |log x − log q| wins. An empty rectangle (no pair
/// with u_i·v_i ≤ q²) yields φ*_n = q and no members.
pub fn mtd_maximizer(sample: &PseudoSample, q: f64) -> Result<RectangleSelection> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("q must lie in (0,1], got {q}")));
    }
    let q2 = q * q;
    // admissible pairs contribute on [max(u_i, q²), min(q²/v_i, 1)]; the
    // candidate maximizers are every pair's clipped endpoints plus q² and 1,
    // carried as zero-delta probes so ties can resolve to any of them
    let mut events: Vec<(f64, i8)> = vec![(q2, 0), (1.0, 0)];
    for &(u, v) in &sample.pairs {
        let start = u.max(q2);
        let end = (q2 / v).min(1.0);
        if start <= end {
            events.push((start, 1));
            events.push((end, -1));
        } else {
            if (q2..=1.0).contains(&u) {
                events.push((u, 0));
            }
            if end >= q2 {
                events.push((end, 0));
            }
        }
    }
    // starts, then probes, then ends at equal coordinates, so the count at
    // an event coordinate x is the inclusive interval count there
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let lq = q.ln();
    let mut best_count: i64 = -1;
    let mut best_x = q;
    let mut count: i64 = 0;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x && events[i].1 > 0 {
            count += 1;
            i += 1;
        }
        let better = count > best_count
            || (count == best_count && (x.ln() - lq).abs() < (best_x.ln() - lq).abs());
        if better {
            best_count = count;
            best_x = x;
        }
        while i < events.len() && events[i].0 == x && events[i].1 == 0 {
            i += 1;
        }
        while i < events.len() && events[i].0 == x && events[i].1 < 0 {
            count -= 1;
            i += 1;
        }
    }
    if best_count == 0 {
        // empty rectangle: no admissible pairs at this threshold
        return Ok(RectangleSelection {
            q,
            phi_star_n: q,
            member_indices: Vec::new(),
            scaled_pairs: Vec::new(),
            n: sample.n(),
        });
    }
    let phi = best_x;
    // membership mirrors the interval construction so the count matches
    let mut member_indices = Vec::with_capacity(best_count.max(0) as usize);
    let mut scaled_pairs = Vec::with_capacity(best_count.max(0) as usize);
    for (idx, &(u, v)) in sample.pairs.iter().enumerate() {
        if u.max(q2) <= phi && phi <= (q2 / v).min(1.0) {
            member_indices.push(idx);
            scaled_pairs.push(((u / phi).min(1.0), (v * phi / q2).min(1.0)));
        }
    }
    Ok(RectangleSelection { q, phi_star_n: phi, member_indices, scaled_pairs, n: sample.n() })
}

impl RectangleSelection {
    /// Number of member pairs m_{q,n}.
    pub fn m_q(&self) -> usize {
        self.member_indices.len()
    }

    /// Empirical maximal tail probability Π*_n(q) = m_q / n.
    pub fn pi_star_n(&self) -> f64 {
        self.m_q() as f64 / self.n as f64
    }

    /// Empirical scaled rectangle cdf F*_{q,M}(u,v) over the member points.
    pub fn empirical_fstar(&self, u: f64, v: f64) -> Result<f64> {
        if self.scaled_pairs.is_empty() {
            return Err(Error::EmptySelection("no members in the MTD rectangle".into()));
        }
        let cnt = self
            .scaled_pairs
            .iter()
            .filter(|&&(a, b)| a <= u && b <= v)
            .count();
        Ok(cnt as f64 / self.m_q() as f64)
    }
}

/// Select pairs in the square [0,q]² and compute w_i = q / max(u_i, v_i).
pub fn diagonal_selection(sample: &PseudoSample, q: f64) -> Result<DiagonalSelection> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("q must lie in (0,1], got {q}")));
    }
    let mut member_indices = Vec::new();
    let mut w_values = Vec::new();
    for (i, &(u, v)) in sample.pairs.iter().enumerate() {
        if u <= q && v <= q {
            member_indices.push(i);
            w_values.push(q / u.max(v));
        }
    }
    w_values.sort_by(|a, b| b.total_cmp(a));
    Ok(DiagonalSelection { q, member_indices, w_values })
}

/// Fenwick tree over 1-based ranks, counting inserted elements.
pub(crate) struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    pub fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks ≤ i.
    pub fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Inclusive dominance counts: for each member k, the number of members j
/// with ũ_j ≤ ũ_k and ṽ_j ≤ ṽ_k (so count_k / m = F*_{q,M}(ũ_k, ṽ_k)).
///
/// Members with equal ũ are inserted as a group before any of them queries,
/// and ṽ tie-ranks map to the last tied position, so ties count inclusively
/// on both axes. `O(m log m)`.
pub(crate) fn fstar_inclusive_counts(pairs: &[(f64, f64)]) -> Vec<u32> {
    let m = pairs.len();
    // v-rank with ties at the upper position
    let mut vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    vs.sort_by(f64::total_cmp);
    let vrank = |v: f64| vs.partition_point(|&x| x <= v);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let mut bit = Fenwick::new(m);
    let mut counts = vec![0u32; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && pairs[order[j]].0 == pairs[order[i]].0 {
            bit.add(vrank(pairs[order[j]].1));
            j += 1;
        }
        for &k in &order[i..j] {
            counts[k] = bit.prefix(vrank(pairs[k].1));
        }
        i = j;
    }
    counts
}
