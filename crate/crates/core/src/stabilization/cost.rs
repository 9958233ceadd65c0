use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::filtration::{build_with, count_new_simplices, FiltrationKind, TieBreak};
use crate::persistence::{reduce_with, RankQuery, ReduceOptions};
use crate::point_process::{in_unit_cell, swap_window, PointCloud, Window};

/// `β^{r,s}_q(𝒦(P))` on the whole cloud (no caps beyond `s` and `q + 1`).
pub fn persistent_betti_of(cloud: &PointCloud, query: RankQuery, kind: FiltrationKind) -> Result<usize> {
    if !(query.r >= 0.0 && query.r <= query.s) {
        return domain(format!("need 0 <= r <= s, got r={} s={}", query.r, query.s));
    }
    if cloud.is_empty() {
        return Ok(0);
    }
    let complex = build_with(kind, cloud, query.s, query.q + 1, TieBreak::Lexicographic)?;
    let pers = reduce_with(&complex, ReduceOptions { clearing: true });
    Ok(pers.diagram.rank_unchecked(query))
}

/// Add-one cost `β^{r,s}_q(𝒦(P ∪ Q)) − β^{r,s}_q(𝒦(P))`, by two full
/// persistence computations. `P` and `Q` must be disjoint.
pub fn add_one_cost(base: &PointCloud, added: &PointCloud, query: RankQuery, kind: FiltrationKind) -> Result<i64> {
    let with = base.union(added)?;
    let after = persistent_betti_of(&with, query, kind)? as i64;
    let before = persistent_betti_of(base, query, kind)? as i64;
    Ok(after - before)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapDifferenceRecord {
    pub z: Vec<i64>,
    pub n: f64,
    pub r: f64,
    pub s: f64,
    pub q: usize,
    /// `β(P ∩ B_n) − β(((P \ Q(z)) ∪ (P' ∩ Q(z))) ∩ B_n)`.
    pub value: i64,
    /// Geometric-lemma bound through the common subset `P ∩ B_n \ Q(z)`.
    pub bound: usize,
}

/// `B_n = [−n^{1/d}/2, n^{1/d}/2]^d`.
pub fn window_b_n(d: usize, n: f64) -> Window {
    Window::centered_cube(d, n.powf(1.0 / d as f64))
}

/// Swap difference `Δ^{r,s}_z(B_n)`: effect on `β^{r,s}_q` of resampling the
/// unit cell `Q(z)` from `P'`.
pub fn swap_difference(
    p: &PointCloud,
    p_prime: &PointCloud,
    z: &[i64],
    n: f64,
    query: RankQuery,
    kind: FiltrationKind,
) -> Result<SwapDifferenceRecord> {
    let d = p.dim();
    if p_prime.dim() != d || z.len() != d {
        return domain("dimension mismatch in swap_difference");
    }
    if !(n > 0.0) {
        return domain("window scale n must be positive");
    }
    let b_n = window_b_n(d, n);
    let half = n.powf(1.0 / d as f64) / 2.0;
    if z.iter().any(|&c| (c as f64) - 0.5 < -half || (c as f64) + 0.5 > half) {
        return domain(format!("Q(z) for z={z:?} is not contained in B_n (half-width {half})"));
    }
    let p_n = p.filter(b_n.clone(), |x| b_n.contains(x));
    let pp_n = p_prime.filter(b_n.clone(), |x| b_n.contains(x));
    let swapped = swap_window(&p_n, &pp_n, z)?;
    let value = persistent_betti_of(&p_n, query, kind)? as i64 - persistent_betti_of(&swapped, query, kind)? as i64;

    let common = p_n.filter(b_n.clone(), |x| !in_unit_cell(x, z));
    let mut bound = 0;
    for j in query.q..=query.q + 1 {
        bound += count_new_simplices(&common, &p_n, query.s, j, kind)?;
        bound += count_new_simplices(&common, &swapped, query.s, j, kind)?;
    }
    Ok(SwapDifferenceRecord { z: z.to_vec(), n, r: query.r, s: query.s, q: query.q, value, bound })
}
