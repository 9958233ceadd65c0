//! Restriction of add-one computations to the interaction cluster of `Q`.
//!
//! `Z_q(K_r)` and `B_q(K_s)` split as direct sums over the connected
//! components of `K_s`. Components of `K_s(P ∪ Q)` that contain no point of
//! `Q` are also components of `K_s(P)`, so every difference
//! `f(P ∪ Q) − f(P)` of such additive quantities equals `f(C) − f(C \ Q)`
//! where `C` is the union of the components that meet `Q`.

use std::collections::VecDeque;

use crate::error::Result;
use crate::filtration::{build_with, forward_neighbors, FiltrationKind, TieBreak};
use crate::persistence::{reduce_with, RankQuery, ReduceOptions};
use crate::point_process::{dist, PointCloud, Window};

/// `dim Z_q(K_r)` and `dim Z_q(K_r) ∩ B_q(K_s)` for `q = 0..q_count`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub cycles: Vec<i64>,
    pub persistent_boundaries: Vec<i64>,
}

impl CycleStats {
    pub fn zero(q_count: usize) -> Self {
        Self { cycles: vec![0; q_count], persistent_boundaries: vec![0; q_count] }
    }

    pub fn betti(&self, q: usize) -> i64 {
        self.cycles[q] - self.persistent_boundaries[q]
    }

    pub fn minus(&self, other: &CycleStats) -> CycleStats {
        let sub = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        CycleStats {
            cycles: sub(&self.cycles, &other.cycles),
            persistent_boundaries: sub(&self.persistent_boundaries, &other.persistent_boundaries),
        }
    }
}

pub fn cycle_stats(cloud: &PointCloud, r: f64, s: f64, kind: FiltrationKind, q_count: usize) -> Result<CycleStats> {
    if cloud.is_empty() {
        return Ok(CycleStats::zero(q_count));
    }
    let complex = build_with(kind, cloud, s, q_count, TieBreak::Lexicographic)?;
    let pers = reduce_with(&complex, ReduceOptions { clearing: true });
    let mut out = CycleStats::zero(q_count);
    for q in 0..q_count {
        let z = pers.cycle_dim(q, r) as i64;
        let b = pers.diagram.rank_unchecked(RankQuery::new(q, r, s)) as i64;
        out.cycles[q] = z;
        out.persistent_boundaries[q] = z - b;
    }
    Ok(out)
}

/// `P ∩ B(z, W)` followed by the points of `Q`, with distances to `z` and
/// neighbor lists at a fixed edge length.
pub(crate) struct LocalScene {
    pub cloud: PointCloud,
    pub is_added: Vec<bool>,
    pub dist_to_center: Vec<f64>,
    pub adjacency: Vec<Vec<u32>>,
}

impl LocalScene {
    pub fn new(base: &PointCloud, added: &PointCloud, center: &[f64], window_radius: f64, edge: f64) -> Result<Self> {
        let inner = base.filter(Window::ball(center.to_vec(), window_radius), |x| dist(x, center) <= window_radius);
        let cloud = inner.union(added)?;
        let is_added = (0..cloud.len()).map(|i| i >= inner.len()).collect();
        let dist_to_center = cloud.points().map(|x| dist(x, center)).collect();
        let fwd = forward_neighbors(&cloud, edge);
        let mut adjacency = vec![Vec::new(); cloud.len()];
        for (i, nb) in fwd.iter().enumerate() {
            for &j in nb {
                adjacency[i].push(j);
                adjacency[j as usize].push(i as u32);
            }
        }
        Ok(Self { cloud, is_added, dist_to_center, adjacency })
    }

    /// Sorted indices of the components (among points within `a` of the
    /// center) that contain an added point.
    pub fn cluster(&self, a: f64) -> Vec<usize> {
        let active = |i: usize| self.dist_to_center[i] <= a;
        let mut seen = vec![false; self.cloud.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for i in 0..self.cloud.len() {
            if self.is_added[i] && active(i) {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        let mut out = Vec::new();
        while let Some(i) = queue.pop_front() {
            out.push(i);
            for &j in &self.adjacency[i] {
                let j = j as usize;
                if !seen[j] && active(j) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Component containing `start` among points within `a` of the center.
    pub fn component_of(&self, start: usize, a: f64) -> Vec<usize> {
        let mut seen = vec![false; self.cloud.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            out.push(i);
            for &j in &self.adjacency[i] {
                let j = j as usize;
                if !seen[j] && self.dist_to_center[j] <= a {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out
    }

    /// Distinct sorted distances to the center.
    pub fn event_radii(&self) -> Vec<f64> {
        let mut e = self.dist_to_center.clone();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    }

    /// `stats(C) − stats(C \ Q)` for the cluster `C`.
    pub fn cluster_difference(&self, cluster: &[usize], r: f64, s: f64, kind: FiltrationKind, q_count: usize) -> Result<CycleStats> {
        let with = self.cloud.select(cluster);
        let without_idx: Vec<usize> = cluster.iter().copied().filter(|&i| !self.is_added[i]).collect();
        let without = self.cloud.select(&without_idx);
        Ok(cycle_stats(&with, r, s, kind, q_count)?.minus(&cycle_stats(&without, r, s, kind, q_count)?))
    }
}
