use crate::filtration::{forward_neighbors, FiltrationKind};
use crate::point_process::PointCloud;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if two distinct sets were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ComponentCount {
    pub count: usize,
    /// Set when the input cloud had no points.
    pub empty_input: bool,
}

/// Number of connected components of the 1-skeleton at filtration time
/// `threshold`: points joined when at distance `<= threshold` (Rips) or
/// `<= 2·threshold` (Čech).
pub fn connected_component_count(p: &PointCloud, threshold: f64, kind: FiltrationKind) -> ComponentCount {
    if p.is_empty() {
        return ComponentCount { count: 0, empty_input: true };
    }
    let mut uf = UnionFind::new(p.len());
    for (i, nb) in forward_neighbors(p, kind.diameter_bound(threshold)).iter().enumerate() {
        for &j in nb {
            uf.union(i, j as usize);
        }
    }
    ComponentCount { count: uf.set_count(), empty_input: false }
}
