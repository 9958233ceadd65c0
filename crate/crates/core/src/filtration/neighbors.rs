use std::collections::HashMap;

use crate::point_process::{dist, PointCloud};

/// For every point, the indices `j > i` with `|x_i - x_j| <= threshold`,
/// sorted ascending. Uses a uniform hash grid with cell side `threshold`.
/// Distances are compared unsquared so an edge whose length equals the
/// threshold is always found.
pub fn forward_neighbors(cloud: &PointCloud, threshold: f64) -> Vec<Vec<u32>> {
    let n = cloud.len();
    let mut out = vec![Vec::new(); n];
    if n < 2 || !(threshold >= 0.0) {
        return out;
    }
    if threshold == 0.0 || n <= 32 {
        for i in 0..n {
            for j in i + 1..n {
                if dist(cloud.point(i), cloud.point(j)) <= threshold {
                    out[i].push(j as u32);
                }
            }
        }
        return out;
    }
    let d = cloud.dim();
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / threshold).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
    for (i, p) in cloud.points().enumerate() {
        grid.entry(key(p)).or_default().push(i as u32);
    }
    let offsets = stencil(d);
    let mut probe = vec![0i64; d];
    for (i, p) in cloud.points().enumerate() {
        let k = key(p);
        for off in &offsets {
            for (slot, (a, b)) in probe.iter_mut().zip(k.iter().zip(off)) {
                *slot = a + b;
            }
            if let Some(bucket) = grid.get(&probe) {
                for &j in bucket {
                    if (j as usize) > i && dist(p, cloud.point(j as usize)) <= threshold {
                        out[i].push(j);
                    }
                }
            }
        }
        out[i].sort_unstable();
    }
    out
}

fn stencil(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{sample_poisson_homogeneous, sq_dist, Window};
    use crate::RngSeed;

    #[test]
    fn grid_matches_brute_force() {
        let cloud = sample_poisson_homogeneous(3.0, &Window::cube(2, -4.0, 4.0), RngSeed::new(4)).unwrap();
        let t = 0.7;
        let fast = forward_neighbors(&cloud, t);
        for i in 0..cloud.len() {
            let slow: Vec<u32> = (i + 1..cloud.len())
                .filter(|&j| sq_dist(cloud.point(i), cloud.point(j)).sqrt() <= t)
                .map(|j| j as u32)
                .collect();
            assert_eq!(fast[i], slow);
        }
    }
}
