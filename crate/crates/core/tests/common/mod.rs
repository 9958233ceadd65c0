#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use pslab_core::filtration::{FilteredComplex, FiltrationKind};
use pslab_core::point_process::{PointCloud, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [FiltrationKind; 2] = [FiltrationKind::Rips, FiltrationKind::Cech];

pub fn cloud(points: &[Vec<f64>]) -> PointCloud {
    PointCloud::from_points_bbox(points).unwrap()
}

pub fn unit_square() -> PointCloud {
    cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
}

fn dedup(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Up to `max_n` distinct points in `[0, side]^d`, half the time snapped to
/// a coarse grid so that tied filtration times show up.
pub fn cloud_strategy(d: usize, max_n: usize, side: f64) -> impl Strategy<Value = PointCloud> {
    let continuous = prop::collection::vec(prop::collection::vec(0.0..side, d), 1..=max_n);
    let grid = prop::collection::vec(prop::collection::vec(0u8..6, d), 1..=max_n)
        .prop_map(move |v| v.into_iter().map(|p| p.into_iter().map(|c| c as f64 * side / 5.0).collect()).collect());
    prop_oneof![continuous, grid].prop_map(|pts: Vec<Vec<f64>>| cloud(&dedup(pts)))
}

pub fn kind_strategy() -> impl Strategy<Value = FiltrationKind> {
    prop_oneof![Just(FiltrationKind::Rips), Just(FiltrationKind::Cech)]
}

/// `n` uniform points in `[0, side]^d` from a plain seeded generator.
pub fn random_points(seed: u64, n: usize, d: usize, side: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dedup((0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * side).collect()).collect())
}

pub fn random_cloud(seed: u64, n: usize, d: usize, side: f64) -> PointCloud {
    let pts = random_points(seed, n, d, side);
    PointCloud::from_points(&pts, Window::cube(d, 0.0, side)).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn diameter(pts: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(dist(pts[i], pts[j]));
        }
    }
    best
}

fn circumcircle(a: &[f64], b: &[f64], c: &[f64]) -> Option<(Vec<f64>, f64)> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let det = 2.0 * (bx * cy - by * cx);
    if det.abs() < 1e-14 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / det;
    let uy = (bx * c2 - cx * b2) / det;
    let center = vec![a[0] + ux, a[1] + uy];
    let radius = (ux * ux + uy * uy).sqrt();
    Some((center, radius))
}

/// Smallest enclosing circle in the plane by trying every support set of one,
/// two or three points.
pub fn brute_miniball_2d(pts: &[&[f64]]) -> f64 {
    let encloses = |c: &[f64], rad: f64| pts.iter().all(|p| dist(p, c) <= rad + 1e-9);
    let mut best = f64::INFINITY;
    let n = pts.len();
    for i in 0..n {
        if encloses(pts[i], 0.0) {
            best = best.min(0.0);
        }
        for j in i + 1..n {
            let c: Vec<f64> = pts[i].iter().zip(pts[j]).map(|(x, y)| (x + y) / 2.0).collect();
            let rad = dist(pts[i], pts[j]) / 2.0;
            if rad < best && encloses(&c, rad) {
                best = rad;
            }
            for k in j + 1..n {
                if let Some((c, rad)) = circumcircle(pts[i], pts[j], pts[k]) {
                    if rad < best && encloses(&c, rad) {
                        best = rad;
                    }
                }
            }
        }
    }
    best
}

/// Filtration time of a vertex set computed from scratch (planar for Čech).
pub fn brute_time(kind: FiltrationKind, pts: &[&[f64]]) -> f64 {
    match kind {
        FiltrationKind::Rips => diameter(pts),
        FiltrationKind::Cech => brute_miniball_2d(pts),
    }
}

/// Every vertex subset of size at most `q_max + 1` with its time, keeping
/// those at or below `r_max`.
pub fn brute_complex(kind: FiltrationKind, p: &PointCloud, r_max: f64, q_max: usize) -> BTreeMap<Vec<u32>, f64> {
    let n = p.len();
    let mut out = BTreeMap::new();
    for mask in 1u32..(1u32 << n) {
        let verts: Vec<u32> = (0..n as u32).filter(|i| mask >> i & 1 == 1).collect();
        if verts.len() > q_max + 1 {
            continue;
        }
        let pts: Vec<&[f64]> = verts.iter().map(|&v| p.point(v as usize)).collect();
        let t = brute_time(kind, &pts);
        if t <= r_max + 1e-12 {
            out.insert(verts, t);
        }
    }
    out
}

pub fn cell_map(c: &FilteredComplex) -> BTreeMap<Vec<u32>, f64> {
    c.cells().iter().map(|cell| (cell.simplex.vertices().to_vec(), cell.time)).collect()
}

/// Number of components of the graph joining points at distance `<= reach`,
/// by depth-first search.
pub fn components(pts: &[Vec<f64>], reach: f64) -> usize {
    let n = pts.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && dist(&pts[i], &pts[j]) <= reach {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}
