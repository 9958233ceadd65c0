//! Smallest enclosing ball by Welzl's randomized incremental algorithm.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::point_process::sq_dist;

/// Slack used when testing whether a point lies in a candidate ball.
pub const MINIBALL_EPS: f64 = 1e-10;

const SHUFFLE_SEED: u64 = 0x6d69_6e69_6261_6c6c;

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        sq_dist(&self.center, p).sqrt() <= self.radius + MINIBALL_EPS
    }
}

/// Smallest ball enclosing `points`. The input order is shuffled with a
/// fixed seed, so the result is deterministic.
pub fn miniball(points: &[&[f64]]) -> Result<Ball> {
    let Some(first) = points.first() else {
        return domain("miniball of an empty point set");
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return domain("miniball points differ in dimension");
    }
    let mut pts: Vec<&[f64]> = points.to_vec();
    if pts.len() > d + 1 {
        pts.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    }
    let mut support = Vec::with_capacity(d + 1);
    let ball = welzl(&pts, pts.len(), &mut support, d);
    Ok(ball.expect("nonempty input always yields a ball"))
}

/// Radius only; convenience for filtration times.
pub fn miniball_radius(points: &[&[f64]]) -> Result<f64> {
    miniball(points).map(|b| b.radius)
}

fn welzl<'a>(pts: &[&'a [f64]], end: usize, support: &mut Vec<&'a [f64]>, d: usize) -> Option<Ball> {
    let mut ball = ball_on_boundary(support);
    if support.len() == d + 1 {
        return ball;
    }
    for i in 0..end {
        let inside = ball.as_ref().is_some_and(|b| b.contains(pts[i]));
        if !inside {
            support.push(pts[i]);
            ball = welzl(pts, i, support, d);
            support.pop();
        }
    }
    ball
}

/// Smallest ball having all of `support` on its boundary (the circumball
/// within the affine hull). Falls back to the smallest enclosing ball of the
/// support when the points are affinely dependent.
fn ball_on_boundary(support: &[&[f64]]) -> Option<Ball> {
    match support {
        [] => None,
        [p] => Some(Ball { center: p.to_vec(), radius: 0.0 }),
        [p, q] => {
            let center: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
            Some(Ball { radius: 0.5 * sq_dist(p, q).sqrt(), center })
        }
        _ => circumball(support).or_else(|| degenerate_fallback(support)),
    }
}

fn circumball(support: &[&[f64]]) -> Option<Ball> {
    let origin = support[0];
    let k = support.len() - 1;
    let vs: Vec<Vec<f64>> = support[1..].iter().map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Solve sum_j lambda_j 2 v_i.v_j = v_i.v_i for the center offset sum_j lambda_j v_j.
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * dot(&vs[i], &vs[j]);
        }
        a[i][k] = dot(&vs[i], &vs[i]);
    }
    let scale = a.iter().map(|row| row[..k].iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max);
    let lambda = solve_augmented(&mut a, k, scale * 1e-12)?;
    let mut center = origin.to_vec();
    for (l, v) in lambda.iter().zip(&vs) {
        for (c, x) in center.iter_mut().zip(v) {
            *c += l * x;
        }
    }
    let radius = support.iter().map(|p| sq_dist(p, &center)).fold(0.0, f64::max).sqrt();
    Some(Ball { center, radius })
}

fn solve_augmented(a: &mut [Vec<f64>], k: usize, tol: f64) -> Option<Vec<f64>> {
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= tol {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}

fn degenerate_fallback(support: &[&[f64]]) -> Option<Ball> {
    let n = support.len();
    let mut best: Option<Ball> = None;
    for mask in 1u32..(1 << n) - 1 {
        let sub: Vec<&[f64]> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| support[i]).collect();
        if let Some(b) = ball_on_boundary(&sub) {
            if support.iter().all(|p| b.contains(p)) && best.as_ref().is_none_or(|bb| b.radius < bb.radius) {
                best = Some(b);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_and_pair() {
        let p = [1.0, 2.0];
        let b = miniball(&[&p]).unwrap();
        assert_eq!(b, Ball { center: vec![1.0, 2.0], radius: 0.0 });
        let q = [3.0, 2.0];
        let b = miniball(&[&p, &q]).unwrap();
        assert_eq!(b.center, vec![2.0, 2.0]);
        assert_eq!(b.radius, 1.0);
        assert!(miniball(&[]).is_err());
    }

    #[test]
    fn equilateral_and_obtuse() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]);
        assert!((miniball_radius(&[&a, &b, &c]).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        let (a, b, c) = ([0.0, 0.0], [2.0, 0.0], [1.0, 0.1]);
        assert!((miniball_radius(&[&a, &b, &c]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_triple() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [3.0, 0.0]);
        let ball = miniball(&[&a, &b, &c]).unwrap();
        assert!((ball.radius - 1.5).abs() < 1e-12);
    }

    #[test]
    fn regular_tetrahedron() {
        let s = 1.0 / 2f64.sqrt();
        let pts = [[1.0, 0.0, -s], [-1.0, 0.0, -s], [0.0, 1.0, s], [0.0, -1.0, s]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let r = miniball_radius(&refs).unwrap();
        // Edge 2, circumradius = edge * sqrt(6) / 4.
        assert!((r - 2.0 * 6f64.sqrt() / 4.0).abs() < 1e-12);
    }
}
