use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Sampling window of a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Window {
    /// Closed axis-aligned box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Window {
    pub fn unit_cube(d: usize) -> Self {
        Window::Box { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        Window::Box { lo: vec![lo; d], hi: vec![hi; d] }
    }

    /// Centered cube `[-side/2, side/2]^d`.
    pub fn centered_cube(d: usize, side: f64) -> Self {
        Self::cube(d, -side / 2.0, side / 2.0)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Window::Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Window::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h),
            Window::Ball { center, radius } => dist(x, center) <= *radius,
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| (h - l).max(0.0)).product(),
            Window::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
        }
    }

    /// Bounding box as `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Window::Box { lo, hi } => (lo.clone(), hi.clone()),
            Window::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        dist(&lo, &hi)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Window::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return domain("box corners differ in dimension");
                }
                if lo.iter().chain(hi).any(|v| !v.is_finite()) || lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return domain("box corners must be finite with lo <= hi");
                }
            }
            Window::Ball { center, radius } => {
                if center.iter().any(|v| !v.is_finite()) || !(radius.is_finite() && *radius >= 0.0) {
                    return domain("ball window must have finite center and radius >= 0");
                }
            }
        }
        Ok(())
    }

    fn scaled(&self, alpha: f64) -> Self {
        match self {
            Window::Box { lo, hi } => Window::Box {
                lo: lo.iter().map(|v| v * alpha).collect(),
                hi: hi.iter().map(|v| v * alpha).collect(),
            },
            Window::Ball { center, radius } => Window::Ball {
                center: center.iter().map(|v| v * alpha).collect(),
                radius: radius * alpha,
            },
        }
    }

    fn translated(&self, v: &[f64]) -> Self {
        match self {
            Window::Box { lo, hi } => Window::Box {
                lo: lo.iter().zip(v).map(|(a, b)| a + b).collect(),
                hi: hi.iter().zip(v).map(|(a, b)| a + b).collect(),
            },
            Window::Ball { center, radius } => Window::Ball {
                center: center.iter().zip(v).map(|(a, b)| a + b).collect(),
                radius: *radius,
            },
        }
    }

    fn hull(&self, other: &Window) -> Window {
        let (alo, ahi) = self.bounds();
        let (blo, bhi) = other.bounds();
        Window::Box {
            lo: alo.iter().zip(&blo).map(|(a, b)| a.min(*b)).collect(),
            hi: ahi.iter().zip(&bhi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    // V_d = pi^{d/2} / Gamma(d/2 + 1), by the two-step recursion V_d = 2 pi / d * V_{d-2}.
    let (mut v, start) = if d % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A finite simple point cloud in `R^d` together with its sampling window.
///
/// Coordinates are stored flat, point-major, in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
    window: Window,
}

impl PointCloud {
    /// Validating constructor: finite coordinates, every point inside the
    /// window and no repeated point.
    pub fn new(d: usize, coords: Vec<f64>, window: Window) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be positive");
        }
        if window.dim() != d {
            return domain(format!("window has dimension {} but cloud has {}", window.dim(), d));
        }
        window.validate()?;
        if coords.len() % d != 0 {
            return domain("coordinate buffer length is not a multiple of d");
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return domain("non-finite coordinate");
        }
        let cloud = Self { d, coords, window };
        if let Some(i) = (0..cloud.len()).find(|&i| !cloud.window.contains(cloud.point(i))) {
            return domain(format!("point {i} lies outside the window"));
        }
        if cloud.has_duplicates() {
            return domain("point cloud is not simple (repeated point)");
        }
        Ok(cloud)
    }

    pub fn from_points(points: &[Vec<f64>], window: Window) -> Result<Self> {
        let d = window.dim();
        if points.iter().any(|p| p.len() != d) {
            return domain("point dimension does not match window");
        }
        Self::new(d, points.concat(), window)
    }

    /// Convenience for small hand-built clouds: window is the bounding box.
    pub fn from_points_bbox(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map(Vec::len).ok_or_else(|| Error::Domain("cannot infer dimension of an empty list".into()))?;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d.min(p.len()) {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Self::from_points(points, Window::Box { lo, hi })
    }

    pub fn empty(window: Window) -> Self {
        Self { d: window.dim(), coords: Vec::new(), window }
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(d: usize, coords: Vec<f64>, window: Window) -> Self {
        debug_assert_eq!(coords.len() % d, 0);
        Self { d, coords, window }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Sub-cloud of the points selected by `keep`, in original order.
    pub fn filter(&self, window: Window, mut keep: impl FnMut(&[f64]) -> bool) -> Self {
        let coords = self.points().filter(|p| keep(p)).flatten().copied().collect();
        Self::from_parts_unchecked(self.d, coords, window)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let coords = indices.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        Self::from_parts_unchecked(self.d, coords, self.window.clone())
    }

    /// `alpha * P`, with the window scaled accordingly.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_parts_unchecked(self.d, self.coords.iter().map(|v| v * alpha).collect(), self.window.scaled(alpha))
    }

    /// `P + v`.
    pub fn translated(&self, v: &[f64]) -> Self {
        let coords = self.points().flat_map(|p| p.iter().zip(v).map(|(a, b)| a + b)).collect();
        Self::from_parts_unchecked(self.d, coords, self.window.translated(v))
    }

    /// `P ∪ other`; points of `other` are appended after those of `self`.
    /// The window is kept when it already contains `other`, otherwise it is
    /// replaced by the bounding box of both windows.
    pub fn union(&self, other: &PointCloud) -> Result<Self> {
        if other.d != self.d {
            return domain("dimension mismatch in union");
        }
        let window = if other.points().all(|p| self.window.contains(p)) {
            self.window.clone()
        } else {
            self.window.hull(&other.window)
        };
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let out = Self::from_parts_unchecked(self.d, coords, window);
        if out.has_duplicates() {
            return domain("union is not simple: clouds share a point");
        }
        Ok(out)
    }

    /// Index of each point of `self` inside `other` (exact coordinate match).
    pub fn embedding_into(&self, other: &PointCloud) -> Option<Vec<usize>> {
        if self.d != other.d {
            return None;
        }
        let mut order: Vec<usize> = (0..other.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(other.point(a), other.point(b)));
        self.points()
            .map(|p| {
                order
                    .binary_search_by(|&j| lex_cmp(other.point(j), p))
                    .ok()
                    .map(|k| order[k])
            })
            .collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.points().any(|p| p == x)
    }

    fn has_duplicates(&self) -> bool {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(self.point(a), self.point(b)));
        order.windows(2).any(|w| self.point(w[0]) == self.point(w[1]))
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_outside_points() {
        let w = Window::unit_cube(2);
        assert!(PointCloud::from_points(&[vec![0.1, 0.2], vec![0.1, 0.2]], w.clone()).is_err());
        assert!(PointCloud::from_points(&[vec![1.5, 0.2]], w.clone()).is_err());
        assert!(PointCloud::from_points(&[vec![f64::NAN, 0.2]], w.clone()).is_err());
        assert_eq!(PointCloud::from_points(&[vec![0.1, 0.2], vec![0.2, 0.1]], w).unwrap().len(), 2);
    }

    #[test]
    fn ball_volume() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn embedding() {
        let y = PointCloud::from_points_bbox(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let x = y.select(&[2, 0]);
        assert_eq!(x.embedding_into(&y), Some(vec![2, 0]));
        let z = PointCloud::from_points_bbox(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(z.embedding_into(&y), None);
    }
}
