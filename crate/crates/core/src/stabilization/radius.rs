use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::local::{CycleStats, LocalScene};
use crate::error::{domain, Result};
use crate::filtration::{build_with, FiltrationKind, Simplex, TieBreak};
use crate::persistence::zero_after_reduction;
use crate::point_process::{dist, PointCloud};

/// A stabilization radius computed on a finite window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub value: f64,
    /// Set when constancy (or the certificate) could not be confirmed
    /// inside the window.
    pub censored: bool,
    /// Trailing length over which constancy was required.
    pub margin: f64,
}

/// Window and filtration shared by the radius computations.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusSetup {
    pub kind: FiltrationKind,
    /// Radius of the ball around the center that the data covers.
    pub window_radius: f64,
    /// Trailing constancy margin for the weak radius; `2μ(s)` when `None`.
    pub margin: Option<f64>,
}

impl RadiusSetup {
    pub fn new(kind: FiltrationKind, window_radius: f64) -> Self {
        Self { kind, window_radius, margin: None }
    }
}

/// Per-event values of `D₁(a) = dim Z_q(𝒦'_{r,a}) − dim Z_q(𝒦_{r,a})` and
/// `D₂(a) = dim Z_q(𝒦'_{r,a}) ∩ B_q(𝒦'_{s,a}) − dim Z_q(𝒦_{r,a}) ∩ B_q(𝒦_{s,a})`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationTrace {
    pub center: Vec<f64>,
    pub r: f64,
    pub s: f64,
    pub radii: Vec<f64>,
    /// `d1[k][q]` at `radii[k]`.
    pub d1: Vec<Vec<i64>>,
    pub d2: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakRadius {
    /// `ρ_{(r,s)}`: constancy over all `q = 0..d-1`.
    pub overall: RadiusEstimate,
    /// Constancy of the `q`-th pair of differences alone.
    pub per_q: Vec<RadiusEstimate>,
    /// Add-one cost `D₁ − D₂` at the window edge, per `q`.
    pub add_one: Vec<i64>,
    pub trace: StabilizationTrace,
}

fn spread(added: &PointCloud, center: &[f64]) -> f64 {
    added.points().map(|x| dist(x, center)).fold(0.0, f64::max)
}

/// Event-driven radius of weak stabilization of `(r, s)`.
///
/// Both differences are evaluated at every distance from `center` of a
/// point of `P ∪ Q` inside the window; between events they cannot change.
/// The reported value is the last event at which some difference changed
/// (0 if none did).
pub fn weak_radius(
    base: &PointCloud,
    added: &PointCloud,
    center: &[f64],
    r: f64,
    s: f64,
    setup: &RadiusSetup,
) -> Result<WeakRadius> {
    if !(r >= 0.0 && r <= s && s.is_finite()) {
        return domain(format!("need 0 <= r <= s < inf, got r={r} s={s}"));
    }
    let d = base.dim();
    if center.len() != d || added.dim() != d {
        return domain("dimension mismatch in weak_radius");
    }
    let kind = setup.kind;
    let reach = kind.diameter_bound(s);
    let a_star = spread(added, center) + reach;
    let window = setup.window_radius;
    if !(window >= a_star) {
        return domain(format!("window radius {window} is smaller than a*(s) = {a_star}"));
    }
    let margin = setup.margin.unwrap_or(2.0 * reach);
    let scene = LocalScene::new(base, added, center, window, reach)?;

    let mut trace = StabilizationTrace { center: center.to_vec(), r, s, radii: Vec::new(), d1: Vec::new(), d2: Vec::new() };
    let mut current = CycleStats::zero(d);
    let mut current_cluster: Vec<usize> = Vec::new();
    let mut last_change = vec![0.0f64; d];
    for a in scene.event_radii() {
        let cluster = scene.cluster(a);
        if cluster != current_cluster {
            let next = scene.cluster_difference(&cluster, r, s, kind, d)?;
            for (q, lc) in last_change.iter_mut().enumerate() {
                if next.cycles[q] != current.cycles[q] || next.persistent_boundaries[q] != current.persistent_boundaries[q] {
                    *lc = a;
                }
            }
            current = next;
            current_cluster = cluster;
        }
        trace.radii.push(a);
        trace.d1.push(current.cycles.clone());
        trace.d2.push(current.persistent_boundaries.clone());
    }

    let estimate = |value: f64| RadiusEstimate { value, censored: window - value < margin, margin };
    let per_q: Vec<RadiusEstimate> = last_change.iter().map(|&v| estimate(v)).collect();
    let overall = estimate(last_change.iter().copied().fold(0.0, f64::max));
    let add_one = (0..d).map(|q| current.betti(q)).collect();
    Ok(WeakRadius { overall, per_q, add_one, trace })
}

/// Upper-bound surrogate for the radius of strong stabilization `ρ̃^q_r`.
///
/// Returns the smallest horizon `R >= a*(r)` at which every new
/// `q`-simplex (one with a vertex in `Q`) is either positive, i.e. its
/// boundary lies in the span of the boundaries of the old `q`-simplices in
/// `B(z, R)` and of the new ones before it, or sits in a connected component
/// of the `r`-skeleton that stays clear of the collar
/// `B(z, R) \ B(z, R − 2μ(r))`, so no point outside the horizon can join it.
pub fn strong_radius_estimate(
    base: &PointCloud,
    added: &PointCloud,
    center: &[f64],
    r: f64,
    q: usize,
    setup: &RadiusSetup,
) -> Result<RadiusEstimate> {
    if !(r >= 0.0 && r.is_finite()) {
        return domain(format!("filtration parameter must be finite and nonnegative, got {r}"));
    }
    let d = base.dim();
    if center.len() != d || added.dim() != d {
        return domain("dimension mismatch in strong_radius_estimate");
    }
    let kind = setup.kind;
    let reach = kind.diameter_bound(r);
    let collar = 2.0 * reach;
    let a_star = spread(added, center) + reach;
    let window = setup.window_radius;
    if !(window >= a_star) {
        return domain(format!("window radius {window} is smaller than a*(r) = {a_star}"));
    }
    let scene = LocalScene::new(base, added, center, window, reach)?;

    let mut horizons: Vec<f64> = vec![a_star];
    for &x in &scene.dist_to_center {
        horizons.push(x);
        horizons.push(x + collar);
    }
    horizons.retain(|&h| h >= a_star && h <= window);
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();

    let mut cached: Option<(Vec<usize>, Vec<NewSimplex>)> = None;
    for horizon in horizons {
        let cluster = scene.cluster(horizon);
        if cached.as_ref().is_none_or(|(c, _)| *c != cluster) {
            let news = classify_new_simplices(&scene, &cluster, r, q, kind)?;
            cached = Some((cluster, news));
        }
        let (_, news) = cached.as_ref().expect("just filled");
        if news.is_empty() {
            return Ok(RadiusEstimate { value: horizon, censored: false, margin: collar });
        }
        let mut closed: HashMap<usize, bool> = HashMap::new();
        let all_certified = news.iter().all(|n| {
            n.positive
                || *closed.entry(n.anchor).or_insert_with(|| {
                    scene
                        .component_of(n.anchor, horizon)
                        .iter()
                        .all(|&i| scene.dist_to_center[i] + collar <= horizon)
                })
        });
        if all_certified {
            return Ok(RadiusEstimate { value: horizon, censored: false, margin: collar });
        }
    }
    Ok(RadiusEstimate { value: window, censored: true, margin: collar })
}

struct NewSimplex {
    positive: bool,
    /// An added vertex of the simplex, as a scene index.
    anchor: usize,
}

fn classify_new_simplices(scene: &LocalScene, cluster: &[usize], r: f64, q: usize, kind: FiltrationKind) -> Result<Vec<NewSimplex>> {
    if cluster.is_empty() {
        return Ok(Vec::new());
    }
    let complex = build_with(kind, &scene.cloud.select(cluster), r, q, TieBreak::Lexicographic)?;
    let is_new = |s: &Simplex| s.vertices().iter().any(|&v| scene.is_added[cluster[v as usize]]);
    let faces: HashMap<&Simplex, usize> = complex
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| q > 0 && c.simplex.dim() == q - 1)
        .map(|(i, c)| (&c.simplex, i))
        .collect();
    let column = |s: &Simplex| {
        let mut col: Vec<usize> = s.facets().map(|f| faces[&f]).collect();
        col.sort_unstable();
        col
    };
    let top: Vec<&Simplex> = complex.cells().iter().filter(|c| c.simplex.dim() == q).map(|c| &c.simplex).collect();
    let new: Vec<&Simplex> = top.iter().copied().filter(|s| is_new(s)).collect();
    let mut columns: Vec<Vec<usize>> = top.iter().filter(|s| !is_new(s)).map(|s| column(s)).collect();
    let old_count = columns.len();
    columns.extend(new.iter().map(|s| column(s)));
    let zero = zero_after_reduction(columns);
    Ok(new
        .iter()
        .zip(&zero[old_count..])
        .map(|(s, &positive)| {
            let v = s.vertices().iter().find(|&&v| scene.is_added[cluster[v as usize]]).expect("new simplex");
            NewSimplex { positive, anchor: cluster[*v as usize] }
        })
        .collect())
}
