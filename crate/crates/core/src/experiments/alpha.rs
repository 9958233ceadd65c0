use serde::{Deserialize, Serialize};

use super::harness::{check_censoring, replicate};
use super::stats::mean_se;
use crate::error::{domain, Result};
use crate::filtration::FiltrationKind;
use crate::point_process::{draw_from_density, sample_poisson_homogeneous, Density, PointCloud, Window};
use crate::rng::RngSeed;
use crate::stabilization::{weak_radius, RadiusSetup};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub r: f64,
    pub s: f64,
    pub q: usize,
    pub value: f64,
    pub se: f64,
    pub window_radius: f64,
    pub censored_fraction: f64,
    pub reps: usize,
}

/// One draw of the add-one experiment: the position `x ~ κ` that sets the
/// intensity, the local Poisson window around the origin, and the cost.
#[derive(Clone, Debug)]
pub struct AlphaSample {
    pub x: Vec<f64>,
    pub intensity: f64,
    pub window: PointCloud,
    pub cost: i64,
    pub censored: bool,
}

/// Smallest admissible truncation radius, `a*(s) + 2μ(s)` for `Q = {0}`.
pub fn min_alpha_window(kind: FiltrationKind, s: f64) -> f64 {
    3.0 * kind.diameter_bound(s)
}

/// Seeds of replicate `i`: stream 0 draws `x`, stream 1 draws the window.
pub fn alpha_sample(
    r: f64,
    s: f64,
    q: usize,
    density: &Density,
    window_radius: f64,
    kind: FiltrationKind,
    seed: RngSeed,
) -> Result<AlphaSample> {
    let d = density.dim();
    let mut x = Vec::with_capacity(d);
    draw_from_density(&mut seed.derive(0).rng(), density, &mut x)?;
    let intensity = density.eval(&x);
    let origin = vec![0.0; d];
    let window = sample_poisson_homogeneous(intensity, &Window::ball(origin.clone(), window_radius), seed.derive(1))?;
    let added = PointCloud::from_points(std::slice::from_ref(&origin), Window::ball(origin.clone(), window_radius))?;
    let weak = weak_radius(&window, &added, &origin, r, s, &RadiusSetup::new(kind, window_radius))?;
    Ok(AlphaSample { x, intensity, window, cost: weak.add_one[q], censored: weak.per_q[q].censored })
}

/// Monte Carlo estimate of `α(r, s)`: the mean add-one cost at the origin of
/// a homogeneous Poisson process of intensity `κ(X)`, `X ~ κ`, truncated to
/// the ball of radius `window_radius`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_alpha(
    r: f64,
    s: f64,
    q: usize,
    density: &Density,
    window_radius: f64,
    reps: usize,
    seed: RngSeed,
    kind: FiltrationKind,
) -> Result<AlphaEstimate> {
    let d = density.dim();
    if !(r >= 0.0 && r <= s && s.is_finite()) {
        return domain(format!("need 0 <= r <= s < inf, got r={r} s={s}"));
    }
    if q >= d {
        return domain(format!("q = {q} must be below the dimension {d}"));
    }
    if reps == 0 {
        return domain("alpha needs at least one replicate");
    }
    let min_w = min_alpha_window(kind, s);
    if !(window_radius >= min_w) {
        return domain(format!("window radius {window_radius} is below a*(s) + 2μ(s) = {min_w}"));
    }
    let samples = replicate(reps, seed, |_, sd| {
        alpha_sample(r, s, q, density, window_radius, kind, sd).map(|a| (a.cost, a.censored))
    })?;
    let censored = samples.iter().filter(|x| x.1).count();
    let censored_fraction = check_censoring(censored, reps, "alpha")?;
    let costs: Vec<f64> = samples.iter().map(|x| x.0 as f64).collect();
    let (value, se) = mean_se(&costs);
    let se = if reps < 2 { 0.0 } else { se };
    Ok(AlphaEstimate { r, s, q, value, se, window_radius, censored_fraction, reps })
}
