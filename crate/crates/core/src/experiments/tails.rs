use serde::{Deserialize, Serialize};

use super::harness::replicate;
use super::stats::{wilson, Wilson};
use crate::error::{domain, Result};
use crate::filtration::FiltrationKind;
use crate::point_process::{sample_poisson_homogeneous, PointCloud, Window};
use crate::rng::RngSeed;
use crate::stabilization::{strong_radius_estimate, weak_radius, RadiusSetup};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub d: usize,
    pub kind: FiltrationKind,
    pub lambdas: Vec<f64>,
    pub rs: Vec<f64>,
    pub qs: Vec<usize>,
    /// Ascending thresholds `L`.
    pub l_grid: Vec<f64>,
    pub reps: usize,
    /// Radius of the Poisson ball around the origin.
    pub window: f64,
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    Weak,
    Strong,
}

impl RadiusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RadiusKind::Weak => "weak",
            RadiusKind::Strong => "strong",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub radius: RadiusKind,
    pub lambda: f64,
    pub r: f64,
    pub q: usize,
    /// `P̂(radius > L)` with Wilson bounds, one per grid entry.
    pub survival: Vec<Wilson>,
    pub censored: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub l_grid: Vec<f64>,
    pub reps: usize,
    pub rows: Vec<TailRow>,
}

impl TailTable {
    pub fn rows_of(&self, radius: RadiusKind) -> impl Iterator<Item = &TailRow> + '_ {
        self.rows.iter().filter(move |row| row.radius == radius)
    }

    /// Smallest grid index whose worst survival over the `radius` rows is at
    /// most `level` plus the Wilson half-width of that worst cell.
    pub fn tight_index(&self, radius: RadiusKind, level: f64) -> Option<usize> {
        (0..self.l_grid.len()).find(|&k| {
            self.rows_of(radius)
                .map(|row| row.survival[k])
                .max_by(|a, b| a.estimate.total_cmp(&b.estimate))
                .is_none_or(|w| w.estimate <= level + w.half_width())
        })
    }
}

#[derive(Clone, Debug)]
struct TailSample {
    weak: Vec<(f64, bool)>,
    strong: Vec<(f64, bool)>,
}

/// Empirical survival of the weak radius `ρ_{(r,r)}` (per `q`) and of the
/// strong-radius surrogate for `Q = {0}` in homogeneous Poisson processes.
/// Censored runs count as exceeding every `L`.
///
/// Cell `(λ_a, r_b)` uses `seed.derive(a).derive(b)`; rows for all `q`
/// share its replicates.
pub fn radius_tail_experiment(config: &TailConfig) -> Result<TailTable> {
    let TailConfig { d, kind, reps, window, .. } = *config;
    if d == 0 || reps == 0 {
        return domain("need d >= 1 and at least one replicate");
    }
    if config.l_grid.windows(2).any(|w| w[0] >= w[1]) || config.l_grid.iter().any(|l| !(*l >= 0.0)) {
        return domain("L grid must be ascending and nonnegative");
    }
    if let Some(&q) = config.qs.iter().find(|&&q| q >= d) {
        return domain(format!("q = {q} must be below d = {d}"));
    }
    if config.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) || config.rs.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return domain("intensities and radii must be finite and nonnegative");
    }
    let max_l = config.l_grid.last().copied().unwrap_or(0.0);
    let max_r = config.rs.iter().copied().fold(0.0, f64::max);
    let needed = max_l + 2.0 * kind.diameter_bound(max_r);
    if !(window >= needed) {
        return domain(format!("window {window} is below max L + 2μ(max r) = {needed}"));
    }
    let origin = vec![0.0; d];
    let ball = Window::ball(origin.clone(), window);
    let added = PointCloud::from_points(std::slice::from_ref(&origin), ball.clone())?;
    let setup = RadiusSetup::new(kind, window);
    let root = RngSeed::new(config.seed);

    let mut rows = Vec::new();
    for (a, &lambda) in config.lambdas.iter().enumerate() {
        for (b, &r) in config.rs.iter().enumerate() {
            let samples = replicate(reps, root.derive(a as u64).derive(b as u64), |_, seed| {
                let base = sample_poisson_homogeneous(lambda, &ball, seed)?;
                let w = weak_radius(&base, &added, &origin, r, r, &setup)?;
                let weak = config.qs.iter().map(|&q| (w.per_q[q].value, w.per_q[q].censored)).collect();
                let strong = config
                    .qs
                    .iter()
                    .map(|&q| strong_radius_estimate(&base, &added, &origin, r, q, &setup).map(|e| (e.value, e.censored)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TailSample { weak, strong })
            })?;
            for (radius, pick) in [(RadiusKind::Weak, 0usize), (RadiusKind::Strong, 1)] {
                for (k, &q) in config.qs.iter().enumerate() {
                    let values: Vec<(f64, bool)> =
                        samples.iter().map(|s| if pick == 0 { s.weak[k] } else { s.strong[k] }).collect();
                    let survival = config
                        .l_grid
                        .iter()
                        .map(|&l| wilson(values.iter().filter(|(v, c)| *c || *v > l).count(), reps))
                        .collect();
                    let censored = values.iter().filter(|(_, c)| *c).count();
                    rows.push(TailRow { radius, lambda, r, q, survival, censored });
                }
            }
        }
    }
    Ok(TailTable { l_grid: config.l_grid.clone(), reps, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_process_has_no_weak_tail() {
        let cfg = TailConfig {
            d: 2,
            kind: FiltrationKind::Rips,
            lambdas: vec![0.0, 1.0],
            rs: vec![0.5],
            qs: vec![0, 1],
            l_grid: vec![0.0, 0.5, 1.0, 2.0, 3.0],
            reps: 40,
            window: 5.0,
            seed: 8,
        };
        let table = radius_tail_experiment(&cfg).unwrap();
        for row in &table.rows {
            assert!(row.survival.windows(2).all(|w| w[0].estimate >= w[1].estimate));
            if row.lambda == 0.0 && row.radius == RadiusKind::Weak {
                assert!(row.survival.iter().all(|w| w.estimate == 0.0));
            }
        }
        assert_eq!(table.rows.len(), 2 * 2 * 2);
    }

    #[test]
    fn window_must_cover_grid() {
        let cfg = TailConfig {
            d: 2,
            kind: FiltrationKind::Cech,
            lambdas: vec![1.0],
            rs: vec![0.5],
            qs: vec![0],
            l_grid: vec![1.0, 3.0],
            reps: 5,
            window: 4.9,
            seed: 8,
        };
        assert!(radius_tail_experiment(&cfg).is_err());
    }
}
