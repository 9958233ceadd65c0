use serde::{Deserialize, Serialize};

use super::alpha::{estimate_alpha, AlphaEstimate};
use super::clt::{betti_vector, sample_scaled, CltResult, ProcessKind};
use super::harness::replicate;
use super::stats::mean_se;
use crate::error::{domain, Result};
use crate::filtration::FiltrationKind;
use crate::persistence::RankQuery;
use crate::point_process::{draw_from_density, Density, DensitySpec, PointCloud};
use crate::rng::RngSeed;
use crate::stabilization::add_one_cost;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationEntry {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub binomial: f64,
    pub poisson: f64,
    pub alpha_product: f64,
    /// `Σ̂_bin − (Σ̂_poi − α̂_i α̂_j)`.
    pub difference: f64,
    pub pooled_se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub entries: Vec<RelationEntry>,
    pub pass_fraction: f64,
    pub all_pass: bool,
}

/// Entrywise check of `Σ̂_bin ≈ Σ̂_poi − α̂ α̂ᵀ` at 3 pooled standard errors,
/// for every `n` present in both results.
pub fn variance_relation_check(poisson: &CltResult, binomial: &CltResult, alphas: &[AlphaEstimate]) -> Result<RelationReport> {
    let (a, b) = (&poisson.config, &binomial.config);
    if a.pairs != b.pairs {
        return domain("pair lists of the two results differ");
    }
    if a.q != b.q || a.kind != b.kind || a.density != b.density {
        return domain("results differ in q, filtration or density");
    }
    if alphas.len() != a.pairs.len() {
        return domain(format!("expected {} alpha estimates, got {}", a.pairs.len(), alphas.len()));
    }
    for (k, (al, &(r, s))) in alphas.iter().zip(&a.pairs).enumerate() {
        if al.r != r || al.s != s || al.q != a.q {
            return domain(format!("alpha estimate {k} is for (q={}, r={}, s={}), expected (q={}, r={r}, s={s})", al.q, al.r, al.s, a.q));
        }
    }
    let l = a.pairs.len();
    let mut entries = Vec::new();
    for pb in &poisson.blocks {
        let Some(bb) = binomial.block(pb.n) else { continue };
        for i in 0..l {
            for j in i..l {
                let (ai, aj) = (&alphas[i], &alphas[j]);
                let alpha_product = ai.value * aj.value;
                let alpha_se = ((aj.value * ai.se).powi(2) + (ai.value * aj.se).powi(2)).sqrt();
                let alpha_se = if i == j { 2.0 * ai.value.abs() * ai.se } else { alpha_se };
                let difference = bb.covariance[i][j] - (pb.covariance[i][j] - alpha_product);
                let pooled_se = (bb.covariance_se[i][j].powi(2) + pb.covariance_se[i][j].powi(2) + alpha_se.powi(2)).sqrt();
                entries.push(RelationEntry {
                    n: pb.n,
                    i,
                    j,
                    binomial: bb.covariance[i][j],
                    poisson: pb.covariance[i][j],
                    alpha_product,
                    difference,
                    pooled_se,
                    pass: difference.abs() <= 3.0 * pooled_se,
                });
            }
        }
    }
    if entries.is_empty() {
        return domain("the two results share no n");
    }
    let passed = entries.iter().filter(|e| e.pass).count();
    Ok(RelationReport { pass_fraction: passed as f64 / entries.len() as f64, all_pass: passed == entries.len(), entries })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationConfig {
    pub process: ProcessKind,
    pub density: DensitySpec,
    pub kind: FiltrationKind,
    pub q: usize,
    pub pair: (f64, f64),
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub n: usize,
    /// `n^{-1}` times the mean of `β^{r,s}_q`.
    pub value: f64,
    pub se: f64,
    /// Change from the previous grid entry.
    pub delta: Option<f64>,
}

/// `n^{-1} E[β^{r,s}_q(𝒦(n^{1/d}S_n))]` along an ascending `n` grid.
pub fn expectation_convergence(config: &ExpectationConfig) -> Result<Vec<ExpectationRow>> {
    if config.n_grid.is_empty() || config.n_grid[0] == 0 || config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("n grid must be strictly ascending positive integers");
    }
    let (r, s) = config.pair;
    if !(r >= 0.0 && r <= s && s.is_finite()) {
        return domain(format!("need 0 <= r <= s < inf, got ({r}, {s})"));
    }
    let density = Density::from_spec(&config.density)?;
    let query = [RankQuery::new(config.q, r, s)];
    let root = RngSeed::new(config.seed);
    let mut rows: Vec<ExpectationRow> = Vec::new();
    for &n in &config.n_grid {
        let values = replicate(config.reps, root.derive(n as u64), |_, seed| {
            let cloud = sample_scaled(config.process, &density, n, seed)?;
            Ok(betti_vector(&cloud, config.kind, s, config.q + 1, &query)?[0] as f64 / n as f64)
        })?;
        let (value, se) = mean_se(&values);
        let se = if se.is_nan() { 0.0 } else { se };
        let delta = rows.last().map(|prev| value - prev.value);
        rows.push(ExpectationRow { n, value, se, delta });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepoConfig {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub q: usize,
    pub density: DensitySpec,
    pub kind: FiltrationKind,
    pub reps: usize,
    pub seed: u64,
    /// Truncation radius and replicate count of the reference α estimate.
    pub alpha_window: f64,
    pub alpha_reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepoReport {
    /// Mean of `β(n + 1 points) − β(n points)`.
    pub mean: f64,
    pub se: f64,
    pub alpha: AlphaEstimate,
    pub difference: f64,
    pub pooled_se: f64,
    pub pass: bool,
}

/// Paired estimate of `E[R_{n,n}]`: the same `n` i.i.d. points with and
/// without one extra point drawn from `κ`, compared to `α̂` at 3 pooled SE.
///
/// Replicate `k` uses `seed.derive(0).derive(k)`; the α estimate uses `seed.derive(1)`.
pub fn depoissonization_check(config: &DepoConfig) -> Result<DepoReport> {
    let DepoConfig { n, r, s, q, kind, reps, .. } = *config;
    if n == 0 || reps < 2 {
        return domain("need n >= 1 and at least two replicates");
    }
    let density = Density::from_spec(&config.density)?;
    let root = RngSeed::new(config.seed);
    let query = RankQuery::new(q, r, s);
    let scale = (n as f64).powf(1.0 / density.dim() as f64);
    let costs = replicate(reps, root.derive(0), |_, seed| {
        let base = sample_scaled(ProcessKind::Binomial, &density, n, seed.derive(0))?;
        let mut x = Vec::new();
        draw_from_density(&mut seed.derive(1).rng(), &density, &mut x)?;
        let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let extra = PointCloud::from_points(&[x], base.window().clone())?;
        Ok(add_one_cost(&base, &extra, query, kind)? as f64)
    })?;
    let (mean, se) = mean_se(&costs);
    let alpha = estimate_alpha(r, s, q, &density, config.alpha_window, config.alpha_reps, root.derive(1), kind)?;
    let difference = mean - alpha.value;
    let pooled_se = (se * se + alpha.se * alpha.se).sqrt();
    Ok(DepoReport { mean, se, alpha, difference, pooled_se, pass: difference.abs() <= 3.0 * pooled_se })
}
