use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::harness::replicate;
use super::stats::{covariance, jackknife_covariance_se, normality_score, symmetric_eigenvalues, NormalityScores};
use crate::error::{Error, Result};
use crate::filtration::{build_with, FiltrationKind, TieBreak};
use crate::persistence::{reduce_with, RankQuery, ReduceOptions};
use crate::point_process::{sample_binomial, sample_poisson_inhomogeneous, Density, DensitySpec, PointCloud};
use crate::rng::RngSeed;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Poisson,
    Binomial,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProcessKind::Poisson => "poisson",
            ProcessKind::Binomial => "binomial",
        }
    }
}

fn default_projections() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltConfig {
    pub process: ProcessKind,
    pub density: DensitySpec,
    pub kind: FiltrationKind,
    pub q: usize,
    /// `(r_i, s_i)` with `r_i <= s_i`.
    pub pairs: Vec<(f64, f64)>,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub r_max: f64,
    pub q_max: usize,
    /// Number of random unit directions scored in addition to the coordinates.
    #[serde(default = "default_projections")]
    pub projections: usize,
}

pub const MIN_CLT_REPLICATES: usize = 50;

impl CltConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.pairs.is_empty() {
            return bad("pairs: at least one (r, s) pair is required".into());
        }
        for (i, &(r, s)) in self.pairs.iter().enumerate() {
            if !(r >= 0.0 && r <= s && s.is_finite()) {
                return bad(format!("pairs[{i}]: need 0 <= r <= s < inf, got ({r}, {s})"));
            }
            if s > self.r_max {
                return bad(format!("pairs[{i}]: s = {s} exceeds r_max = {}", self.r_max));
            }
        }
        if self.q >= self.q_max {
            return bad(format!("q = {} must be below q_max = {}", self.q, self.q_max));
        }
        if self.replicates < MIN_CLT_REPLICATES {
            return bad(format!("replicates = {} is below {MIN_CLT_REPLICATES}", self.replicates));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly ascending positive integers".into());
        }
        Density::from_spec(&self.density).map_err(|e| Error::Config(format!("density: {e}")))?;
        Ok(())
    }

    pub fn queries(&self) -> Vec<RankQuery> {
        self.pairs.iter().map(|&(r, s)| RankQuery::new(self.q, r, s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    /// `coord_<i>` or `proj_<k>`.
    pub target: String,
    pub scores: Option<NormalityScores>,
    /// Set when the scores could not be computed (e.g. constant samples).
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltBlock {
    pub n: usize,
    /// `raw[k][i] = β^{r_i,s_i}_q` of replicate `k`.
    pub raw: Vec<Vec<u64>>,
    /// `n^{-1/2}(raw − column mean)`.
    pub standardized: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Jackknife standard errors of the covariance entries.
    pub covariance_se: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub scores: Vec<ScoreRow>,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltResult {
    pub config: CltConfig,
    pub blocks: Vec<CltBlock>,
}

impl CltResult {
    pub fn block(&self, n: usize) -> Option<&CltBlock> {
        self.blocks.iter().find(|b| b.n == n)
    }
}

/// Draws `S_n` (Poisson of intensity `nκ` or `n` i.i.d. points from `κ`) and
/// rescales it to `[0, n^{1/d}]^d`.
pub fn sample_scaled(process: ProcessKind, density: &Density, n: usize, seed: RngSeed) -> Result<PointCloud> {
    let cloud = match process {
        ProcessKind::Poisson => sample_poisson_inhomogeneous(density, n as f64, seed)?,
        ProcessKind::Binomial => sample_binomial(n, density, seed)?,
    };
    Ok(cloud.scaled((n as f64).powf(1.0 / density.dim() as f64)))
}

/// Persistent Betti numbers of one cloud for several queries from a single reduction.
pub fn betti_vector(cloud: &PointCloud, kind: FiltrationKind, r_max: f64, q_max: usize, queries: &[RankQuery]) -> Result<Vec<u64>> {
    if cloud.is_empty() {
        return Ok(vec![0; queries.len()]);
    }
    let complex = build_with(kind, cloud, r_max, q_max, TieBreak::Lexicographic)?;
    let diagram = reduce_with(&complex, ReduceOptions { clearing: true }).diagram;
    queries.iter().map(|&query| diagram.persistent_betti(query).map(|b| b as u64)).collect()
}

fn score(target: String, xs: &[f64]) -> ScoreRow {
    match normality_score(xs) {
        Ok(s) => ScoreRow { target, scores: Some(s), note: None },
        Err(e) => ScoreRow { target, scores: None, note: Some(e.to_string()) },
    }
}

fn projection_directions(l: usize, count: usize, seed: RngSeed) -> Vec<Vec<f64>> {
    let mut rng = seed.rng();
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..l).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

fn summarize(n: usize, raw: Vec<Vec<u64>>, directions: &[Vec<f64>], started: Instant) -> CltBlock {
    let reps = raw.len();
    let l = raw[0].len();
    let mean: Vec<f64> = (0..l).map(|i| raw.iter().map(|row| row[i] as f64).sum::<f64>() / reps as f64).collect();
    let scale = (n as f64).sqrt();
    let standardized: Vec<Vec<f64>> =
        raw.iter().map(|row| row.iter().zip(&mean).map(|(&b, m)| (b as f64 - m) / scale).collect()).collect();
    let covariance = covariance(&standardized);
    let columns: Vec<Vec<f64>> = (0..l).map(|i| standardized.iter().map(|row| row[i]).collect()).collect();
    let covariance_se =
        (0..l).map(|i| (0..l).map(|j| jackknife_covariance_se(&columns[i], &columns[j])).collect()).collect();
    let min_eigenvalue = symmetric_eigenvalues(&covariance)[0];

    let mut scores: Vec<ScoreRow> = columns.iter().enumerate().map(|(i, c)| score(format!("coord_{i}"), c)).collect();
    for (k, u) in directions.iter().enumerate() {
        let projected: Vec<f64> = standardized.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect();
        scores.push(score(format!("proj_{k}"), &projected));
    }
    CltBlock {
        n,
        raw,
        standardized,
        mean,
        covariance,
        covariance_se,
        min_eigenvalue,
        scores,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    }
}

/// Replicate study of `n^{-1/2}(β^{r_i,s_i}_q(𝒦(n^{1/d}S_n)) − mean)` over the `n` grid.
///
/// Replicate `k` at grid size `n` uses `seed.derive(n).derive(k)`.
pub fn run_clt(config: &CltConfig) -> Result<CltResult> {
    config.validate()?;
    let density = Density::from_spec(&config.density)?;
    let queries = config.queries();
    let root = RngSeed::new(config.seed);
    let l = queries.len();
    let directions = if l > 1 { projection_directions(l, config.projections, root.derive(u64::MAX)) } else { Vec::new() };
    let mut blocks = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let started = Instant::now();
        let raw = replicate(config.replicates, root.derive(n as u64), |_, seed| {
            let cloud = sample_scaled(config.process, &density, n, seed)?;
            betti_vector(&cloud, config.kind, config.r_max, config.q_max, &queries)
        })?;
        blocks.push(summarize(n, raw, &directions, started));
    }
    Ok(CltResult { config: config.clone(), blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degenerate(process: ProcessKind) -> CltConfig {
        CltConfig {
            process,
            density: DensitySpec::Uniform { d: 2 },
            kind: FiltrationKind::Rips,
            q: 0,
            pairs: vec![(0.0, 0.0)],
            n_grid: vec![200],
            replicates: 60,
            seed: 4,
            r_max: 0.5,
            q_max: 2,
            projections: 4,
        }
    }

    #[test]
    fn degenerate_pair_counts_points() {
        let res = run_clt(&degenerate(ProcessKind::Binomial)).unwrap();
        let b = &res.blocks[0];
        assert!(b.raw.iter().all(|row| row[0] == 200));
        assert_eq!(b.covariance[0][0], 0.0);
        assert!(b.scores[0].scores.is_none());
        let cfg = degenerate(ProcessKind::Poisson);
        let res = run_clt(&cfg).unwrap();
        let density = Density::from_spec(&cfg.density).unwrap();
        for (k, row) in res.blocks[0].raw.iter().enumerate() {
            let seed = RngSeed::new(4).derive(200).derive(k as u64);
            assert_eq!(row[0] as usize, sample_scaled(ProcessKind::Poisson, &density, 200, seed).unwrap().len());
        }
    }

    #[test]
    fn caps_are_checked_before_sampling() {
        let mut cfg = degenerate(ProcessKind::Poisson);
        cfg.pairs = vec![(0.2, 0.9)];
        assert!(matches!(run_clt(&cfg), Err(Error::Config(_))));
        let mut cfg = degenerate(ProcessKind::Poisson);
        cfg.replicates = 49;
        assert!(matches!(run_clt(&cfg), Err(Error::Config(_))));
        let mut cfg = degenerate(ProcessKind::Poisson);
        cfg.pairs = vec![(0.3, 0.2)];
        assert!(matches!(run_clt(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let mut cfg = degenerate(ProcessKind::Poisson);
        cfg.q = 1;
        cfg.pairs = vec![(0.3, 0.4), (0.4, 0.5), (0.2, 0.5)];
        cfg.n_grid = vec![100];
        let res = run_clt(&cfg).unwrap();
        let b = &res.blocks[0];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.covariance[i][j], b.covariance[j][i]);
            }
        }
        assert!(b.min_eigenvalue >= -1e-8);
        assert_eq!(b.scores.len(), 3 + 4);
    }
}
