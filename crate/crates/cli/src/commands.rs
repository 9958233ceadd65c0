use std::path::PathBuf;

use pslab_core::experiments::{
    depoissonization_check, estimate_alpha, radius_tail_experiment, run_clt, variance_relation_check, with_threads,
    AlphaEstimate, CltConfig, DepoConfig, ProcessKind, TailConfig,
};
use pslab_core::filtration::{build_with, FiltrationKind, TieBreak};
use pslab_core::io;
use pslab_core::persistence::{reduce_with, RankQuery, ReduceOptions};
use pslab_core::point_process::{
    sample_binomial, sample_poisson_homogeneous, sample_poisson_inhomogeneous, Density, DensitySpec, PointCloud, Window,
};
use pslab_core::stabilization::{strong_radius_estimate, weak_radius, RadiusEstimate, RadiusSetup};
use pslab_core::RngSeed;
use serde::{Deserialize, Serialize};

use crate::config::{load, parse_value, CliError, CliResult, CloudInput};
use crate::manifest::{output_dir, Run, RunManifest};
use crate::{plots, ReportArgs, RunArgs};

fn start(name: &str, args: &RunArgs) -> CliResult<Run> {
    Run::start(name, output_dir(args.out.as_deref(), name), args.threads)
}

fn pooled<T: Send>(args: &RunArgs, f: impl FnOnce() -> pslab_core::Result<T> + Send) -> CliResult<T> {
    Ok(with_threads(args.threads, f).map_err(|e| CliError::Config(e.to_string()))??)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case", deny_unknown_fields)]
enum SampleConfig {
    /// Poisson process of intensity `n κ` on the unit cube.
    Poisson { density: DensitySpec, n: f64, seed: u64 },
    /// `n` i.i.d. points with density `κ`.
    Binomial { density: DensitySpec, n: usize, seed: u64 },
    /// Homogeneous Poisson process of intensity `lambda` on `window`.
    Homogeneous { lambda: f64, window: Window, seed: u64 },
}

pub fn sample(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<SampleConfig>(&args.config, args.seed)?;
    let mut run = start("sample", args)?;
    let (cloud, seed, density) = match &cfg.value {
        SampleConfig::Poisson { density, n, seed } => {
            let k = Density::from_spec(density)?;
            (sample_poisson_inhomogeneous(&k, *n, RngSeed::new(*seed))?, *seed, Some(density.clone()))
        }
        SampleConfig::Binomial { density, n, seed } => {
            let k = Density::from_spec(density)?;
            (sample_binomial(*n, &k, RngSeed::new(*seed))?, *seed, Some(density.clone()))
        }
        SampleConfig::Homogeneous { lambda, window, seed } => {
            (sample_poisson_homogeneous(*lambda, window, RngSeed::new(*seed))?, *seed, None)
        }
    };
    run.write("cloud.csv", |w| io::write_cloud_csv(w, &cloud))?;
    let envelope = io::CloudEnvelope::new(&cloud, Some(RngSeed::new(seed)), density);
    run.write("cloud.json", |w| Ok(serde_json::to_writer_pretty(w, &envelope)?))?;
    run.finish(cfg.echo, Some(seed))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexConfig {
    cloud: CloudInput,
    kind: FiltrationKind,
    r_max: f64,
    q_max: usize,
    /// Seed of a random tie-break among simultaneous simplices.
    #[serde(default)]
    tie_seed: Option<u64>,
}

pub fn complex(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<ComplexConfig>(&args.config, args.seed)?;
    let c = &cfg.value;
    let cloud = c.cloud.load(&cfg.base_dir)?;
    let tie = c.tie_seed.map_or(TieBreak::Lexicographic, TieBreak::Seeded);
    let complex = build_with(c.kind, &cloud, c.r_max, c.q_max, tie)?;
    let mut run = start("complex", args)?;
    run.write("complex.txt", |w| io::write_complex_text(w, &complex))?;
    run.finish(cfg.echo, c.tie_seed)?;
    Ok(())
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PersistConfig {
    cloud: CloudInput,
    kind: FiltrationKind,
    r_max: f64,
    q_max: usize,
    #[serde(default)]
    queries: Vec<RankQuery>,
    /// CSV `q,r,s` of further queries.
    #[serde(default)]
    queries_path: Option<PathBuf>,
    #[serde(default = "default_true")]
    clearing: bool,
}

pub fn persist(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<PersistConfig>(&args.config, args.seed)?;
    let c = &cfg.value;
    let cloud = c.cloud.load(&cfg.base_dir)?;
    let mut queries = c.queries.clone();
    if let Some(rel) = &c.queries_path {
        let path = cfg.base_dir.join(rel);
        let file = std::fs::File::open(&path).map_err(|e| CliError::Config(format!("queries_path {}: {e}", path.display())))?;
        queries.extend(io::read_queries_csv(file)?);
    }
    let complex = build_with(c.kind, &cloud, c.r_max, c.q_max, TieBreak::Lexicographic)?;
    let diagram = reduce_with(&complex, ReduceOptions { clearing: c.clearing }).diagram;
    let ranks = queries.iter().map(|&q| Ok((q, diagram.persistent_betti(q)?))).collect::<pslab_core::Result<Vec<_>>>()?;
    let mut run = start("persist", args)?;
    run.write("diagram.csv", |w| io::write_diagram_csv(w, diagram.pairs()))?;
    if !ranks.is_empty() {
        run.write("ranks.csv", |w| io::write_ranks_csv(w, &ranks))?;
    }
    run.finish(cfg.echo, None)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiusJob {
    cloud: CloudInput,
    /// Points of `Q`, added to the cloud.
    added: Vec<Vec<f64>>,
    center: Vec<f64>,
    r: f64,
    s: f64,
    kind: FiltrationKind,
    window_radius: f64,
    #[serde(default)]
    margin: Option<f64>,
    /// Dimensions for which the strong-radius surrogate at `r` is computed.
    #[serde(default)]
    strong_q: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiusConfig {
    jobs: Vec<RadiusJob>,
}

pub fn radius(args: &RunArgs) -> CliResult<()> {
    if args.seed.is_some() {
        return Err(CliError::Config("radius jobs are deterministic and take no seed".into()));
    }
    let cfg = load::<RadiusConfig>(&args.config, None)?;
    struct Outcome {
        weak: pslab_core::stabilization::WeakRadius,
        strong: Vec<(usize, RadiusEstimate)>,
    }
    let mut outcomes = Vec::new();
    for (k, job) in cfg.value.jobs.iter().enumerate() {
        let ctx = |e: pslab_core::Error| CliError::Config(format!("jobs[{k}]: {e}"));
        let base = job.cloud.load(&cfg.base_dir)?;
        let added = PointCloud::from_points_bbox(&job.added).map_err(ctx)?;
        let mut setup = RadiusSetup::new(job.kind, job.window_radius);
        setup.margin = job.margin;
        let weak = weak_radius(&base, &added, &job.center, job.r, job.s, &setup).map_err(ctx)?;
        let strong = job
            .strong_q
            .iter()
            .map(|&q| Ok((q, strong_radius_estimate(&base, &added, &job.center, job.r, q, &setup).map_err(ctx)?)))
            .collect::<CliResult<Vec<_>>>()?;
        outcomes.push(Outcome { weak, strong });
    }
    let mut run = start("radius", args)?;
    let jobs = &cfg.value.jobs;
    let rows: Vec<io::RadiusRow<'_>> = jobs
        .iter()
        .zip(&outcomes)
        .map(|(j, o)| io::RadiusRow { center: &j.center, r: j.r, s: j.s, estimate: &o.weak.overall })
        .collect();
    run.write("radii.csv", |w| io::write_radii_csv(w, &rows))?;
    let strong: Vec<(&[f64], usize, f64, &RadiusEstimate)> = jobs
        .iter()
        .zip(&outcomes)
        .flat_map(|(j, o)| o.strong.iter().map(move |(q, e)| (j.center.as_slice(), *q, j.r, e)))
        .collect();
    if !strong.is_empty() {
        run.write("strong.csv", |w| io::write_strong_csv(w, &strong))?;
    }
    for (k, o) in outcomes.iter().enumerate() {
        run.write(&format!("trace_{k}.csv"), |w| io::write_trace_csv(w, &o.weak.trace))?;
    }
    run.finish(cfg.echo, None)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DepoOptions {
    n: usize,
    reps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaConfig {
    r: f64,
    s: f64,
    q: usize,
    density: DensitySpec,
    kind: FiltrationKind,
    window_radius: f64,
    reps: usize,
    seed: u64,
    #[serde(default)]
    depoissonization: Option<DepoOptions>,
}

pub fn alpha(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<AlphaConfig>(&args.config, args.seed)?;
    let c = cfg.value.clone();
    let density = Density::from_spec(&c.density)?;
    let (estimate, depo) = pooled(args, || {
        let estimate = estimate_alpha(c.r, c.s, c.q, &density, c.window_radius, c.reps, RngSeed::new(c.seed), c.kind)?;
        let depo = match &c.depoissonization {
            Some(o) => Some(depoissonization_check(&DepoConfig {
                n: o.n,
                r: c.r,
                s: c.s,
                q: c.q,
                density: c.density.clone(),
                kind: c.kind,
                reps: o.reps,
                seed: c.seed,
                alpha_window: c.window_radius,
                alpha_reps: c.reps,
            })?),
            None => None,
        };
        Ok((estimate, depo))
    })?;
    let mut run = start("alpha", args)?;
    run.write("alpha.csv", |w| io::write_alpha_csv(w, std::slice::from_ref(&estimate)))?;
    if let Some(report) = &depo {
        run.write("depo.csv", |w| io::write_depo_csv(w, report))?;
    }
    run.finish(cfg.echo, Some(c.seed))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationOptions {
    alpha_window: f64,
    alpha_reps: usize,
}

fn default_projections() -> usize {
    4
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CltJob {
    process: ProcessKind,
    density: DensitySpec,
    kind: FiltrationKind,
    q: usize,
    pairs: Vec<(f64, f64)>,
    n_grid: Vec<usize>,
    replicates: usize,
    seed: u64,
    r_max: f64,
    q_max: usize,
    #[serde(default = "default_projections")]
    projections: usize,
    /// Also run the other process and α, and check the variance relation.
    #[serde(default)]
    relation: Option<RelationOptions>,
}

impl CltJob {
    fn config(&self, process: ProcessKind) -> CltConfig {
        CltConfig {
            process,
            density: self.density.clone(),
            kind: self.kind,
            q: self.q,
            pairs: self.pairs.clone(),
            n_grid: self.n_grid.clone(),
            replicates: self.replicates,
            seed: self.seed,
            r_max: self.r_max,
            q_max: self.q_max,
            projections: self.projections,
        }
    }
}

/// α estimate `i` of a relation check uses stream `(seed, 1).derive(i)`.
pub fn relation_alphas(job_seed: u64, config: &CltConfig, window: f64, reps: usize) -> pslab_core::Result<Vec<AlphaEstimate>> {
    let density = Density::from_spec(&config.density)?;
    let root = RngSeed::with_stream(job_seed, 1);
    config
        .pairs
        .iter()
        .enumerate()
        .map(|(i, &(r, s))| estimate_alpha(r, s, config.q, &density, window, reps, root.derive(i as u64), config.kind))
        .collect()
}

pub fn clt(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<CltJob>(&args.config, args.seed)?;
    let job = cfg.value.clone();
    let main = job.config(job.process);
    main.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let (results, relation) = pooled(args, || {
        let first = run_clt(&main)?;
        match &job.relation {
            None => Ok((vec![first], None)),
            Some(opts) => {
                let other = match job.process {
                    ProcessKind::Poisson => ProcessKind::Binomial,
                    ProcessKind::Binomial => ProcessKind::Poisson,
                };
                let second = run_clt(&job.config(other))?;
                let alphas = relation_alphas(job.seed, &main, opts.alpha_window, opts.alpha_reps)?;
                let (poi, bin) = if job.process == ProcessKind::Poisson { (&first, &second) } else { (&second, &first) };
                let report = variance_relation_check(poi, bin, &alphas)?;
                let ordered = if job.process == ProcessKind::Poisson { vec![first, second] } else { vec![second, first] };
                Ok((ordered, Some((alphas, report))))
            }
        }
    })?;
    let refs: Vec<_> = results.iter().collect();
    let mut run = start("clt", args)?;
    run.write("replicates.csv", |w| io::write_replicates_csv(w, &refs))?;
    run.write("covariance.csv", |w| io::write_covariance_csv(w, &refs))?;
    run.write("scores.csv", |w| io::write_scores_csv(w, &refs))?;
    run.write("expectation.csv", |w| io::write_expectation_csv(w, &refs))?;
    if let Some((alphas, report)) = &relation {
        run.write("alpha.csv", |w| io::write_alpha_csv(w, alphas))?;
        run.write("relation.csv", |w| io::write_relation_csv(w, report))?;
    }
    let timings: Vec<serde_json::Value> = results
        .iter()
        .flat_map(|r| {
            r.blocks.iter().map(move |b| serde_json::json!({"process": r.config.process.as_str(), "n": b.n, "secs": b.wall_clock_secs}))
        })
        .collect();
    run.finish_with(cfg.echo, Some(job.seed), Some(serde_json::Value::Array(timings)))?;
    Ok(())
}

pub fn tails(args: &RunArgs) -> CliResult<()> {
    let cfg = load::<TailConfig>(&args.config, args.seed)?;
    let c = cfg.value.clone();
    let table = pooled(args, || radius_tail_experiment(&c))?;
    let mut run = start("tails", args)?;
    run.write("tails.csv", |w| io::write_tails_csv(w, &table))?;
    run.finish(cfg.echo, Some(c.seed))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    #[serde(default)]
    query: Option<RankQuery>,
}

pub fn report(args: &ReportArgs) -> CliResult<()> {
    let dir = args
        .dir
        .clone()
        .or_else(|| args.out.clone())
        .or_else(|| std::env::var_os("PSLAB_OUT").map(PathBuf::from))
        .ok_or_else(|| CliError::MissingInput("no result directory given".into()))?;
    let manifest = RunManifest::read(&dir)?;
    let override_query = match &args.config {
        Some(path) => load::<ReportConfig>(path, None)?.value.query,
        None => None,
    };
    let query = override_query.or_else(|| {
        manifest.config.get("queries").and_then(|q| parse_value::<Vec<RankQuery>>(q).ok()).and_then(|q| q.first().copied())
    });
    let written = plots::emit_all(&dir, query)?;
    if written.is_empty() {
        return Err(CliError::MissingInput(format!("{} holds no plottable CSV files", dir.display())));
    }
    Ok(())
}
