//! Desk-scale acceptance criteria. Each check returns an [`Outcome`];
//! the experiment-backed checks also return the CSV bytes they produced so
//! that determinism across thread counts can be compared byte for byte.

use std::time::{Duration, Instant};

use pslab_core::experiments::{
    depoissonization_check, estimate_alpha, radius_tail_experiment, replicate, run_clt, variance_relation_check,
    with_threads, CltConfig, CltResult, DepoConfig, ProcessKind, RadiusKind, TailConfig, AD_CRITICAL_1PCT,
    MAX_CENSORED_FRACTION,
};
use pslab_core::filtration::{build, count_new_simplices, FiltrationKind};
use pslab_core::io;
use pslab_core::persistence::{connected_component_count, persistent_betti_direct, reduce, RankQuery};
use pslab_core::point_process::{sample_poisson_homogeneous, Density, DensitySpec, PointCloud, Window};
use pslab_core::stabilization::{persistent_betti_of, strong_radius_estimate, weak_radius, RadiusSetup};
use pslab_core::{Result, RngSeed};
use rand::Rng;

const KINDS: [FiltrationKind; 2] = [FiltrationKind::Rips, FiltrationKind::Cech];

#[derive(Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs `check`, folds errors into a failed outcome and enforces the time budget.
fn timed<T: Default>(
    id: u8,
    title: &'static str,
    budget: Duration,
    check: impl FnOnce() -> Result<(bool, String, T)>,
) -> (Outcome, T) {
    let start = Instant::now();
    let (mut pass, mut detail, extra) = match check() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}"), T::default()),
    };
    let elapsed = start.elapsed();
    if elapsed > budget {
        pass = false;
        detail.push_str(&format!("; exceeded budget of {}s", budget.as_secs()));
    }
    (Outcome { id, title, pass, detail, elapsed }, extra)
}

fn random_cloud(seed: RngSeed, n: usize, side: f64) -> Result<PointCloud> {
    let mut rng = seed.rng();
    let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();
    PointCloud::from_points(&pts, Window::cube(2, 0.0, side))
}

pub fn oracle_equivalence() -> Outcome {
    timed(1, "oracle equivalence", Duration::from_secs(120), || {
        let root = RngSeed::new(101);
        let mut queries = 0usize;
        let mut mismatches = 0usize;
        for i in 0..200u64 {
            let seed = root.derive(i);
            let n = 1 + seed.rng().random_range(0..8usize);
            let cloud = random_cloud(seed.derive(1), n, 1.0)?;
            for kind in KINDS {
                let complex = build(kind, &cloud, 1.5, 2)?;
                let diagram = reduce(&complex);
                let times = complex.event_times();
                for (a, &r) in times.iter().enumerate() {
                    for &s in &times[a..] {
                        for q in 0..2 {
                            let query = RankQuery::new(q, r, s);
                            queries += 1;
                            if diagram.persistent_betti(query)? != persistent_betti_direct(&complex, query)? {
                                mismatches += 1;
                            }
                        }
                    }
                }
            }
        }
        Ok((mismatches == 0, format!("{mismatches} mismatches over {queries} queries on 200 clouds"), ()))
    })
    .0
}

pub fn union_find_closure() -> Outcome {
    timed(2, "rank/union-find closure", Duration::from_secs(120), || {
        let root = RngSeed::new(202);
        let mut checks = 0usize;
        let mut mismatches = 0usize;
        for i in 0..500u64 {
            let seed = root.derive(i);
            let n = 1 + seed.rng().random_range(0..30usize);
            let cloud = random_cloud(seed.derive(1), n, 3.0)?;
            let kind = KINDS[(i % 2) as usize];
            let complex = build(kind, &cloud, 1.0, 1)?;
            let diagram = reduce(&complex);
            for t in complex.event_times() {
                checks += 1;
                if diagram.persistent_betti(RankQuery::new(0, t, t))? != connected_component_count(&cloud, t, kind).count {
                    mismatches += 1;
                }
            }
        }
        Ok((mismatches == 0, format!("{mismatches} mismatches over {checks} event times on 500 clouds"), ()))
    })
    .0
}

pub fn geometric_lemma() -> Outcome {
    timed(3, "geometric lemma", Duration::from_secs(120), || {
        let root = RngSeed::new(303);
        let mut violations = 0usize;
        let mut tight = 0usize;
        for i in 0..500u64 {
            let seed = root.derive(i);
            let mut rng = seed.rng();
            let n = 2 + rng.random_range(0..11usize);
            let y = random_cloud(seed.derive(1), n, 1.0)?;
            let kept: Vec<Vec<f64>> = y.to_vecs().into_iter().filter(|_| rng.random_bool(0.6)).collect();
            let x = PointCloud::from_points(&kept, y.window().clone())?;
            let kind = KINDS[(i % 2) as usize];
            let q = rng.random_range(0..2usize);
            let r = rng.random::<f64>() * 0.5;
            let s = r + rng.random::<f64>() * 0.4;
            let query = RankQuery::new(q, r, s);
            let diff = persistent_betti_of(&y, query, kind)? as i64 - persistent_betti_of(&x, query, kind)? as i64;
            let mut bound = 0;
            for j in q..=q + 1 {
                bound += count_new_simplices(&x, &y, s, j, kind)?;
            }
            if diff.unsigned_abs() as usize > bound {
                violations += 1;
            }
            if diff.unsigned_abs() as usize == bound && bound > 0 {
                tight += 1;
            }
        }
        Ok((violations == 0, format!("{violations} violations on 500 nested pairs ({tight} tight)"), ()))
    })
    .0
}

pub fn stabilization_domination() -> Outcome {
    timed(4, "weak/strong stabilization domination", Duration::from_secs(600), || {
        let window = 8.0;
        let origin = vec![0.0, 0.0];
        let ball = Window::ball(origin.clone(), window);
        let added = PointCloud::from_points(std::slice::from_ref(&origin), ball.clone())?;
        let cases = [(FiltrationKind::Rips, 0.5, 0.8), (FiltrationKind::Rips, 0.3, 0.6), (FiltrationKind::Cech, 0.25, 0.4)];
        let per_rep = replicate(200, RngSeed::new(404), |_, seed| {
            let base = sample_poisson_homogeneous(1.0, &ball, seed)?;
            let mut out = Vec::new();
            for &(kind, r, s) in &cases {
                let setup = RadiusSetup::new(kind, window);
                let weak = weak_radius(&base, &added, &origin, r, s, &setup)?;
                let mut censored = weak.overall.censored;
                let mut bound = 0.0f64;
                for q in 0..2 {
                    for t in [r, s] {
                        let e = strong_radius_estimate(&base, &added, &origin, t, q, &setup)?;
                        censored |= e.censored;
                        bound = bound.max(e.value);
                    }
                }
                out.push((censored, weak.overall.value <= bound));
            }
            Ok(out)
        })?;
        let total = per_rep.len() * cases.len();
        let censored = per_rep.iter().flatten().filter(|x| x.0).count();
        let violations = per_rep.iter().flatten().filter(|x| !x.0 && !x.1).count();
        let fraction = censored as f64 / total as f64;
        let pass = violations == 0 && fraction < MAX_CENSORED_FRACTION;
        Ok((pass, format!("{violations} violations in {total} instances, censored fraction {fraction:.3}"), ()))
    })
    .0
}

fn clt_config(process: ProcessKind, q: usize, pair: (f64, f64), n_grid: Vec<usize>, replicates: usize, seed: u64) -> CltConfig {
    CltConfig {
        process,
        density: DensitySpec::Uniform { d: 2 },
        kind: FiltrationKind::Rips,
        q,
        pairs: vec![pair],
        n_grid,
        replicates,
        seed,
        r_max: pair.1.max(0.5),
        q_max: q + 1,
        projections: 4,
    }
}

fn clt_csv(results: &[&CltResult]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    io::write_replicates_csv(&mut out, results)?;
    io::write_covariance_csv(&mut out, results)?;
    io::write_scores_csv(&mut out, results)?;
    io::write_expectation_csv(&mut out, results)?;
    Ok(out)
}

pub fn degenerate_chain() -> (Outcome, Vec<u8>) {
    timed(5, "degenerate-pair analytic chain", Duration::from_secs(300), || {
        let poisson = run_clt(&clt_config(ProcessKind::Poisson, 0, (0.0, 0.0), vec![500], 500, 505))?;
        let binomial = run_clt(&clt_config(ProcessKind::Binomial, 0, (0.0, 0.0), vec![500], 500, 506))?;
        let alpha = estimate_alpha(0.0, 0.0, 0, &Density::uniform(2), 1.0, 500, RngSeed::new(507), FiltrationKind::Rips)?;
        let report = variance_relation_check(&poisson, &binomial, std::slice::from_ref(&alpha))?;
        let poi_var = poisson.blocks[0].covariance[0][0];
        let bin_var = binomial.blocks[0].covariance[0][0];
        let pass = (0.85..=1.15).contains(&poi_var) && bin_var == 0.0 && alpha.value == 1.0 && report.all_pass;
        let detail = format!(
            "poisson variance {poi_var:.4}, binomial variance {bin_var}, alpha {}, relation difference {:.4} (3 SE {:.4})",
            alpha.value,
            report.entries[0].difference,
            3.0 * report.entries[0].pooled_se
        );
        let mut csv = clt_csv(&[&poisson, &binomial])?;
        io::write_alpha_csv(&mut csv, std::slice::from_ref(&alpha))?;
        io::write_relation_csv(&mut csv, &report)?;
        Ok((pass, detail, csv))
    })
}

pub fn clt_desk_scale() -> (Outcome, Vec<u8>) {
    timed(6, "CLT at desk scale", Duration::from_secs(1800), || {
        let res = run_clt(&clt_config(ProcessKind::Poisson, 1, (0.5, 0.7), vec![250, 500, 1000], 500, 606))?;
        let csv = clt_csv(&[&res])?;
        let b500 = res.block(500).expect("grid contains 500");
        let b1000 = res.block(1000).expect("grid contains 1000");
        let v500 = b500.covariance[0][0];
        let v1000 = b1000.covariance[0][0];
        let nonzero = b1000.raw.iter().filter(|row| row[0] != 0).count();
        let ratio = (v500 - v1000).abs() / v1000;
        let Some(scores) = b1000.scores[0].scores else {
            let why = b1000.scores[0].note.clone().unwrap_or_default();
            let detail = format!(
                "no normality scores at n=1000 ({why}); {nonzero}/500 replicates nonzero, n^-1 variance {v500} (n=500) vs {v1000} (n=1000)"
            );
            return Ok((false, detail, csv));
        };
        let pass = scores.ad_adjusted < AD_CRITICAL_1PCT
            && scores.skewness.abs() <= 0.25
            && scores.excess_kurtosis.abs() <= 0.5
            && ratio < 0.15;
        let detail = format!(
            "AD* {:.3}, skewness {:.3}, excess kurtosis {:.3}, n^-1 variance change {:.1}%",
            scores.ad_adjusted,
            scores.skewness,
            scores.excess_kurtosis,
            100.0 * ratio
        );
        Ok((pass, detail, csv))
    })
}

pub fn variance_relation() -> (Outcome, Vec<u8>) {
    timed(7, "binomial/Poisson variance relation", Duration::from_secs(3600), || {
        let grid = vec![250, 500, 1000];
        let poisson = run_clt(&clt_config(ProcessKind::Poisson, 1, (0.5, 0.7), grid.clone(), 1000, 707))?;
        let binomial = run_clt(&clt_config(ProcessKind::Binomial, 1, (0.5, 0.7), grid, 1000, 708))?;
        let alpha = estimate_alpha(0.5, 0.7, 1, &Density::uniform(2), 5.0, 4000, RngSeed::new(709), FiltrationKind::Rips)?;
        let report = variance_relation_check(&poisson, &binomial, std::slice::from_ref(&alpha))?;
        let worst = report
            .entries
            .iter()
            .map(|e| format!("n={}: |{:.4}| vs {:.4}", e.n, e.difference, 3.0 * e.pooled_se))
            .collect::<Vec<_>>()
            .join(", ");
        let mut csv = clt_csv(&[&poisson, &binomial])?;
        io::write_alpha_csv(&mut csv, std::slice::from_ref(&alpha))?;
        io::write_relation_csv(&mut csv, &report)?;
        Ok((report.all_pass, format!("alpha {:.5} (SE {:.5}); {worst}", alpha.value, alpha.se), csv))
    })
}

pub fn depoissonization() -> (Outcome, Vec<u8>) {
    timed(8, "de-Poissonization", Duration::from_secs(900), || {
        let report = depoissonization_check(&DepoConfig {
            n: 1000,
            r: 0.5,
            s: 0.5,
            q: 1,
            density: DensitySpec::Uniform { d: 2 },
            kind: FiltrationKind::Rips,
            reps: 2000,
            seed: 808,
            alpha_window: 5.0,
            alpha_reps: 20000,
        })?;
        let mut csv = Vec::new();
        io::write_depo_csv(&mut csv, &report)?;
        let detail = format!(
            "E[R] {:.5} (SE {:.5}) vs alpha {:.5} (SE {:.5}): |diff| {:.5} <= {:.5}",
            report.mean,
            report.se,
            report.alpha.value,
            report.alpha.se,
            report.difference.abs(),
            3.0 * report.pooled_se
        );
        Ok((report.pass, detail, csv))
    })
}

pub fn radius_tightness() -> (Outcome, Vec<u8>) {
    timed(9, "radius tightness", Duration::from_secs(1200), || {
        let table = radius_tail_experiment(&TailConfig {
            d: 2,
            kind: FiltrationKind::Rips,
            lambdas: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            rs: vec![0.5],
            qs: vec![0, 1],
            l_grid: (0..=16).map(|k| 0.5 * k as f64).collect(),
            reps: 300,
            window: 10.0,
            seed: 909,
        })?;
        let monotone = table.rows.iter().all(|row| row.survival.windows(2).all(|w| w[0].estimate >= w[1].estimate));
        let weak = table.tight_index(RadiusKind::Weak, 0.05);
        let strong = table.tight_index(RadiusKind::Strong, 0.05);
        let show = |k: Option<usize>| k.map_or("none".to_string(), |k| format!("{}", table.l_grid[k]));
        let mut csv = Vec::new();
        io::write_tails_csv(&mut csv, &table)?;
        let detail = format!("weak L* = {}, strong-surrogate L* = {}, rows non-increasing: {monotone}", show(weak), show(strong));
        Ok((weak.is_some() && monotone, detail, csv))
    })
}

pub type Experiment = fn() -> (Outcome, Vec<u8>);

/// Criteria 5 to 9 in order.
pub const EXPERIMENTS: [Experiment; 5] = [degenerate_chain, clt_desk_scale, variance_relation, depoissonization, radius_tightness];

/// Runs one experiment criterion under a pool of `threads` workers.
pub fn run_with_threads(experiment: Experiment, threads: usize) -> Result<(Outcome, Vec<u8>)> {
    with_threads(Some(threads), experiment)
}

/// Compares the CSV bytes of two runs of criteria 5 to 9.
pub fn determinism(first: &[(Outcome, Vec<u8>)], second: &[(Outcome, Vec<u8>)], threads: (usize, usize), elapsed: Duration) -> Outcome {
    let differing: Vec<u8> = first
        .iter()
        .zip(second)
        .filter(|(a, b)| a.1.is_empty() || a.1 != b.1)
        .map(|(a, _)| a.0.id)
        .collect();
    let bytes: usize = first.iter().map(|x| x.1.len()).sum();
    let detail = if differing.is_empty() {
        format!("{bytes} CSV bytes identical between {} and {} threads", threads.0, threads.1)
    } else {
        format!("outputs of criteria {differing:?} differ or are missing between {} and {} threads", threads.0, threads.1)
    };
    Outcome { id: 10, title: "determinism across thread counts", pass: differing.is_empty(), detail, elapsed }
}
