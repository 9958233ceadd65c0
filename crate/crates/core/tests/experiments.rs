mod common;

use common::components;
use pslab_core::experiments::stats::{jackknife_covariance_se, mean_se, wilson};
use pslab_core::experiments::{
    alpha_sample, estimate_alpha, expectation_convergence, normality_score, radius_tail_experiment, run_clt,
    variance_relation_check, with_threads, CltConfig, ExpectationConfig, ProcessKind, RadiusKind, TailConfig,
};
use pslab_core::filtration::FiltrationKind;
use pslab_core::io::{write_covariance_csv, write_expectation_csv, write_replicates_csv, write_scores_csv, write_tails_csv};
use pslab_core::point_process::{Density, DensitySpec};
use pslab_core::{Error, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

fn normal_sample(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(2.0, 3.0).unwrap();
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Textbook Anderson-Darling on the studentized sample, with the upper tail
/// evaluated directly rather than through symmetry.
fn reference_ad(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut y: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    y.sort_by(f64::total_cmp);
    let cdf = |v: f64| 0.5 * erfc(-v / std::f64::consts::SQRT_2);
    let sf = |v: f64| 0.5 * erfc(v / std::f64::consts::SQRT_2);
    let k = y.len();
    let s: f64 = (1..=k).map(|i| (2 * i - 1) as f64 * (cdf(y[i - 1]).ln() + sf(y[k - i]).ln())).sum();
    -n - s / n
}

#[test]
fn anderson_darling_matches_reference_formula() {
    for seed in 0..5 {
        let xs = normal_sample(seed, 1000);
        let got = normality_score(&xs).unwrap();
        let want = reference_ad(&xs);
        assert!((got.ad - want).abs() < 1e-9, "{} vs {want}", got.ad);
        let n = 1000.0;
        assert!((got.ad_adjusted - want * (1.0 + 0.75 / n + 2.25 / (n * n))).abs() < 1e-9);
    }
}

#[test]
fn scores_are_affine_invariant() {
    let xs = normal_sample(9, 300);
    let base = normality_score(&xs).unwrap();
    for (a, b) in [(2.5, -7.0), (0.01, 100.0), (-3.0, 1.0)] {
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let s = normality_score(&ys).unwrap();
        assert!((s.ad - base.ad).abs() < 1e-8);
        assert!((s.ks - base.ks).abs() < 1e-8);
        assert!((s.excess_kurtosis - base.excess_kurtosis).abs() < 1e-8);
        // A negative scale mirrors the sample.
        assert!((s.skewness - a.signum() * base.skewness).abs() < 1e-8);
    }
}

#[test]
fn score_edge_cases() {
    let two_point: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
    assert!(normality_score(&two_point).unwrap().skewness.abs() < 1e-12);
    assert!(matches!(normality_score(&[4.0; 50]), Err(Error::Numerical(_))));
    assert!(matches!(normality_score(&[1.0, 2.0, 3.0]), Err(Error::Domain(_))));
    let w = wilson(0, 300);
    assert_eq!((w.estimate, w.lower), (0.0, 0.0));
    assert!(w.upper > 0.0 && w.upper < 0.02);
    let w = wilson(300, 300);
    assert_eq!(w.upper, 1.0);
    let xs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
    let ys: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).cos()).collect();
    assert!(jackknife_covariance_se(&xs, &ys) > 0.0);
}

#[test]
fn alpha_matches_naive_component_count() {
    let (r, s, q, window, reps) = (0.05, 0.05, 0, 1.0, 5000);
    let density = Density::uniform(2);
    let kind = FiltrationKind::Rips;
    let seed = RngSeed::new(2024);
    let est = estimate_alpha(r, s, q, &density, window, reps, seed, kind).unwrap();
    let naive: Vec<f64> = (0..reps as u64)
        .map(|i| {
            let sample = alpha_sample(r, s, q, &density, window, kind, seed.derive(i)).unwrap();
            let without = sample.window.to_vecs();
            let mut with = without.clone();
            with.push(vec![0.0, 0.0]);
            components(&with, r) as f64 - components(&without, r) as f64
        })
        .collect();
    let (mean, _) = mean_se(&naive);
    assert!((est.value - mean).abs() <= 3.0 * est.se, "{} vs {mean}", est.value);
    assert!(est.value < 1.0 && est.value > 0.9);
}

#[test]
fn alpha_rejects_bad_arguments() {
    let density = Density::uniform(2);
    let kind = FiltrationKind::Rips;
    let seed = RngSeed::new(1);
    assert!(matches!(estimate_alpha(0.5, 0.4, 0, &density, 5.0, 10, seed, kind), Err(Error::Domain(_))));
    assert!(matches!(estimate_alpha(0.1, 0.4, 2, &density, 5.0, 10, seed, kind), Err(Error::Domain(_))));
    assert!(matches!(estimate_alpha(0.1, 0.4, 0, &density, 1.0, 10, seed, kind), Err(Error::Domain(_))));
    assert!(matches!(estimate_alpha(0.1, 0.4, 0, &density, 5.0, 0, seed, kind), Err(Error::Domain(_))));
}

fn small_clt(process: ProcessKind) -> CltConfig {
    CltConfig {
        process,
        density: DensitySpec::Uniform { d: 2 },
        kind: FiltrationKind::Rips,
        q: 1,
        pairs: vec![(0.9, 1.1), (1.0, 1.3)],
        n_grid: vec![100, 200],
        replicates: 60,
        seed: 17,
        r_max: 1.5,
        q_max: 2,
        projections: 3,
    }
}

fn clt_csv(threads: usize) -> Vec<Vec<u8>> {
    with_threads(Some(threads), || {
        let res = run_clt(&small_clt(ProcessKind::Poisson)).unwrap();
        let mut out = vec![Vec::new(); 4];
        write_replicates_csv(&mut out[0], &[&res]).unwrap();
        write_covariance_csv(&mut out[1], &[&res]).unwrap();
        write_scores_csv(&mut out[2], &[&res]).unwrap();
        write_expectation_csv(&mut out[3], &[&res]).unwrap();
        out
    })
    .unwrap()
}

#[test]
fn clt_output_is_independent_of_threads() {
    let one = clt_csv(1);
    assert_eq!(one, clt_csv(3));
    assert!(one.iter().all(|f| !f.is_empty()));
}

#[test]
fn clt_blocks_are_consistent() {
    let res = run_clt(&small_clt(ProcessKind::Binomial)).unwrap();
    assert_eq!(res.blocks.len(), 2);
    for b in &res.blocks {
        assert_eq!(b.raw.len(), 60);
        for (i, row) in b.covariance.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, b.covariance[j][i]);
            }
        }
        assert!(b.min_eigenvalue >= -1e-9);
        assert_eq!(b.scores.len(), 2 + 3);
    }
    let mut bad = small_clt(ProcessKind::Poisson);
    bad.n_grid = vec![200, 100];
    assert!(matches!(run_clt(&bad), Err(Error::Config(_))));
}

#[test]
fn degenerate_relation_holds() {
    let mk = |process| CltConfig {
        process,
        density: DensitySpec::Uniform { d: 2 },
        kind: FiltrationKind::Rips,
        q: 0,
        pairs: vec![(0.0, 0.0)],
        n_grid: vec![150],
        replicates: 300,
        seed: 8,
        r_max: 0.5,
        q_max: 1,
        projections: 4,
    };
    let poi = run_clt(&mk(ProcessKind::Poisson)).unwrap();
    let bin = run_clt(&mk(ProcessKind::Binomial)).unwrap();
    let alpha = estimate_alpha(0.0, 0.0, 0, &Density::uniform(2), 1.0, 50, RngSeed::new(3), FiltrationKind::Rips).unwrap();
    assert_eq!((alpha.value, alpha.se), (1.0, 0.0));
    let report = variance_relation_check(&poi, &bin, &[alpha]).unwrap();
    assert!(report.all_pass, "{report:?}");
    assert_eq!(bin.blocks[0].covariance[0][0], 0.0);
}

#[test]
fn expectation_differences_shrink() {
    let cfg = ExpectationConfig {
        process: ProcessKind::Poisson,
        density: DensitySpec::Uniform { d: 2 },
        kind: FiltrationKind::Rips,
        q: 1,
        pair: (0.4, 0.4),
        n_grid: vec![250, 500, 1000, 2000],
        reps: 200,
        seed: 3,
    };
    let rows = expectation_convergence(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].delta.is_none());
    let first = rows[1].delta.unwrap().abs();
    let last = rows[3].delta.unwrap().abs();
    assert!(last < first, "|Δ| {last} vs {first}");
}

#[test]
fn tail_rows_are_monotone_and_deterministic() {
    let cfg = TailConfig {
        d: 2,
        kind: FiltrationKind::Rips,
        lambdas: vec![0.0, 0.5, 2.0],
        rs: vec![0.5],
        qs: vec![0, 1],
        l_grid: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        reps: 40,
        window: 7.0,
        seed: 5,
    };
    let table = radius_tail_experiment(&cfg).unwrap();
    assert_eq!(table.rows.len(), 3 * 2 * 2);
    for row in &table.rows {
        assert!(row.survival.windows(2).all(|w| w[0].estimate >= w[1].estimate));
        if row.lambda == 0.0 && row.radius == RadiusKind::Weak {
            assert!(row.survival.iter().all(|w| w.estimate == 0.0));
        }
    }
    let csv = |threads| {
        with_threads(Some(threads), || {
            let mut buf = Vec::new();
            write_tails_csv(&mut buf, &radius_tail_experiment(&cfg).unwrap()).unwrap();
            buf
        })
        .unwrap()
    };
    assert_eq!(csv(1), csv(2));
    let mut bad = cfg.clone();
    bad.window = 5.0;
    assert!(matches!(radius_tail_experiment(&bad), Err(Error::Domain(_))));
}
