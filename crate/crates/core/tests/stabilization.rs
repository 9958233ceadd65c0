mod common;

use common::*;
use pslab_core::filtration::{build_with, restrict, FiltrationKind, TieBreak};
use pslab_core::persistence::{reduce_with, RankQuery, ReduceOptions};
use pslab_core::point_process::{sample_poisson_homogeneous, PointCloud, Window};
use pslab_core::stabilization::{
    add_one_cost, strong_radius_estimate, swap_difference, weak_radius, RadiusSetup, WeakRadius,
};
use pslab_core::{Error, RngSeed};

const ORIGIN: [f64; 2] = [0.0, 0.0];

/// `(dim Z_q(K_r), dim Z_q(K_r) ∩ B_q(K_s))` for every `q < d`, from a fresh build.
fn cycle_counts(x: &PointCloud, r: f64, s: f64, kind: FiltrationKind) -> Vec<(i64, i64)> {
    let d = x.dim();
    if x.is_empty() {
        return vec![(0, 0); d];
    }
    let c = build_with(kind, x, s, d, TieBreak::Lexicographic).unwrap();
    let p = reduce_with(&c, ReduceOptions { clearing: false });
    (0..d)
        .map(|q| {
            let z = p.cycle_dim(q, r) as i64;
            let beta = p.diagram.persistent_betti(RankQuery::new(q, r, s)).unwrap() as i64;
            (z, z - beta)
        })
        .collect()
}

/// `(D₁(a), D₂(a))` per `q`, recomputed on the full restricted clouds.
fn oracle(base: &PointCloud, added: &PointCloud, a: f64, r: f64, s: f64, kind: FiltrationKind) -> Vec<(i64, i64)> {
    let with = restrict(&base.union(added).unwrap(), &ORIGIN, a).unwrap();
    let without = restrict(base, &ORIGIN, a).unwrap();
    cycle_counts(&with, r, s, kind)
        .into_iter()
        .zip(cycle_counts(&without, r, s, kind))
        .map(|(w, o)| (w.0 - o.0, w.1 - o.1))
        .collect()
}

fn pts(v: &[[f64; 2]], w: f64) -> PointCloud {
    let v: Vec<Vec<f64>> = v.iter().map(|p| p.to_vec()).collect();
    PointCloud::from_points(&v, Window::ball(ORIGIN.to_vec(), w)).unwrap()
}

fn poisson_ball(lambda: f64, w: f64, seed: RngSeed) -> PointCloud {
    sample_poisson_homogeneous(lambda, &Window::ball(ORIGIN.to_vec(), w), seed).unwrap()
}

struct Scenario {
    base: PointCloud,
    added: PointCloud,
    r: f64,
    s: f64,
    kind: FiltrationKind,
    window: f64,
}

fn scenarios(count: u64) -> Vec<Scenario> {
    let mut out = Vec::new();
    for i in 0..count {
        let kind = KINDS[(i % 2) as usize];
        let (r, s) = match kind {
            FiltrationKind::Rips => (0.6 + 0.1 * (i % 3) as f64, 1.0),
            FiltrationKind::Cech => (0.3, 0.45 + 0.05 * (i % 3) as f64),
        };
        let window = 6.0;
        let base = poisson_ball(1.5, window, RngSeed::new(1000 + i));
        let added = if i % 3 == 0 { pts(&[[0.0, 0.0], [0.25, -0.1]], window) } else { pts(&[[0.0, 0.0]], window) };
        let base = base.filter(base.window().clone(), |x| !added.contains_point(x));
        out.push(Scenario { base, added, r, s, kind, window });
    }
    out
}

fn run(sc: &Scenario) -> WeakRadius {
    weak_radius(&sc.base, &sc.added, &ORIGIN, sc.r, sc.s, &RadiusSetup::new(sc.kind, sc.window)).unwrap()
}

#[test]
fn weak_trace_matches_full_recomputation() {
    for (i, sc) in scenarios(40).iter().enumerate() {
        let w = run(sc);
        assert!(!w.trace.radii.is_empty());
        for (k, &a) in w.trace.radii.iter().enumerate() {
            let want = oracle(&sc.base, &sc.added, a, sc.r, sc.s, sc.kind);
            for (q, &(d1, d2)) in want.iter().enumerate() {
                assert_eq!((w.trace.d1[k][q], w.trace.d2[k][q]), (d1, d2), "scenario {i} a={a} q={q}");
            }
        }
        // Window edge: the add-one cost of the windowed clouds.
        for q in 0..2 {
            let query = RankQuery::new(q, sc.r, sc.s);
            let cost = add_one_cost(&sc.base, &sc.added, query, sc.kind).unwrap();
            assert_eq!(w.add_one[q], cost, "scenario {i} q={q}");
        }
    }
}

#[test]
fn first_difference_is_monotone_and_tail_is_constant() {
    for sc in scenarios(30) {
        let w = run(&sc);
        for q in 0..2 {
            let d1: Vec<i64> = w.trace.d1.iter().map(|v| v[q]).collect();
            assert!(d1.windows(2).all(|p| p[0] <= p[1]), "D1 not monotone: {d1:?}");
            let est = &w.per_q[q];
            if est.censored {
                continue;
            }
            let tail: Vec<i64> = w
                .trace
                .radii
                .iter()
                .filter(|&&a| a >= est.value)
                .map(|&a| {
                    let o = oracle(&sc.base, &sc.added, a, sc.r, sc.s, sc.kind)[q];
                    o.0 - o.1
                })
                .collect();
            assert!(tail.windows(2).all(|p| p[0] == p[1]), "q={q} tail {tail:?}");
            assert!(w.per_q[q].value <= w.overall.value);
        }
    }
}

#[test]
fn add_one_examples() {
    let w = 5.0;
    let empty = PointCloud::empty(Window::ball(ORIGIN.to_vec(), w));
    let origin = pts(&[ORIGIN], w);
    let rips = FiltrationKind::Rips;
    assert_eq!(add_one_cost(&empty, &origin, RankQuery::new(0, 0.0, 0.0), rips).unwrap(), 1);
    let square = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], w);
    let center = pts(&[[0.5, 0.5]], w);
    assert_eq!(add_one_cost(&square, &center, RankQuery::new(1, 1.0, 1.0), rips).unwrap(), -1);
    let far = pts(&[[3.0, 0.0], [3.0, 1.0], [4.0, 0.0], [4.0, 1.0]], w);
    for kind in KINDS {
        assert_eq!(add_one_cost(&far, &origin, RankQuery::new(1, 0.9, 1.0), kind).unwrap(), 0);
        assert_eq!(add_one_cost(&far, &origin, RankQuery::new(0, 1.0, 1.0), kind).unwrap(), 1);
    }
    assert!(matches!(add_one_cost(&far, &origin, RankQuery::new(0, 1.0, 0.5), rips), Err(Error::Domain(_))));
}

#[test]
fn weak_radius_examples() {
    let setup = RadiusSetup::new(FiltrationKind::Rips, 5.0);
    let origin = pts(&[ORIGIN], 5.0);
    let near = pts(&[[0.5, 0.0]], 5.0);
    let w = weak_radius(&near, &origin, &ORIGIN, 1.0, 1.0, &setup).unwrap();
    assert_eq!((w.overall.value, w.overall.censored), (0.5, false));
    for (k, &a) in w.trace.radii.iter().enumerate() {
        let o = oracle(&near, &origin, a, 1.0, 1.0, FiltrationKind::Rips);
        assert_eq!((w.trace.d1[k][0], w.trace.d2[k][0]), o[0]);
    }
    let far = pts(&[[3.0, 0.0]], 5.0);
    let w = weak_radius(&far, &origin, &ORIGIN, 1.0, 1.0, &setup).unwrap();
    assert_eq!((w.overall.value, w.overall.censored), (0.0, false));
    assert!(w.trace.d1.iter().all(|v| v[0] == 1) && w.trace.d2.iter().all(|v| v[0] == 0));
    let empty = PointCloud::empty(Window::ball(ORIGIN.to_vec(), 5.0));
    let w = weak_radius(&empty, &origin, &ORIGIN, 1.0, 1.0, &setup).unwrap();
    assert_eq!((w.overall.value, w.overall.censored), (0.0, false));
    let tight = RadiusSetup::new(FiltrationKind::Rips, 0.9);
    assert!(matches!(weak_radius(&near, &origin, &ORIGIN, 1.0, 1.0, &tight), Err(Error::Domain(_))));
}

#[test]
fn strong_surrogate_examples() {
    let setup = RadiusSetup::new(FiltrationKind::Rips, 5.0);
    let origin = pts(&[ORIGIN], 5.0);
    let empty = PointCloud::empty(Window::ball(ORIGIN.to_vec(), 5.0));
    for r in [0.3, 1.0] {
        let e = strong_radius_estimate(&empty, &origin, &ORIGIN, r, 1, &setup).unwrap();
        assert_eq!((e.value, e.censored), (r, false));
    }
    let near = pts(&[[0.5, 0.0]], 5.0);
    let weak = weak_radius(&near, &origin, &ORIGIN, 1.0, 1.0, &setup).unwrap();
    let strong = strong_radius_estimate(&near, &origin, &ORIGIN, 1.0, 0, &setup).unwrap();
    assert!(!strong.censored && strong.value.is_finite());
    assert!(strong.value >= weak.overall.value);
}

#[test]
fn weak_is_dominated_by_strong_surrogate() {
    let window = 7.0;
    let origin = pts(&[ORIGIN], window);
    let mut compared = 0;
    for i in 0..40u64 {
        let base = poisson_ball(1.0, window, RngSeed::new(500 + i));
        let setup = RadiusSetup::new(FiltrationKind::Rips, window);
        let (r, s) = (0.5, 0.8);
        let weak = weak_radius(&base, &origin, &ORIGIN, r, s, &setup).unwrap();
        let strong: Vec<_> = (0..2)
            .flat_map(|q| [r, s].map(|t| strong_radius_estimate(&base, &origin, &ORIGIN, t, q, &setup).unwrap()))
            .collect();
        if weak.overall.censored || strong.iter().any(|e| e.censored) {
            continue;
        }
        let bound = strong.iter().map(|e| e.value).fold(0.0, f64::max);
        assert!(weak.overall.value <= bound, "replicate {i}: {} > {bound}", weak.overall.value);
        compared += 1;
    }
    assert!(compared >= 30);
}

#[test]
fn swap_difference_examples() {
    let w = Window::cube(2, -3.0, 3.0);
    let p = PointCloud::from_points(&[vec![0.1, 0.2], vec![2.0, 2.0], vec![2.5, 2.0]], w.clone()).unwrap();
    let rips = FiltrationKind::Rips;
    let same = swap_difference(&p, &p, &[0, 0], 36.0, RankQuery::new(0, 0.5, 0.5), rips).unwrap();
    assert_eq!(same.value, 0);
    let without = PointCloud::from_points(&[vec![2.0, 2.0], vec![2.5, 2.0]], w.clone()).unwrap();
    let rec = swap_difference(&p, &without, &[0, 0], 36.0, RankQuery::new(0, 0.0, 0.0), rips).unwrap();
    assert_eq!(rec.value, 1);
    assert!(rec.bound >= 1);
    assert!(matches!(swap_difference(&p, &p, &[3, 0], 36.0, RankQuery::new(0, 0.0, 0.0), rips), Err(Error::Domain(_))));
}

#[test]
fn swap_differences_stabilize_in_n() {
    // B_n has side n^{1/2}; the largest is 10, matching the sampling window.
    let grid = [16.0, 36.0, 64.0, 100.0];
    let window = Window::centered_cube(2, 10.0);
    let queries = [RankQuery::new(0, 0.8, 1.2), RankQuery::new(1, 0.8, 1.2)];
    for query in queries {
        let mut constant = 0;
        let mut nonzero = 0;
        for rep in 0..200u64 {
            let seed = RngSeed::with_stream(42, rep);
            let p = sample_poisson_homogeneous(1.0, &window, seed.derive(0)).unwrap();
            let pp = sample_poisson_homogeneous(1.0, &window, seed.derive(1)).unwrap();
            let values: Vec<i64> = grid
                .iter()
                .map(|&n| {
                    let rec = swap_difference(&p, &pp, &[0, 0], n, query, FiltrationKind::Rips).unwrap();
                    assert!(rec.value.unsigned_abs() as usize <= rec.bound);
                    rec.value
                })
                .collect();
            if values[2] == values[3] {
                constant += 1;
            }
            if values[3] != 0 {
                nonzero += 1;
            }
        }
        assert!(constant >= 190, "q={}: constant in {constant}/200", query.q);
        if query.q == 0 {
            assert!(nonzero > 20, "q=0 swap differences are almost all zero");
        }
    }
}
