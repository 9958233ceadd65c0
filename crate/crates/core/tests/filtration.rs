mod common;

use std::collections::HashMap;

use common::*;
use proptest::prelude::*;
use pslab_core::filtration::{
    build, build_cech, build_rips, build_with, count_new_simplices, miniball, restrict, FiltrationKind, Simplex, TieBreak,
};
use pslab_core::point_process::PointCloud;
use pslab_core::Error;

const S2: f64 = std::f64::consts::SQRT_2;

#[test]
fn square_rips_matches_subset_enumeration() {
    let c = build_rips(&unit_square(), 2.0, 3).unwrap();
    let brute = brute_complex(FiltrationKind::Rips, &unit_square(), 2.0, 3);
    assert_eq!(cell_map(&c), brute);
    let at = |q: usize, t: f64| c.cells().iter().filter(|x| x.simplex.dim() == q && (x.time - t).abs() < 1e-12).count();
    assert_eq!((at(1, 1.0), at(1, S2), at(2, S2), at(3, S2)), (4, 2, 4, 1));
    assert_eq!(c.len(), 4 + 6 + 4 + 1);
}

#[test]
fn small_rips_cases() {
    let one = build_rips(&cloud(&[vec![0.2, 0.7]]), 1.0, 2).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one.cells()[0].time, 0.0);
    let two = build_rips(&cloud(&[vec![0.0, 0.0], vec![2.0, 0.0]]), 3.0, 1).unwrap();
    let times: Vec<(usize, f64)> = two.cells().iter().map(|c| (c.simplex.dim(), c.time)).collect();
    assert_eq!(times, vec![(0, 0.0), (0, 0.0), (1, 2.0)]);
    assert!(matches!(build_rips(&unit_square(), 0.0, 1), Err(Error::Domain(_))));
    assert!(matches!(build_cech(&unit_square(), -1.0, 1), Err(Error::Domain(_))));
}

#[test]
fn cech_triangle_times() {
    let h = 3f64.sqrt() / 2.0;
    let eq = cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
    let c = build_cech(&eq, 2.0, 2).unwrap();
    let tri = c.cells().iter().find(|x| x.simplex.dim() == 2).unwrap().time;
    let pts: Vec<&[f64]> = eq.points().collect();
    assert!((tri - brute_miniball_2d(&pts)).abs() < 1e-9);
    assert!((tri - 1.0 / 3f64.sqrt()).abs() < 1e-9);

    let obtuse = cloud(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.1]]);
    let c = build_cech(&obtuse, 2.0, 2).unwrap();
    let tri = c.cells().iter().find(|x| x.simplex.dim() == 2).unwrap().time;
    let pts: Vec<&[f64]> = obtuse.points().collect();
    assert!((tri - brute_miniball_2d(&pts)).abs() < 1e-9);
    assert!((tri - 1.0).abs() < 1e-9);
    assert!(c.cells().iter().filter(|x| x.simplex.dim() == 0).all(|x| x.time == 0.0));
}

#[test]
fn miniball_trivial_inputs() {
    let p = [0.3, -1.2];
    let b = miniball(&[&p]).unwrap();
    assert_eq!((b.center, b.radius), (p.to_vec(), 0.0));
    let b = miniball(&[&[0.0, 0.0], &[2.0, 4.0]]).unwrap();
    assert!((b.center[0] - 1.0).abs() < 1e-12 && (b.center[1] - 2.0).abs() < 1e-12);
    assert!((b.radius - 5f64.sqrt()).abs() < 1e-12);
    assert!(matches!(miniball(&[]), Err(Error::Domain(_))));
}

#[test]
fn miniball_matches_support_enumeration() {
    for seed in 0..20 {
        let pts = random_points(seed, 30, 2, 1.0);
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let b = miniball(&refs).unwrap();
        let want = brute_miniball_2d(&refs);
        assert!((b.radius - want).abs() < 1e-9, "seed {seed}: {} vs {want}", b.radius);
        assert!(refs.iter().all(|p| dist(p, &b.center) <= b.radius + 1e-9));
    }
}

#[test]
fn restrict_examples() {
    let p = random_cloud(3, 40, 2, 1.0);
    let all = restrict(&p, &[0.5, 0.5], 2.0).unwrap();
    assert_eq!(all.to_vecs(), p.to_vecs());
    assert!(restrict(&p, &[7.0, 7.0], 0.0).unwrap().is_empty());
    for seed in 0..10u64 {
        let center = random_points(100 + seed, 1, 2, 1.0).remove(0);
        let a = 0.1 + seed as f64 * 0.07;
        let got = restrict(&p, &center, a).unwrap().to_vecs();
        let want: Vec<Vec<f64>> = p.to_vecs().into_iter().filter(|x| dist(x, &center) <= a).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn count_new_simplices_examples() {
    let square = unit_square();
    let empty = PointCloud::empty(square.window().clone());
    assert_eq!(count_new_simplices(&empty, &square, 1.0, 1, FiltrationKind::Rips).unwrap(), 4);
    let three = PointCloud::from_points(&square.to_vecs()[..3], square.window().clone()).unwrap();
    assert_eq!(count_new_simplices(&three, &square, S2, 2, FiltrationKind::Rips).unwrap(), 3);
    assert_eq!(count_new_simplices(&square, &square, S2, 2, FiltrationKind::Rips).unwrap(), 0);
    let other = cloud(&[vec![0.5, 0.5]]);
    assert!(matches!(count_new_simplices(&other, &square, 1.0, 1, FiltrationKind::Rips), Err(Error::Domain(_))));
}

#[test]
fn random_clouds_match_subset_enumeration() {
    for seed in 0..40 {
        let p = random_cloud(seed, 7, 2, 1.0);
        for kind in KINDS {
            let c = build(kind, &p, 0.6, 3).unwrap();
            let got = cell_map(&c);
            let want = brute_complex(kind, &p, 0.6, 3);
            assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>(), "seed {seed} {kind:?}");
            for (k, t) in &got {
                assert!((t - want[k]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn seeded_tie_break_keeps_the_same_cells() {
    let square = unit_square();
    let a = build_with(FiltrationKind::Rips, &square, 2.0, 3, TieBreak::Lexicographic).unwrap();
    let b = build_with(FiltrationKind::Rips, &square, 2.0, 3, TieBreak::Seeded(9)).unwrap();
    assert_eq!(cell_map(&a), cell_map(&b));
}

fn time_map(kind: FiltrationKind, p: &PointCloud, r_max: f64, q_max: usize) -> HashMap<Simplex, f64> {
    build(kind, p, r_max, q_max).unwrap().cells().iter().map(|c| (c.simplex.clone(), c.time)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn faces_enter_no_later_than_cofaces(p in cloud_strategy(2, 9, 1.0), kind in kind_strategy(), r_max in 0.1f64..1.5) {
        let c = build(kind, &p, r_max, 3).unwrap();
        let index = c.index();
        for (j, cell) in c.cells().iter().enumerate() {
            prop_assert!(cell.time >= 0.0 && cell.time <= r_max);
            if cell.simplex.dim() == 0 {
                prop_assert_eq!(cell.time, 0.0);
            }
            for f in cell.simplex.facets() {
                let i = index[&f];
                prop_assert!(i < j);
                prop_assert!(c.cells()[i].time <= cell.time);
            }
        }
    }

    #[test]
    fn cech_is_sandwiched_and_obeys_jung(p in prop_oneof![cloud_strategy(2, 8, 1.0), cloud_strategy(3, 7, 1.0)]) {
        let d = p.dim() as f64;
        let rips = time_map(FiltrationKind::Rips, &p, 2.0, 3);
        let cech = time_map(FiltrationKind::Cech, &p, 2.0, 3);
        prop_assert_eq!(rips.len(), cech.len());
        let jung = (d / (2.0 * (d + 1.0))).sqrt();
        for (s, &diam) in &rips {
            let pts: Vec<&[f64]> = s.vertices().iter().map(|&v| p.point(v as usize)).collect();
            prop_assert!((diam - diameter(&pts)).abs() < 1e-12);
            let t = cech[s];
            prop_assert!(diam / 2.0 <= t + 1e-12 && t <= diam + 1e-12);
            prop_assert!(t <= diam * jung + 1e-9);
        }
    }

    #[test]
    fn restriction_is_the_induced_subcomplex(
        p in cloud_strategy(2, 10, 1.0),
        kind in kind_strategy(),
        center in prop::collection::vec(0.0f64..1.0, 2),
        a in 0.0f64..0.9,
    ) {
        let sub = restrict(&p, &center, a).unwrap();
        let embed = sub.embedding_into(&p).unwrap();
        let full = build(kind, &p, 0.8, 2).unwrap();
        let inside: Vec<bool> = p.points().map(|x| dist(x, &center) <= a).collect();
        let mut want: Vec<(Vec<u32>, f64)> = full
            .cells()
            .iter()
            .filter(|c| c.simplex.vertices().iter().all(|&v| inside[v as usize]))
            .map(|c| (c.simplex.vertices().to_vec(), c.time))
            .collect();
        want.sort_by(|x, y| x.0.cmp(&y.0));
        let mut got: Vec<(Vec<u32>, f64)> = build(kind, &sub, 0.8, 2)
            .unwrap()
            .cells()
            .iter()
            .map(|c| {
                let mut v: Vec<u32> = c.simplex.vertices().iter().map(|&i| embed[i as usize] as u32).collect();
                v.sort_unstable();
                (v, c.time)
            })
            .collect();
        got.sort_by(|x, y| x.0.cmp(&y.0));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn translation_and_scaling(
        p in cloud_strategy(2, 8, 1.0),
        kind in kind_strategy(),
        v in prop::collection::vec(-5.0f64..5.0, 2),
        alpha in 0.25f64..4.0,
    ) {
        // Caps above every diameter so no cell sits on the truncation edge.
        let base = time_map(kind, &p, 2.0, 3);
        let moved = time_map(kind, &p.translated(&v), 2.0, 3);
        let scaled = time_map(kind, &p.scaled(alpha), 2.0 * alpha, 3);
        prop_assert_eq!(base.len(), moved.len());
        prop_assert_eq!(base.len(), scaled.len());
        for (s, t) in &base {
            prop_assert!((moved[s] - t).abs() < 1e-9);
            prop_assert!((scaled[s] - alpha * t).abs() < 1e-9 * alpha.max(1.0));
        }
    }
}
