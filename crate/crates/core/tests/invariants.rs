use proptest::prelude::*;

use region_stabilize::bounds::{c_alpha_s, QuadratureSpec};
use region_stabilize::empirics::{ks_distance, wasserstein1};
use region_stabilize::malliavin::{diff1, diff1_decomposed, diff2, diff2_decomposed};
use region_stabilize::scores::skyline::{count_minimal_brute, count_minimal_fast};
use region_stabilize::scores::{LatticeIsolated, LatticeWeight, MinimalPoints, RggIsolated, RggWeight};
use region_stabilize::{AnyModel, Point, PointConfiguration, ScoreModel, SpaceTag};

/// Coordinates on a coarse dyadic grid, so ties and dominance chains occur.
fn cube_point(d: usize) -> impl Strategy<Value = Point> {
    proptest::collection::vec(0u8..8, d).prop_map(|c| Point::new(c.into_iter().map(|v| (f64::from(v) + 0.5) / 8.0)))
}

fn cube_config(d: usize, max: usize) -> impl Strategy<Value = PointConfiguration> {
    proptest::collection::vec(cube_point(d), 0..max)
        .prop_map(move |pts| PointConfiguration::from_points(SpaceTag::Cube, d, pts).unwrap())
}

fn lattice_point() -> impl Strategy<Value = Point> {
    (-3i64..=3, -3i64..=3).prop_map(|(a, b)| Point::lattice(&[a, b]))
}

fn lattice_config() -> impl Strategy<Value = PointConfiguration> {
    proptest::collection::vec(lattice_point(), 0..20)
        .prop_map(|pts| PointConfiguration::from_points(SpaceTag::Lattice, 2, pts).unwrap())
}

fn minimal() -> AnyModel {
    MinimalPoints::new(50.0, 2, 1.0).unwrap().into()
}

fn lattice() -> AnyModel {
    LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight { half_width: 2, value: 1.5 }).unwrap().into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn minimal_score_depends_only_on_region(config in cube_config(2, 25)) {
        let m = minimal();
        for (x, _) in config.entries() {
            let region = m.region_at(x, &config);
            if region.is_empty() {
                // an empty region certifies a zero score
                prop_assert_eq!(m.score_at(x, &config), 0.0);
                continue;
            }
            let restricted = config.restrict(&region);
            prop_assert_eq!(m.score_at(x, &config), m.score_at(x, &restricted));
        }
    }

    #[test]
    fn lattice_score_depends_only_on_region(config in lattice_config()) {
        let m = lattice();
        for (x, _) in config.entries() {
            let region = m.region_at(x, &config);
            if region.is_empty() {
                prop_assert_eq!(m.score_at(x, &config), 0.0);
                continue;
            }
            prop_assert_eq!(m.score_at(x, &config), m.score_at(x, &config.restrict(&region)));
        }
    }

    #[test]
    fn first_difference_decomposes(config in cube_config(2, 20), y in cube_point(2)) {
        let m = minimal();
        prop_assert_eq!(diff1(&m, &config, &y).unwrap().value, diff1_decomposed(&m, &config, &y).unwrap());
    }

    #[test]
    fn second_difference_decomposes_and_is_symmetric(
        config in lattice_config(), y1 in lattice_point(), y2 in lattice_point()
    ) {
        let m = lattice();
        let d = diff2(&m, &config, &y1, &y2).unwrap().value;
        prop_assert_eq!(d, diff2_decomposed(&m, &config, &y1, &y2).unwrap());
        prop_assert_eq!(d, diff2(&m, &config, &y2, &y1).unwrap().value);
    }

    #[test]
    fn skyline_matches_brute_force(pts in proptest::collection::vec(cube_point(3), 0..120)) {
        prop_assert_eq!(count_minimal_fast(&pts, 3), count_minimal_brute(&pts));
    }

    #[test]
    fn c_alpha_scaling(y in proptest::collection::vec(0.01f64..1.0, 2), alpha in 0.05f64..2.0, ls in 0.0f64..4.0) {
        let q = QuadratureSpec::default();
        let s = 10f64.powf(ls);
        let lhs = c_alpha_s(&y, alpha, s, &q).unwrap().value;
        let rhs = c_alpha_s(&y, 1.0, alpha * s, &q).unwrap().value / alpha;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-300));
    }

    #[test]
    fn distances_are_bounded_and_shift_lipschitz(xs in proptest::collection::vec(-4.0f64..4.0, 1..60), h in -1.0f64..1.0) {
        let ks = ks_distance(&xs).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
        let shifted: Vec<f64> = xs.iter().map(|x| x + h).collect();
        let (a, b) = (wasserstein1(&xs).unwrap(), wasserstein1(&shifted).unwrap());
        prop_assert!((a - b).abs() <= h.abs() + 1e-12);
    }

    #[test]
    fn rgg_statistic_ignores_entry_order(mut pts in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 0..30)) {
        let m: AnyModel = RggIsolated::new(4.0, 2, 1.0, 0.4, RggWeight::Indicator { radius: 5.0, value: 2.0 }).unwrap().into();
        let to_config = |p: &[(f64, f64)]| {
            PointConfiguration::from_points(SpaceTag::EuclideanWindow, 2, p.iter().map(|&(a, b)| Point::new([a, b]))).unwrap()
        };
        let a = m.statistic(&to_config(&pts)).value;
        pts.reverse();
        prop_assert_eq!(a, m.statistic(&to_config(&pts)).value);
    }
}
