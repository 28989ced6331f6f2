mod common;

use std::f64::consts::PI;

use extrapolate::bounds::{build_fisher, full_lb, simplified_lb_simo, simplified_lb_siso};
use extrapolate::channel::{
    channel_frequency_response, merge_close_paths, steering_vector, ArrayGeometry, PathParams, PathSet,
};
use extrapolate::experiment::{compare_curves, CompareMetric};
use extrapolate::pathset_io::{load_pathset, normalize, save_pathset, Normalization, Recipe, ScenarioSpec};
use extrapolate::signal::{TrainingPulse, MIN_TAIL_SYMBOLS};
use extrapolate::Complex64;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

const T: f64 = 50e-9;
const LAMBDA: f64 = 0.085_654_987;

fn path_strategy() -> impl Strategy<Value = PathParams> {
    (0.05..1.0f64, 0.0..2.0 * PI, 0.0..20.0f64, -PI + 1e-9..PI, 0.0..PI)
        .prop_map(|(g, ph, d, phi, theta)| PathParams::new(Complex64::from_polar(g, ph), d * T, phi, theta).unwrap())
}

fn pathset_strategy(max: usize) -> impl Strategy<Value = PathSet> {
    prop::collection::vec(path_strategy(), 1..=max).prop_filter_map("distinct paths", |v| PathSet::new(v).ok())
}

fn array_strategy() -> impl Strategy<Value = ArrayGeometry> {
    (1usize..=4, 1usize..=4).prop_map(|(r, c)| {
        if r * c == 1 {
            ArrayGeometry::single(LAMBDA).unwrap()
        } else {
            ArrayGeometry::rectangular(r, c, LAMBDA).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_entries_have_unit_magnitude(phi in -PI..PI, theta in 0.0..PI, r in 1usize..6, c in 1usize..6) {
        let array = ArrayGeometry::rectangular(r, c, LAMBDA).unwrap();
        for a in steering_vector(&array, phi, theta) {
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn siso_response_with_real_gains_is_conjugate_symmetric(
        gains in prop::collection::vec(-1.0..1.0f64, 1..6),
        f in -1e9..1e9f64,
    ) {
        let array = ArrayGeometry::single(LAMBDA).unwrap();
        let paths = PathSet::from_raw(
            gains.iter().enumerate()
                .map(|(i, g)| PathParams::new(Complex64::new(*g, 0.0), i as f64 * 3e-8, 0.0, 1.0).unwrap())
                .collect(),
        ).unwrap();
        let pos = channel_frequency_response(&paths, &array, f)[0];
        let neg = channel_frequency_response(&paths, &array, -f)[0];
        prop_assert!((pos - neg.conj()).norm() < 1e-12);
    }

    #[test]
    fn merging_is_idempotent(paths in pathset_strategy(8), dt in 0.1..3.0f64, da in 0.05..1.0f64) {
        let once = merge_close_paths(&paths, dt * T, da).unwrap();
        let twice = merge_close_paths(&once.paths, dt * T, da).unwrap();
        prop_assert_eq!(&once.paths, &twice.paths);
        prop_assert!(once.paths.len() <= paths.len());
        let total: usize = once.groups.iter().map(|g| g.len()).sum();
        prop_assert_eq!(total, paths.len());
        // complex gain is conserved
        let before: Complex64 = paths.iter().map(|p| p.alpha).sum();
        let after: Complex64 = once.paths.iter().map(|p| p.alpha).sum();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn fisher_is_symmetric_positive_semidefinite(paths in pathset_strategy(4), array in array_strategy()) {
        let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
        let fim = build_fisher(&paths, &array, &pulse, 0.1).unwrap();
        let m = &fim.matrix;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                prop_assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        // scale-free check on the equilibrated matrix
        // unobservable parameters (azimuth at the pole) have a zero diagonal
        let d: Vec<f64> = (0..m.nrows()).map(|i| if m[(i, i)] > 0.0 { m[(i, i)].sqrt() } else { 1.0 }).collect();
        let scaled = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (d[i] * d[j]));
        let eig = SymmetricEigen::new(scaled);
        prop_assert!(eig.eigenvalues.min() > -1e-9);
    }

    #[test]
    fn full_bound_mirrors_under_conjugation(paths in pathset_strategy(3), array in array_strategy(), f in 0.0..3.0f64) {
        // Conjugating gains and reversing directions conjugates the received
        // signal on a centred array, which maps LB(-f) onto LB(f).
        let mirrored = PathSet::new(
            paths.iter()
                .map(|p| {
                    let phi = if p.phi > 0.0 { p.phi - PI } else { p.phi + PI };
                    PathParams::new(p.alpha.conj(), p.tau, phi, PI - p.theta).unwrap()
                })
                .collect(),
        ).unwrap();
        let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
        if let (Ok(a), Ok(b)) = (
            full_lb(&paths, &array, &pulse, 0.01, &[-f / T]),
            full_lb(&mirrored, &array, &pulse, 0.01, &[f / T]),
        ) {
            prop_assert!((a.lb_full[0] - b.lb_full[0]).abs() <= 1e-8 * a.lb_full[0], "{} vs {}", a.lb_full[0], b.lb_full[0]);
        }
    }

    #[test]
    fn siso_bound_with_real_gains_is_even(
        gains in prop::collection::vec(0.1..1.0f64, 1..5),
        signs in prop::collection::vec(any::<bool>(), 5),
        f in 0.0..3.0f64,
    ) {
        let array = ArrayGeometry::single(LAMBDA).unwrap();
        let paths = PathSet::new(
            gains.iter().zip(&signs).enumerate()
                .map(|(i, (g, s))| {
                    let g = if *s { *g } else { -*g };
                    PathParams::new(Complex64::new(g, 0.0), (2.0 + 2.5 * i as f64) * T, 0.0, 1.0).unwrap()
                })
                .collect(),
        ).unwrap();
        let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
        let lb = full_lb(&paths, &array, &pulse, 0.01, &[f / T, -f / T]).unwrap();
        prop_assert!((lb.lb_full[0] - lb.lb_full[1]).abs() <= 1e-9 * lb.lb_full[0]);
    }

    #[test]
    fn single_path_bound_is_even(path in path_strategy(), array in array_strategy(), f in 0.0..3.0f64) {
        let paths = PathSet::new(vec![path]).unwrap();
        let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
        if let Ok(lb) = full_lb(&paths, &array, &pulse, 0.01, &[f / T, -f / T]) {
            // only the window-truncation residue of sdot^T s breaks evenness
            prop_assert!((lb.lb_full[0] - lb.lb_full[1]).abs() <= 1e-6 * lb.lb_full[0], "{:?}", lb.lb_full);
        }
    }

    #[test]
    fn simplified_bounds_follow_quadratic_law(l in 1usize..30, m in 1usize..256, snr in 0.1..1e4f64, f in 0.0..5.0f64, sf in 0.1..2.0f64) {
        for lb in [
            |f: f64| simplified_lb_simo(7, 32, 100.0, f, 0.3),
            |f: f64| simplified_lb_siso(7, 100.0, f, 0.3),
        ] {
            let (a0, a1, a2) = (lb(0.0), lb(f), lb(2.0 * f));
            prop_assert!(((a2 - a0) - 4.0 * (a1 - a0)).abs() <= 1e-12 * (a2 - a0).abs().max(a0));
        }
        let (a0, a1, a2) = (
            simplified_lb_simo(l, m, snr, 0.0, sf),
            simplified_lb_simo(l, m, snr, f, sf),
            simplified_lb_simo(l, m, snr, 2.0 * f, sf),
        );
        prop_assert!(((a2 - a0) - 4.0 * (a1 - a0)).abs() <= 1e-12 * (a2 - a0).abs().max(a0));
    }

    #[test]
    fn covering_window_always_covers(max_delay in 0.0..5e-6f64, bw in 1e6..2e9f64, k in 2usize..5) {
        let period = 1.0 / bw;
        let pulse = TrainingPulse::covering(0.2, period, k, max_delay).unwrap();
        let paths = PathSet::new(vec![
            PathParams::new(Complex64::new(1.0, 0.0), 0.0, 0.0, 1.0).unwrap(),
            PathParams::new(Complex64::new(1.0, 0.0), max_delay, 0.5, 1.0).unwrap(),
        ]).or_else(|_| PathSet::new(vec![PathParams::new(Complex64::new(1.0, 0.0), 0.0, 0.0, 1.0).unwrap()])).unwrap();
        prop_assert!(pulse.check_covers(&paths, MIN_TAIL_SYMBOLS).is_ok());
    }

    #[test]
    fn normalization_hits_target(paths in pathset_strategy(10), target in 0.01..10.0f64) {
        let n = normalize(paths.clone(), Normalization::Magnitude, target).unwrap();
        let sum: f64 = n.iter().map(|p| p.alpha.norm()).sum();
        prop_assert!((sum - target).abs() < 1e-12 * target.max(1.0));
        let p = normalize(paths, Normalization::Power, target).unwrap();
        let power: f64 = p.iter().map(|p| p.alpha.norm_sqr()).sum();
        prop_assert!((power - target).abs() < 1e-12 * target.max(1.0));
    }

    #[test]
    fn save_load_round_trip(paths in pathset_strategy(6)) {
        let paths = normalize(paths, Normalization::Magnitude, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.csv");
        let second = dir.path().join("b.csv");
        save_pathset(&paths, &first).unwrap();
        let loaded = load_pathset(&ScenarioSpec::file(&first, 0)).unwrap();
        // delays and angles are stored as read
        for (a, b) in paths.iter().zip(loaded.iter()) {
            prop_assert_eq!(a.tau, b.tau);
            prop_assert_eq!(a.phi, b.phi);
            prop_assert_eq!(a.theta, b.theta);
            prop_assert!((a.alpha - b.alpha).norm() <= 4.0 * f64::EPSILON * a.alpha.norm());
        }
        save_pathset(&loaded, &second).unwrap();
        let again = load_pathset(&ScenarioSpec::file(&second, 0)).unwrap();
        for (a, b) in loaded.iter().zip(again.iter()) {
            prop_assert_eq!(a.tau, b.tau);
            prop_assert_eq!(a.phi, b.phi);
            prop_assert_eq!(a.theta, b.theta);
            prop_assert!((a.alpha - b.alpha).norm() <= 4.0 * f64::EPSILON * a.alpha.norm());
        }
    }

    #[test]
    fn recipe_names_round_trip(l in 1usize..10, k in 0.5..50.0f64, d in 0.01..1.5f64) {
        for recipe in [
            Recipe::SinglePath,
            Recipe::TwoPathDelaySeparated { symbols: k },
            Recipe::TwoPathAngleSeparated { delta_phi: d },
            Recipe::Grid { paths: l, spacing_symbols: k, angle_step: d },
        ] {
            prop_assert_eq!(recipe.to_string().parse::<Recipe>().unwrap(), recipe);
        }
    }

    #[test]
    fn compare_scaling_gives_its_ratio(values in prop::collection::vec(1e-6..1.0f64, 1..20), c in 1.0..100.0f64) {
        let a: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| (i as f64 * 0.1, *v)).collect();
        let b: Vec<(f64, f64)> = a.iter().map(|(f, v)| (*f, v * c)).collect();
        prop_assert_eq!(compare_curves(&a, &a, CompareMetric::MaxRatioDb).unwrap(), 0.0);
        let db = compare_curves(&a, &b, CompareMetric::MaxRatioDb).unwrap();
        prop_assert!((db - 10.0 * c.log10()).abs() < 1e-9);
    }
}

#[test]
fn fisher_of_scenario_matches_oracle_on_siso() {
    let array = ArrayGeometry::single(LAMBDA).unwrap();
    let paths = common::random_paths(2, 31, T);
    let pulse = TrainingPulse::covering(0.5, T, 3, paths.max_delay()).unwrap();
    let fim = build_fisher(&paths, &array, &pulse, 0.2).unwrap();
    let oracle = common::fisher_fd(&paths, &array, &pulse, 0.2);
    assert!(common::scaled_max_error(&fim.matrix, &oracle) < 1e-4);
}
