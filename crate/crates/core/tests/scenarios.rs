use std::fs;

use extrapolate::bounds::{full_lb, full_lb_with, separation_report, BoundOptions};
use extrapolate::channel::{ArrayGeometry, PathParams, PathSet};
use extrapolate::experiment::{
    compare_curves, compare_files, run_experiment, ArraySpec, BoundKind, CompareMetric, EstimatorKind,
    ExperimentConfig, FreqGrid, Setup,
};
use extrapolate::pathset_io::{
    load_pathset, synthesize_scenario, PhasePolicy, RecipeParams, ScenarioSource, ScenarioSpec,
};
use extrapolate::signal::{pulse_energy, TrainingPulse};
use extrapolate::{Complex64, Error};

const T: f64 = 50e-9;

fn write_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn fig2_config(name: &str, array: ArraySpec, bandwidth_hz: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, ScenarioSpec::bundled("fig2", 2019), array, bandwidth_hz);
    c.allow_ill_conditioned = true;
    c
}

fn gap_db(config: &ExperimentConfig, f_norm: f64) -> f64 {
    let setup = Setup::new(config).unwrap();
    let options = BoundOptions {
        allow_ill_conditioned: true,
        ..BoundOptions::default()
    };
    let curve = full_lb_with(
        &setup.paths,
        &setup.array,
        &setup.pulse,
        setup.noise_var,
        &[f_norm / config.period()],
        &options,
    )
    .unwrap();
    10.0 * (curve.lb_full[0] / curve.lb_simplified[0]).log10()
}

#[test]
fn bundled_fig2_second_row_pairs_by_index() {
    let paths = load_pathset(&ScenarioSpec::bundled("fig2", 2019)).unwrap();
    assert_eq!(paths.len(), 21);
    let p = paths.paths()[1];
    assert!((p.alpha.norm() / 0.0720925269986881 - 1.0).abs() < 1e-12);
    assert_eq!(p.tau, 2.06865350890985e-7);
    assert_eq!(p.phi, 0.657528011581673);
    assert_eq!(p.theta, 2.1978940911635);
    // The near-zero first ray is kept.
    assert!(paths.paths()[0].alpha.norm() < 1e-9);
    assert!((paths.total_gain() - 1.0).abs() < 1e-12);
}

#[test]
fn one_row_file_is_a_unit_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_csv(&dir, "one.csv", "gain,delay_s,azimuth_rad,elevation_rad\n1,0,0.3,1.2\n");
    let paths = load_pathset(&ScenarioSpec::file(&file, 4)).unwrap();
    assert_eq!(paths.len(), 1);
    assert!((paths.paths()[0].alpha.norm() - 1.0).abs() < 1e-15);
    assert_eq!(paths.paths()[0].tau, 0.0);
}

#[test]
fn seeded_phases_repeat() {
    let mut spec = ScenarioSpec::bundled("fig2", 77);
    spec.phase_policy = PhasePolicy::SeededUniform;
    let a = load_pathset(&spec).unwrap();
    let b = load_pathset(&spec).unwrap();
    assert_eq!(a, b);
    spec.seed = 78;
    let c = load_pathset(&spec).unwrap();
    assert_ne!(a.paths()[3].alpha, c.paths()[3].alpha);
}

#[test]
fn malformed_row_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_csv(
        &dir,
        "bad.csv",
        "gain,delay_s,azimuth_rad,elevation_rad\n0.5,0,0.1,1\n0.5,oops,0.2,1\n",
    );
    match load_pathset(&ScenarioSpec::file(&file, 0)) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn negative_gain_or_delay_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, row) in [("g.csv", "-0.5,0,0.1,1"), ("d.csv", "0.5,-1e-8,0.1,1")] {
        let file = write_csv(&dir, name, &format!("gain,delay_s,azimuth_rad,elevation_rad\n{row}\n"));
        let err = load_pathset(&ScenarioSpec::file(&file, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidPath(_)), "{err}");
        assert!(err.to_string().contains("row 1"), "{err}");
    }
}

#[test]
fn recipes_follow_their_description() {
    let params = RecipeParams {
        period: T,
        center: 7.0 * T,
    };
    let single = synthesize_scenario(&"single-path".parse().unwrap(), &params).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single.paths()[0].alpha, Complex64::new(1.0, 0.0));
    assert_eq!(single.paths()[0].tau, 7.0 * T);

    let two = synthesize_scenario(&"two-path-delay-separated(100)".parse().unwrap(), &params).unwrap();
    assert!((two.paths()[1].tau - two.paths()[0].tau - 100.0 * T).abs() < 1e-18);

    let grid = synthesize_scenario(&"grid(4,5,0.5)".parse().unwrap(), &params).unwrap();
    let delays: Vec<f64> = grid.iter().map(|p| p.tau / T).collect();
    for (d, e) in delays.iter().zip([0.0, 5.0, 10.0, 15.0]) {
        assert!((d - e).abs() < 1e-12);
    }
    assert!("three-paths".parse::<extrapolate::pathset_io::Recipe>().is_err());
}

#[test]
fn delay_separated_paths_are_nearly_orthogonal() {
    let params = RecipeParams { period: T, center: 0.0 };
    let paths = synthesize_scenario(&"two-path-delay-separated(100)".parse().unwrap(), &params).unwrap();
    let array = ArrayGeometry::single(0.1).unwrap();
    let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
    let report = separation_report(&paths, &array, &pulse).unwrap();
    assert!(
        report.pairs[0].delay.iter().all(|&x| x < 1e-3),
        "{:?}",
        report.pairs[0].delay
    );
}

#[test]
fn centred_array_is_symmetric_for_one_path() {
    let paths = PathSet::new(vec![
        PathParams::new(Complex64::new(1.0, 0.0), 3.0 * T, 0.9, 1.1).unwrap()
    ])
    .unwrap();
    let array = ArrayGeometry::rectangular(4, 8, 0.1).unwrap();
    let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
    let report = separation_report(&paths, &array, &pulse).unwrap();
    assert_eq!(report.max_cross_term, 0.0);
    let s = report.symmetry[0];
    assert!(s.phi < 1e-10 && s.theta < 1e-10, "{s:?}");
}

#[test]
fn fig2_siso_at_20_mhz_is_not_separated() {
    let setup = Setup::new(&fig2_config("f", ArraySpec::Siso, 20e6)).unwrap();
    let report = separation_report(&setup.paths, &setup.array, &setup.pulse).unwrap();
    assert!(report.max_cross_term > 0.5, "{}", report.max_cross_term);
}

#[test]
fn duplicated_path_is_flagged_singular() {
    let p = PathParams::new(Complex64::new(0.5, 0.1), 4.0 * T, 0.4, 1.2).unwrap();
    let paths = PathSet::from_raw(vec![p, p]).unwrap();
    let array = ArrayGeometry::rectangular(2, 4, 0.1).unwrap();
    let pulse = TrainingPulse::covering(0.2, T, 2, paths.max_delay()).unwrap();
    let err = full_lb(&paths, &array, &pulse, pulse_energy(&pulse) / 100.0, &[0.0]).unwrap_err();
    assert!(matches!(err, Error::SingularFisher { .. }), "{err}");
    let report = separation_report(&paths, &array, &pulse).unwrap();
    assert!(report.fisher_condition_number > 1e12);
    assert!((report.max_cross_term - 1.0).abs() < 1e-12);
}

#[test]
fn arrays_beat_ls_at_dc() {
    let mut at_dc = Vec::new();
    for (name, array) in [
        ("m8", ArraySpec::Planar { rows: 2, cols: 4 }),
        ("m32", ArraySpec::Planar { rows: 4, cols: 8 }),
    ] {
        let mut c = fig2_config(name, array, 20e6);
        c.freq_grid = FreqGrid {
            start: 0.0,
            stop: 0.0,
            step: 0.1,
        };
        c.estimators = vec![EstimatorKind::Ls];
        c.trials = 50;
        c.seed = 3;
        let out = run_experiment(&c).unwrap();
        let lb = out.curve("lb_full").unwrap().values[0];
        let ls = out.curve("mse_ls").unwrap().values[0];
        let ls_analytic = out.curve("ls_analytic").unwrap().values[0];
        assert!(lb < ls && lb < ls_analytic, "{name}: {lb} vs {ls} / {ls_analytic}");
        at_dc.push(lb);
    }
    assert!(at_dc[1] < at_dc[0], "{at_dc:?}");
}

#[test]
fn siso_gap_shrinks_with_bandwidth() {
    let gaps: Vec<f64> = [20e6, 100e6, 400e6, 800e6]
        .iter()
        .map(|&bw| gap_db(&fig2_config("bw", ArraySpec::Siso, bw), 1.0).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 3.0, "{gaps:?}");
}

#[test]
fn bound_only_run_skips_monte_carlo() {
    let source = ScenarioSource::Synthetic {
        recipe: "single-path".into(),
        period: T,
        center: 0.0,
    };
    let mut c = ExperimentConfig::new("b", ScenarioSpec::from_source(source, 0), ArraySpec::Siso, 1.0 / T);
    c.bounds = vec![BoundKind::Simplified];
    let out = run_experiment(&c).unwrap();
    assert_eq!(out.manifest.trials, 0);
    assert_eq!(out.curves.len(), 1);
    assert_eq!(out.curves[0].kind, "lb_simplified");
    assert!(out.curves[0].values.iter().all(|v| v.is_finite()));
}

#[test]
fn compare_reports_expected_discrepancies() {
    let source = ScenarioSource::Synthetic {
        recipe: "single-path".into(),
        period: T,
        center: 0.0,
    };
    let c = ExperimentConfig::new("single", ScenarioSpec::from_source(source, 0), ArraySpec::Siso, 1.0 / T);
    let out = run_experiment(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    let full = dir.path().join("single_lb_full.csv");
    let simplified = dir.path().join("single_lb_simplified.csv");

    assert_eq!(compare_files(&full, &full, CompareMetric::MaxRatioDb).unwrap(), 0.0);
    assert_eq!(compare_files(&full, &full, CompareMetric::Rmse).unwrap(), 0.0);
    let ratio = compare_files(&full, &simplified, CompareMetric::MaxRatioDb).unwrap();
    assert!(ratio < 0.05, "{ratio}");

    let a: Vec<(f64, f64)> = out.curves[0]
        .f_norm
        .iter()
        .copied()
        .zip(out.curves[0].values.iter().copied())
        .collect();
    let doubled: Vec<(f64, f64)> = a.iter().map(|&(f, v)| (f, 2.0 * v)).collect();
    let db = compare_curves(&a, &doubled, CompareMetric::MaxRatioDb).unwrap();
    assert!((db - 3.0103).abs() < 1e-4, "{db}");
    let shifted: Vec<(f64, f64)> = a.iter().map(|&(f, v)| (f + 0.05, v)).collect();
    assert!(matches!(
        compare_curves(&a, &shifted, CompareMetric::Rmse),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn shipped_example_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.toml");
    let config = ExperimentConfig::load(path).unwrap();
    assert_eq!(config.array, ArraySpec::Planar { rows: 4, cols: 8 });
    assert_eq!(config.estimators, vec![EstimatorKind::Ls, EstimatorKind::Sage]);
    assert_eq!(config.freq_grid.points().len(), 11);
    Setup::new(&config).unwrap();
}
