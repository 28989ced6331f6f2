//! Configured experiment: build a config in code, round-trip it through
//! TOML, run it, write the curves, and compare two of them.
//!
//! Run: `cargo run --release --example experiments -- [out_dir]`

use std::path::PathBuf;

use extrapolate::experiment::{
    compare_files, preset, run_experiment, ArraySpec, CompareMetric, EstimatorKind, ExperimentConfig, FreqGrid,
};
use extrapolate::pathset_io::ScenarioSpec;
use extrapolate::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));

    let mut config = ExperimentConfig::new(
        "m8_100mhz",
        ScenarioSpec::bundled("fig2", 2019),
        ArraySpec::Planar { rows: 2, cols: 4 },
        100e6,
    );
    config.freq_grid = FreqGrid {
        start: 0.0,
        stop: 2.0,
        step: 0.25,
    };
    config.estimators = vec![EstimatorKind::Ls];
    config.trials = 100;
    config.seed = 5;
    println!("config as TOML:\n{}", config.to_toml());
    let config = ExperimentConfig::from_toml(&config.to_toml())?;

    let output = run_experiment(&config)?;
    let m = &output.manifest;
    println!(
        "{} paths, {} antennas, window {} symbols, condition number {:.3e}, {:.2} s",
        m.paths,
        m.antennas,
        m.window_symbols,
        m.condition_number.unwrap_or(f64::NAN),
        m.wall_time_s
    );
    for file in output.write(&out)? {
        println!("wrote {}", file.display());
    }
    let gap = compare_files(
        out.join("m8_100mhz_lb_full.csv"),
        out.join("m8_100mhz_lb_simplified.csv"),
        CompareMetric::MaxRatioDb,
    )?;
    println!("full vs simplified bound: max {gap:.2} dB apart");

    let fig6 = preset("fig6")?;
    println!("preset fig6 expands to {} runs", fig6.len());
    Ok(())
}
