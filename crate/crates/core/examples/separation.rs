//! Separation diagnostics: how far the bundled scenario is from the
//! well-separated regime, and merging of unresolvable paths.
//!
//! Run: `cargo run --example separation`

use extrapolate::bounds::{full_lb, separation_report};
use extrapolate::channel::{merge_close_paths, ArrayGeometry};
use extrapolate::pathset_io::{load_pathset, ScenarioSpec};
use extrapolate::signal::{pulse_energy, TrainingPulse};
use extrapolate::Result;

fn main() -> Result<()> {
    let paths = load_pathset(&ScenarioSpec::bundled("fig2", 2019))?;
    for (label, bandwidth, array) in [
        ("SISO 20 MHz", 20e6, ArrayGeometry::single(0.0857)?),
        ("SISO 800 MHz", 800e6, ArrayGeometry::single(0.0857)?),
        ("M=32 20 MHz", 20e6, ArrayGeometry::rectangular(4, 8, 0.0857)?),
    ] {
        let pulse = TrainingPulse::covering(0.2, 1.0 / bandwidth, 2, paths.max_delay())?;
        let report = separation_report(&paths, &array, &pulse)?;
        let worst = report
            .pairs
            .iter()
            .max_by(|a, b| a.residual().total_cmp(&b.residual()))
            .expect("21 paths give pairs");
        println!(
            "{label}: max cross term {:.3} (paths {} and {}), condition number {:.3e}",
            report.max_cross_term, worst.first, worst.second, report.fisher_condition_number
        );
    }

    // At 20 MHz a single antenna cannot tell rays a fraction of a symbol
    // apart; merging them restores an invertible Fisher matrix.
    let period = 1.0 / 20e6;
    let array = ArrayGeometry::single(0.0857)?;
    let merged = merge_close_paths(&paths, 0.5 * period, std::f64::consts::PI)?;
    println!("\nmerged {} paths into {}", paths.len(), merged.paths.len());
    let pulse = TrainingPulse::covering(0.2, period, 2, merged.paths.max_delay())?;
    let lb = full_lb(
        &merged.paths,
        &array,
        &pulse,
        pulse_energy(&pulse) / 100.0,
        &[0.0, period.recip()],
    )?;
    println!(
        "SISO bound after merging: {:.4e} at f*T=0, {:.4e} at f*T=1 (condition number {:.3e})",
        lb.lb_full[0], lb.lb_full[1], lb.condition_number
    );
    Ok(())
}
