//! Full and closed-form lower bounds on the extrapolation MSE for the
//! bundled 21-path scenario on a 32-element array.
//!
//! Run: `cargo run --release --example lower_bounds`

use extrapolate::bounds::{full_lb, simplified_lb_simo};
use extrapolate::channel::ArrayGeometry;
use extrapolate::pathset_io::{load_pathset, ScenarioSpec};
use extrapolate::signal::{mean_squared_bandwidth, pulse_energy, TrainingPulse};
use extrapolate::Result;

fn main() -> Result<()> {
    let period = 1.0 / 20e6;
    let paths = load_pathset(&ScenarioSpec::bundled("fig2", 2019))?;
    let array = ArrayGeometry::rectangular(4, 8, ArrayGeometry::wavelength_for(3.5e9))?;
    let pulse = TrainingPulse::covering(0.2, period, 2, paths.max_delay())?;
    let snr = 100.0;
    let noise_var = pulse_energy(&pulse) / snr;

    let freqs: Vec<f64> = (0..=6).map(|i| i as f64 * 0.5 / period).collect();
    let curve = full_lb(&paths, &array, &pulse, noise_var, &freqs)?;
    let sigma_f = mean_squared_bandwidth(&pulse);
    println!(
        "L = {}, M = {}, sigma_F T = {:.4}, Fisher condition number {:.3e}",
        paths.len(),
        array.len(),
        sigma_f * period,
        curve.condition_number
    );
    println!("f*T   full LB     simplified  gap dB");
    for (j, f) in freqs.iter().enumerate() {
        let closed = simplified_lb_simo(paths.len(), array.len(), snr, *f, sigma_f);
        println!(
            "{:.1}   {:.4e}  {:.4e}  {:+.2}",
            f * period,
            curve.lb_full[j],
            closed,
            10.0 * (curve.lb_full[j] / closed).log10()
        );
    }
    Ok(())
}
