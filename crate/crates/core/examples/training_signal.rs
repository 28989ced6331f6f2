//! Root-raised-cosine training pulse, its RMS bandwidth, and a noisy
//! received block written as a debug CSV.
//!
//! Run: `cargo run --example training_signal -- [out.csv]`

use extrapolate::channel::{ArrayGeometry, PathParams, PathSet};
use extrapolate::signal::{
    mean_squared_bandwidth, mean_squared_bandwidth_spectral, pulse_energy, pulse_spectrum, synthesize_received,
    TrainingPulse,
};
use extrapolate::{Complex64, Result};

fn main() -> Result<()> {
    let period = 1.0 / 20e6;
    let paths = PathSet::new(vec![PathParams::new(Complex64::new(1.0, 0.0), 3.0 * period, 0.0, 1.2)?])?;
    let pulse = TrainingPulse::covering(0.2, period, 2, paths.max_delay())?;

    println!(
        "window: {} samples ({} symbols), starts at {:.2} T",
        pulse.len(),
        pulse.window_symbols(),
        pulse.time_origin() / period
    );
    println!("energy ||s||^2 = {:.6e}", pulse_energy(&pulse));
    println!(
        "sigma_F * T = {:.5} (time domain), {:.5} (spectrum)",
        mean_squared_bandwidth(&pulse) * period,
        mean_squared_bandwidth_spectral(&pulse) * period
    );
    for x in [0.0, 0.3, 0.5, 0.6, 0.7] {
        let s = pulse_spectrum(&pulse, x / period).norm_sqr() / (pulse_energy(&pulse) * pulse.oversampling() as f64);
        println!("|S(f)|^2 / (K ||s||^2) at f*T = {x}: {s:.3e}");
    }

    let array = ArrayGeometry::single(ArrayGeometry::wavelength_for(3.5e9))?;
    let block = synthesize_received(&paths, &array, &pulse, pulse_energy(&pulse) / 100.0, 7)?;
    let out = std::env::args().nth(1).unwrap_or_else(|| "received_block.csv".into());
    block.write_debug_csv(&out)?;
    println!("received block energy {:.4e}, written to {out}", block.energy());
    Ok(())
}
