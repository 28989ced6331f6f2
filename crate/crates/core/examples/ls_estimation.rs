//! Low-resolution least-squares channel estimate and its analytic MSE.
//!
//! Run: `cargo run --example ls_estimation`

use extrapolate::channel::{channel_frequency_response, ArrayGeometry, PathParams, PathSet};
use extrapolate::estimators::{band_edge, ls_estimate, ls_mse_analytic};
use extrapolate::signal::{pulse_energy, synthesize_received, TrainingPulse};
use extrapolate::{Complex64, Result};

fn main() -> Result<()> {
    let period = 1.0 / 20e6;
    let array = ArrayGeometry::rectangular(2, 2, ArrayGeometry::wavelength_for(3.5e9))?;
    let paths = PathSet::new(vec![
        PathParams::new(Complex64::from_polar(0.6, 0.4), 2.0 * period, 0.5, 1.3)?,
        PathParams::new(Complex64::from_polar(0.4, 2.0), 9.0 * period, 1.9, 1.6)?,
    ])?;
    let pulse = TrainingPulse::covering(0.2, period, 2, paths.max_delay())?;
    let noise_var = pulse_energy(&pulse) / 100.0;
    let block = synthesize_received(&paths, &array, &pulse, noise_var, 1)?;

    let freqs: Vec<f64> = [0.0, 0.2, 0.4, 0.55, 0.8].iter().map(|x| x / period).collect();
    let est = ls_estimate(&block, &pulse, &freqs);
    println!("band edge f*T = {:.2}", band_edge(&pulse) * period);
    println!("f*T   in-band  |err_0|^2    analytic MSE");
    for (j, &f) in freqs.iter().enumerate() {
        let truth = channel_frequency_response(&paths, &array, f);
        let err = if est.in_band[j] {
            (est.h_hat[(0, j)] - truth[0]).norm_sqr()
        } else {
            f64::INFINITY
        };
        println!(
            "{:.2}  {:7}  {err:.3e}    {:.3e}",
            f * period,
            est.in_band[j],
            ls_mse_analytic(&pulse, noise_var, f)
        );
    }
    Ok(())
}
