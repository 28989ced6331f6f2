//! Monte-Carlo extrapolation MSE of LS and SAGE against the full lower
//! bound on three well-separated paths.
//!
//! Run: `cargo run --release --example monte_carlo_mse -- [trials]`

use extrapolate::bounds::full_lb;
use extrapolate::channel::{ArrayGeometry, PathParams, PathSet};
use extrapolate::estimators::{empirical_mse, Estimator, SageConfig};
use extrapolate::signal::{pulse_energy, TrainingPulse};
use extrapolate::{Complex64, Result};

fn main() -> Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let period = 1.0 / 20e6;
    let array = ArrayGeometry::rectangular(4, 8, ArrayGeometry::wavelength_for(3.5e9))?;
    let paths = PathSet::new(vec![
        PathParams::new(Complex64::from_polar(0.5, 0.2), 2.0 * period, 0.7, 1.3)?,
        PathParams::new(Complex64::from_polar(0.3, -1.0), 7.0 * period, 1.2, 1.3)?,
        PathParams::new(Complex64::from_polar(0.2, 2.5), 12.0 * period, 1.7, 1.3)?,
    ])?;
    let pulse = TrainingPulse::covering(0.2, period, 2, paths.max_delay())?;
    let noise_var = pulse_energy(&pulse) / 100.0;
    let freqs: Vec<f64> = (0..=6).map(|i| i as f64 * 0.25 / period).collect();

    let lb = full_lb(&paths, &array, &pulse, noise_var, &freqs)?;
    let ls = empirical_mse(&paths, &array, &pulse, noise_var, &freqs, trials, 1, &Estimator::Ls)?;
    let sage_config = SageConfig::for_setup(paths.len(), &array, &pulse);
    let sage = empirical_mse(
        &paths,
        &array,
        &pulse,
        noise_var,
        &freqs,
        trials,
        1,
        &Estimator::Sage(sage_config),
    )?;

    println!("{trials} trials; {} SAGE runs converged", sage.converged_trials);
    println!("f*T   full LB     LS          SAGE");
    for (j, f) in freqs.iter().enumerate() {
        println!(
            "{:.2}  {:.4e}  {:.4e}  {:.4e}",
            f * period,
            lb.lb_full[j],
            ls.mse[j],
            sage.mse[j]
        );
    }
    Ok(())
}
