//! SAGE path extraction from one noisy block, followed by extrapolation of
//! the estimated paths outside the training band.
//!
//! Run: `cargo run --release --example sage_extraction -- [out_dir]`

use std::path::PathBuf;

use extrapolate::channel::{channel_frequency_response, ArrayGeometry, PathParams, PathSet};
use extrapolate::estimators::{extrapolate, sage_extract, SageConfig};
use extrapolate::signal::{pulse_energy, synthesize_received, TrainingPulse};
use extrapolate::{Complex64, Error, Result};

fn main() -> Result<()> {
    let period = 1.0 / 20e6;
    let array = ArrayGeometry::rectangular(4, 8, ArrayGeometry::wavelength_for(3.5e9))?;
    let paths = PathSet::new(vec![
        PathParams::new(Complex64::from_polar(0.5, 0.2), 2.0 * period, 0.7, 1.3)?,
        PathParams::new(Complex64::from_polar(0.3, -1.0), 7.0 * period, 1.2, 1.3)?,
        PathParams::new(Complex64::from_polar(0.2, 2.5), 12.0 * period, 1.7, 1.3)?,
    ])?;
    let pulse = TrainingPulse::covering(0.2, period, 2, paths.max_delay())?;
    let noise_var = pulse_energy(&pulse) / 100.0;
    let block = synthesize_received(&paths, &array, &pulse, noise_var, 42)?;

    let config = SageConfig::for_setup(paths.len(), &array, &pulse);
    let result = sage_extract(&block, &array, &pulse, &config)?;
    println!(
        "{} sweeps, converged {}, residual {:.4e}",
        result.iterations_used, result.converged, result.residual_energy
    );
    for (truth, est) in paths.iter().zip(result.paths.iter()) {
        println!(
            "tau {:7.3} T -> {:7.3} T   phi {:.4} -> {:.4}   |alpha| {:.4} -> {:.4}",
            truth.tau / period,
            est.tau / period,
            truth.phi,
            est.phi,
            truth.alpha.norm(),
            est.alpha.norm()
        );
    }

    println!("\nf*T  extrapolation error (antenna mean)");
    for x in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let f = x / period;
        let h = channel_frequency_response(&paths, &array, f);
        let h_hat = extrapolate(&result.paths, &array, f);
        let mse = h.iter().zip(&h_hat).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / array.len() as f64;
        println!("{x:.1}  {mse:.3e}");
    }

    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    result.write(dir.join("sage_paths.csv"), dir.join("sage_paths.json"))?;
    println!("estimates written to {}", dir.join("sage_paths.csv").display());
    Ok(())
}
