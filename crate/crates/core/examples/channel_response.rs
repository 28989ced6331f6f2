//! Frequency response of a two-path channel on an 8-element planar array.
//!
//! Run: `cargo run --example channel_response`

use extrapolate::channel::{channel_frequency_response, steering_vector, ArrayGeometry, PathParams, PathSet};
use extrapolate::{Complex64, Result};

fn main() -> Result<()> {
    let array = ArrayGeometry::rectangular(2, 4, ArrayGeometry::wavelength_for(3.5e9))?;
    let paths = PathSet::new(vec![
        PathParams::new(Complex64::from_polar(0.7, 0.3), 120e-9, 0.6, 1.4)?,
        PathParams::new(Complex64::from_polar(0.3, -1.2), 410e-9, 2.1, 1.7)?,
    ])?;

    let a = steering_vector(&array, 0.6, 1.4);
    println!("steering vector of path 0 (|a_m| = 1):");
    for (m, am) in a.iter().enumerate() {
        println!("  m={m}: {:+.4} {:+.4}j", am.re, am.im);
    }

    println!("\nf_MHz  |H_0(f)|  |H_7(f)|");
    for f_mhz in [-20.0, -10.0, 0.0, 10.0, 20.0, 40.0] {
        let h = channel_frequency_response(&paths, &array, f_mhz * 1e6);
        println!("{f_mhz:6.1}  {:.4}    {:.4}", h[0].norm(), h[7].norm());
    }
    Ok(())
}
