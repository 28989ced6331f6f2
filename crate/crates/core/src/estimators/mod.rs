//! Channel estimators and extrapolation from estimated path parameters.

mod ls;
mod mse;
mod sage;

pub use ls::{band_edge, ls_estimate, ls_mse_analytic, LsEstimate, DEFAULT_SPECTRUM_FLOOR};
pub use mse::{empirical_mse, Estimator, MseCurve};
pub use sage::{sage_extract, EstimationResult, SageConfig, MAX_SAGE_PATHS, SISO_PHI, SISO_THETA};

use num_complex::Complex64;

use crate::channel::{channel_frequency_response, ArrayGeometry, PathSet};

/// Channel at baseband offset `f` predicted from estimated paths.
pub fn extrapolate(paths_hat: &PathSet, array: &ArrayGeometry, f: f64) -> Vec<Complex64> {
    channel_frequency_response(paths_hat, array, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathParams;

    #[test]
    fn delay_error_gives_closed_form_error() {
        let array = ArrayGeometry::single(0.1).unwrap();
        let truth = PathSet::new(vec![PathParams::new(Complex64::new(1.0, 0.0), 1e-7, 0.0, 1.0).unwrap()]).unwrap();
        let dt = 3e-10;
        let est = PathSet::new(vec![
            PathParams::new(Complex64::new(1.0, 0.0), 1e-7 + dt, 0.0, 1.0).unwrap()
        ])
        .unwrap();
        for f in [0.0, 1e6, 2.5e7, 4e8] {
            let err = (extrapolate(&est, &array, f)[0] - channel_frequency_response(&truth, &array, f)[0]).norm_sqr();
            let expected = 4.0 * (std::f64::consts::PI * f * dt).sin().powi(2);
            assert!((err - expected).abs() < 1e-12, "{err} vs {expected}");
        }
    }

    #[test]
    fn gain_error_only_at_dc() {
        let array = ArrayGeometry::single(0.1).unwrap();
        let a = Complex64::new(0.3, -0.2);
        let b = Complex64::new(0.25, -0.1);
        let truth = PathSet::new(vec![PathParams::new(a, 2e-8, 0.0, 1.0).unwrap()]).unwrap();
        let est = PathSet::new(vec![PathParams::new(b, 2e-8, 0.0, 1.0).unwrap()]).unwrap();
        let err = (extrapolate(&est, &array, 0.0)[0] - extrapolate(&truth, &array, 0.0)[0]).norm_sqr();
        assert!((err - (b - a).norm_sqr()).abs() < 1e-15);
    }
}
