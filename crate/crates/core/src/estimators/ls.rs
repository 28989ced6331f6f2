use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::signal::{dtft_complex, pulse_energy, pulse_spectrum, ReceivedBlock, TrainingPulse};

/// Relative floor on `|S(f)|^2 / (||s||^2 K)` below which a frequency is
/// treated as outside the training band.
pub const DEFAULT_SPECTRUM_FLOOR: f64 = 1e-8;

/// Nominal occupied band edge `(1 + beta) / (2 T)`.
pub fn band_edge(pulse: &TrainingPulse) -> f64 {
    (1.0 + pulse.beta()) / (2.0 * pulse.period())
}

/// Per-antenna least-squares estimates `R_m(f) / S(f)`.
#[derive(Debug, Clone)]
pub struct LsEstimate {
    pub freqs: Vec<f64>,
    /// `M x F`; out-of-band columns hold infinities.
    pub h_hat: DMatrix<Complex64>,
    /// `false` where the pulse carries no energy.
    pub in_band: Vec<bool>,
}

// Window truncation leaks roughly 1e-7 of the energy just past the band
// edge, so the spectral floor alone does not flag it.
fn in_band(pulse: &TrainingPulse, f: f64, spectrum: Complex64, energy: f64) -> bool {
    f.abs() < band_edge(pulse) && spectrum.norm_sqr() > DEFAULT_SPECTRUM_FLOOR * energy * pulse.oversampling() as f64
}

pub fn ls_estimate(block: &ReceivedBlock, pulse: &TrainingPulse, freqs: &[f64]) -> LsEstimate {
    let m_count = block.antennas();
    let energy = pulse_energy(pulse);
    let mut h_hat = DMatrix::from_element(m_count, freqs.len(), Complex64::new(0.0, 0.0));
    let mut flags = Vec::with_capacity(freqs.len());
    let rows: Vec<Vec<Complex64>> = (0..m_count)
        .map(|m| block.samples.row(m).iter().copied().collect())
        .collect();
    for (j, &f) in freqs.iter().enumerate() {
        let s = pulse_spectrum(pulse, f);
        let ok = in_band(pulse, f, s, energy);
        flags.push(ok);
        for (m, row) in rows.iter().enumerate() {
            h_hat[(m, j)] = if ok {
                dtft_complex(pulse, row, f) / s
            } else {
                Complex64::new(f64::INFINITY, f64::INFINITY)
            };
        }
    }
    LsEstimate {
        freqs: freqs.to_vec(),
        h_hat,
        in_band: flags,
    }
}

/// `sigma_w^2 N / |S(f)|^2`, infinite outside the training band.
pub fn ls_mse_analytic(pulse: &TrainingPulse, noise_var: f64, f: f64) -> f64 {
    let s = pulse_spectrum(pulse, f);
    if !in_band(pulse, f, s, pulse_energy(pulse)) {
        return f64::INFINITY;
    }
    noise_var * pulse.len() as f64 / s.norm_sqr()
}
