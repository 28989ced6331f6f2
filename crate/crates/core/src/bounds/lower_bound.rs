use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::fisher::{build_fisher, g_vectors};
use crate::channel::{ArrayGeometry, PathSet};
use crate::error::{Error, Result};
use crate::linalg::{SpdSolver, DEFAULT_CONDITION_THRESHOLD};
use crate::signal::{mean_squared_bandwidth, pulse_energy, TrainingPulse};

/// Closed-form bound for well-separated paths received on `M` antennas:
/// `(1/SNR) (L/M) (2 + (f/sigma_F)^2 / 2)`.
pub fn simplified_lb_simo(paths: usize, antennas: usize, snr: f64, f: f64, sigma_f: f64) -> f64 {
    (paths as f64 / antennas as f64) / snr * (2.0 + 0.5 * (f / sigma_f).powi(2))
}

/// Closed-form single-antenna bound for delay-separated paths:
/// `(L/SNR) (1 + (f/sigma_F)^2 / 2)`.
pub fn simplified_lb_siso(paths: usize, snr: f64, f: f64, sigma_f: f64) -> f64 {
    paths as f64 / snr * (1.0 + 0.5 * (f / sigma_f).powi(2))
}

/// Options for [`full_lb_with`].
#[derive(Debug, Clone)]
pub struct BoundOptions {
    pub condition_threshold: f64,
    /// Use an eigenvalue-truncated pseudo-inverse instead of failing when
    /// the Fisher matrix is ill-conditioned.
    pub allow_ill_conditioned: bool,
    /// Replaces `||s||^2 / sigma_w^2` in the simplified bound.
    pub snr_override: Option<f64>,
    /// Keep the per-antenna bounds in the curve.
    pub per_antenna: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            allow_ill_conditioned: false,
            snr_override: None,
            per_antenna: false,
        }
    }
}

/// Full and simplified bounds over a frequency grid.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub freqs: Vec<f64>,
    /// Antenna-averaged full bound.
    pub lb_full: Vec<f64>,
    /// Closed-form bound for separated paths.
    pub lb_simplified: Vec<f64>,
    /// `M x F` per-antenna full bound, when requested.
    pub per_antenna: Option<DMatrix<f64>>,
    /// Symbol period used for the normalized frequency axis.
    pub period: f64,
    pub snr: f64,
    pub sigma_f: f64,
    pub condition_number: f64,
    /// Eigen-directions dropped by a pseudo-solve (0 for a regular solve).
    pub truncated_directions: usize,
}

impl BoundCurve {
    pub fn normalized_freqs(&self) -> Vec<f64> {
        self.freqs.iter().map(|f| f * self.period).collect()
    }

    /// Writes `f_hz,f_norm,lb_full,lb_simplified`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "f_hz,f_norm,lb_full,lb_simplified").map_err(io)?;
        for i in 0..self.freqs.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.freqs[i],
                self.freqs[i] * self.period,
                self.lb_full[i],
                self.lb_simplified[i]
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Full bound `LB(f) = (1/M) sum_m g_m^H I^-1 g_m` with default options.
pub fn full_lb(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
    freqs: &[f64],
) -> Result<BoundCurve> {
    full_lb_with(paths, array, pulse, noise_var, freqs, &BoundOptions::default())
}

pub fn full_lb_with(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
    freqs: &[f64],
    options: &BoundOptions,
) -> Result<BoundCurve> {
    let fim = build_fisher(paths, array, pulse, noise_var)?;
    let solver = if options.allow_ill_conditioned {
        SpdSolver::new_truncated(&fim.matrix, options.condition_threshold)?
    } else {
        SpdSolver::new(&fim.matrix, options.condition_threshold)?
    };

    let per_freq: Vec<Vec<f64>> = freqs
        .par_iter()
        .map(|&f| {
            g_vectors(paths, array, f)
                .iter()
                .map(|g| solver.quadratic_form(g).max(0.0))
                .collect()
        })
        .collect();

    let m = array.len();
    let lb_full = per_freq.iter().map(|v| v.iter().sum::<f64>() / m as f64).collect();

    let snr = options.snr_override.unwrap_or_else(|| pulse_energy(pulse) / noise_var);
    let sigma_f = mean_squared_bandwidth(pulse);
    let lb_simplified = freqs
        .iter()
        .map(|&f| simplified_for(paths.len(), array, snr, f, sigma_f))
        .collect();

    let per_antenna = options
        .per_antenna
        .then(|| DMatrix::from_fn(m, freqs.len(), |i, j| per_freq[j][i]));

    Ok(BoundCurve {
        freqs: freqs.to_vec(),
        lb_full,
        lb_simplified,
        per_antenna,
        period: pulse.period(),
        snr,
        sigma_f,
        condition_number: solver.condition_number(),
        truncated_directions: solver.truncated_directions(),
    })
}

/// Simplified bound matching the array: SISO form for one element.
pub fn simplified_for(paths: usize, array: &ArrayGeometry, snr: f64, f: f64, sigma_f: f64) -> f64 {
    if array.is_siso() {
        simplified_lb_siso(paths, snr, f, sigma_f)
    } else {
        simplified_lb_simo(paths, array.len(), snr, f, sigma_f)
    }
}
