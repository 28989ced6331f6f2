use std::fmt;

use rayon::prelude::*;

use super::ls::ls_estimate;
use super::sage::{sage_extract, SageConfig};
use crate::channel::{channel_frequency_response, ArrayGeometry, PathSet};
use crate::error::{Error, Result};
use crate::signal::{synthesize_received_with, trial_rng, SynthesisOptions, TrainingPulse};

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Ls,
    Sage(SageConfig),
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Ls => f.write_str("ls"),
            Estimator::Sage(_) => f.write_str("sage"),
        }
    }
}

/// Antenna-averaged Monte-Carlo MSE over a frequency grid.
#[derive(Debug, Clone)]
pub struct MseCurve {
    pub freqs: Vec<f64>,
    /// Infinite where the estimator cannot produce a value.
    pub mse: Vec<f64>,
    pub trials: usize,
    /// Trials whose SAGE run stopped on the tolerance (equals `trials` for LS).
    pub converged_trials: usize,
}

/// Runs `trials` noisy realizations and averages `|H_hat_m(f) - H_m(f)|^2`
/// over antennas and trials.
///
/// Trial `i` draws its noise from `trial_rng(seed, i)`, and the sum is
/// accumulated in trial order, so the result does not depend on the
/// thread count.
#[allow(clippy::too_many_arguments)]
pub fn empirical_mse(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
    freqs: &[f64],
    trials: usize,
    seed: u64,
    estimator: &Estimator,
) -> Result<MseCurve> {
    if trials == 0 {
        return Err(Error::InvalidEstimator("at least one trial is required".into()));
    }
    if let Estimator::Sage(cfg) = estimator {
        cfg.validate()?;
    }
    pulse.check_covers(paths, crate::signal::MIN_TAIL_SYMBOLS)?;
    let truth: Vec<Vec<_>> = freqs
        .iter()
        .map(|&f| channel_frequency_response(paths, array, f))
        .collect();

    let per_trial: Vec<(Vec<f64>, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, bool)> {
            let mut rng = trial_rng(seed, i as u64);
            let options = SynthesisOptions { min_tail_symbols: None };
            let block = synthesize_received_with(paths, array, pulse, noise_var, &mut rng, options)?;
            match estimator {
                Estimator::Ls => {
                    let est = ls_estimate(&block, pulse, freqs);
                    let errs = (0..freqs.len())
                        .map(|j| {
                            if !est.in_band[j] {
                                return f64::INFINITY;
                            }
                            truth[j]
                                .iter()
                                .enumerate()
                                .map(|(m, h)| (est.h_hat[(m, j)] - h).norm_sqr())
                                .sum()
                        })
                        .collect();
                    Ok((errs, true))
                }
                Estimator::Sage(cfg) => {
                    let result = sage_extract(&block, array, pulse, cfg)?;
                    let errs = freqs
                        .iter()
                        .zip(&truth)
                        .map(|(&f, h)| {
                            channel_frequency_response(&result.paths, array, f)
                                .iter()
                                .zip(h)
                                .map(|(a, b)| (a - b).norm_sqr())
                                .sum()
                        })
                        .collect();
                    Ok((errs, result.converged))
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; freqs.len()];
    let mut converged_trials = 0;
    for (errs, converged) in &per_trial {
        for (s, e) in sums.iter_mut().zip(errs) {
            *s += e;
        }
        converged_trials += usize::from(*converged);
    }
    let scale = 1.0 / (array.len() * trials) as f64;
    Ok(MseCurve {
        freqs: freqs.to_vec(),
        mse: sums.into_iter().map(|s| s * scale).collect(),
        trials,
        converged_trials,
    })
}
