use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{BoundKind, EstimatorKind, ExperimentConfig};
use crate::bounds::{full_lb_with, separation_report, simplified_for, BoundOptions};
use crate::channel::{merge_close_paths, ArrayGeometry, PathSet};
use crate::error::{Error, Result};
use crate::estimators::{empirical_mse, ls_mse_analytic, Estimator, SageConfig};
use crate::linalg::DEFAULT_CONDITION_THRESHOLD;
use crate::pathset_io::load_pathset;
use crate::signal::{mean_squared_bandwidth, pulse_energy, TrainingPulse, MIN_TAIL_SYMBOLS};

/// One emitted curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// `lb_full`, `lb_simplified`, `ls_analytic`, `mse_ls` or `mse_sage`.
    pub kind: String,
    pub f_norm: Vec<f64>,
    pub f_hz: Vec<f64>,
    /// Infinite values mark frequencies where the quantity does not exist.
    pub values: Vec<f64>,
}

impl Curve {
    /// CSV text with columns `f_norm,f_hz,value,kind`. Values use the
    /// shortest round-trip representation; infinities print as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_norm,f_hz,value,kind\n");
        for i in 0..self.values.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.f_norm[i], self.f_hz[i], self.values[i], self.kind
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    /// SHA-256 of the canonical TOML form of the configuration.
    pub config_hash: String,
    pub seed: u64,
    pub paths: usize,
    pub antennas: usize,
    pub window_samples: usize,
    pub window_symbols: f64,
    pub sigma_f_hz: f64,
    pub sigma_f_norm: f64,
    pub snr_db: f64,
    pub noise_var: f64,
    pub condition_number: Option<f64>,
    pub truncated_directions: Option<usize>,
    pub merged_groups: Option<usize>,
    pub sage_converged_trials: Option<usize>,
    pub trials: usize,
    pub curves: Vec<String>,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curves: Vec<Curve>,
    pub manifest: Manifest,
}

impl RunOutput {
    pub fn curve(&self, kind: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.kind == kind)
    }

    /// Writes `<name>_<kind>.csv` per curve and `<name>_manifest.json` into
    /// `dir`, returning the written paths.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for c in &self.curves {
            let path = dir.join(format!("{}_{}.csv", self.manifest.name, c.kind));
            std::fs::write(&path, c.to_csv()).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        let path = dir.join(format!("{}_manifest.json", self.manifest.name));
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}

/// Everything an experiment derives from its configuration before any
/// curve is computed.
#[derive(Debug, Clone)]
pub struct Setup {
    pub paths: PathSet,
    pub array: ArrayGeometry,
    pub pulse: TrainingPulse,
    pub noise_var: f64,
    pub merged_groups: Option<usize>,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let period = config.period();
        let mut paths = load_pathset(&config.scenario)?;
        let mut merged_groups = None;
        if let Some(m) = config.merge {
            let outcome = merge_close_paths(&paths, m.delay_symbols * period, m.angle_rad)?;
            merged_groups = Some(outcome.groups.len());
            paths = outcome.paths;
        }
        let array = config.array.build(config.carrier_hz)?;
        let pulse = match config.window_symbols {
            Some(symbols) => {
                TrainingPulse::new(config.beta, period, config.oversampling, symbols * config.oversampling)?
            }
            None => TrainingPulse::covering(config.beta, period, config.oversampling, paths.max_delay())?,
        };
        pulse.check_covers(&paths, MIN_TAIL_SYMBOLS)?;
        let noise_var = pulse_energy(&pulse) / 10f64.powf(config.snr_db / 10.0);
        Ok(Self {
            paths,
            array,
            pulse,
            noise_var,
            merged_groups,
        })
    }

    pub fn sage_config(&self, config: &ExperimentConfig) -> SageConfig {
        let mut sage = SageConfig::for_setup(self.paths.len(), &self.array, &self.pulse);
        let o = &config.sage;
        if let Some(v) = o.max_iterations {
            sage.max_iterations = v;
        }
        if let Some(v) = o.refine_steps {
            sage.refine_steps = v;
        }
        if let Some(v) = o.tol {
            sage.tol = v;
        }
        if let Some(v) = o.delay_step_samples {
            sage.delay_step = v * self.pulse.sample_period();
        }
        if let Some(v) = o.angle_step_rad {
            sage.angle_step = v;
        }
        sage
    }
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let digest = Sha256::digest(config.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Computes the requested curves.
///
/// A Fisher matrix above the condition threshold aborts the run with
/// [`Error::Unresolvable`] carrying the separation report, unless the
/// configuration allows a pseudo-inverse or merges close paths first.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let setup = Setup::new(config)?;
    let Setup {
        paths,
        array,
        pulse,
        noise_var,
        merged_groups,
    } = &setup;
    let period = config.period();
    let f_norm = config.freq_grid.points();
    let f_hz: Vec<f64> = f_norm.iter().map(|x| x / period).collect();
    let curve = |kind: &str, values: Vec<f64>| Curve {
        kind: kind.to_string(),
        f_norm: f_norm.clone(),
        f_hz: f_hz.clone(),
        values,
    };

    let snr = pulse_energy(pulse) / noise_var;
    let sigma_f = mean_squared_bandwidth(pulse);
    let mut curves = Vec::new();
    let mut condition_number = None;
    let mut truncated_directions = None;

    if config.bounds.contains(&BoundKind::Full) {
        let options = BoundOptions {
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            allow_ill_conditioned: config.allow_ill_conditioned,
            ..BoundOptions::default()
        };
        let bound = match full_lb_with(paths, array, pulse, *noise_var, &f_hz, &options) {
            Ok(b) => b,
            Err(e @ Error::SingularFisher { .. }) => {
                let report = separation_report(paths, array, pulse)?;
                return Err(Error::Unresolvable {
                    source: Box::new(e),
                    report: Box::new(report),
                });
            }
            Err(e) => return Err(e),
        };
        condition_number = Some(bound.condition_number);
        truncated_directions = Some(bound.truncated_directions);
        curves.push(curve("lb_full", bound.lb_full));
    }
    if config.bounds.contains(&BoundKind::Simplified) {
        let values = f_hz
            .iter()
            .map(|&f| simplified_for(paths.len(), array, snr, f, sigma_f))
            .collect();
        curves.push(curve("lb_simplified", values));
    }

    let mut sage_converged_trials = None;
    let mut estimators = config.estimators.clone();
    estimators.sort();
    estimators.dedup();
    for kind in estimators {
        match kind {
            EstimatorKind::Ls => {
                let analytic = f_hz.iter().map(|&f| ls_mse_analytic(pulse, *noise_var, f)).collect();
                curves.push(curve("ls_analytic", analytic));
                let mse = empirical_mse(
                    paths,
                    array,
                    pulse,
                    *noise_var,
                    &f_hz,
                    config.trials,
                    config.seed,
                    &Estimator::Ls,
                )?;
                curves.push(curve("mse_ls", mse.mse));
            }
            EstimatorKind::Sage => {
                let estimator = Estimator::Sage(setup.sage_config(config));
                let mse = empirical_mse(
                    paths,
                    array,
                    pulse,
                    *noise_var,
                    &f_hz,
                    config.trials,
                    config.seed,
                    &estimator,
                )?;
                sage_converged_trials = Some(mse.converged_trials);
                curves.push(curve("mse_sage", mse.mse));
            }
        }
    }

    if let Some(c) = curves.iter().find(|c| c.values.iter().any(|v| v.is_nan())) {
        return Err(Error::Config(format!("curve {} produced NaN", c.kind)));
    }

    let manifest = Manifest {
        name: config.name.clone(),
        config_hash: config_hash(config),
        seed: config.seed,
        paths: paths.len(),
        antennas: array.len(),
        window_samples: pulse.len(),
        window_symbols: pulse.window_symbols(),
        sigma_f_hz: sigma_f,
        sigma_f_norm: sigma_f * period,
        snr_db: config.snr_db,
        noise_var: *noise_var,
        condition_number,
        truncated_directions,
        merged_groups: *merged_groups,
        sage_converged_trials,
        trials: if config.estimators.is_empty() { 0 } else { config.trials },
        curves: curves.iter().map(|c| c.kind.clone()).collect(),
        wall_time_s: started.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    Ok(RunOutput { curves, manifest })
}
