use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, DEFAULT_CARRIER_HZ};
use crate::error::{Error, Result};
use crate::pathset_io::ScenarioSpec;

/// Receive array layout. Planar arrays are `rows` vertical by `cols`
/// horizontal elements at half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArraySpec {
    Siso,
    Planar { rows: usize, cols: usize },
}

impl ArraySpec {
    pub fn build(&self, carrier_hz: f64) -> Result<ArrayGeometry> {
        let wavelength = ArrayGeometry::wavelength_for(carrier_hz);
        match *self {
            ArraySpec::Siso => ArrayGeometry::single(wavelength),
            ArraySpec::Planar { rows, cols } => ArrayGeometry::rectangular(rows, cols, wavelength),
        }
    }

    pub fn elements(&self) -> usize {
        match *self {
            ArraySpec::Siso => 1,
            ArraySpec::Planar { rows, cols } => rows * cols,
        }
    }
}

/// Frequencies `start, start + step, ..., <= stop` in units of `1/T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl FreqGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        let finite = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !finite || self.step <= 0.0 || self.stop < self.start {
            return Err(Error::Config(format!(
                "empty frequency grid start={} stop={} step={}",
                self.start, self.stop, self.step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Ls,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Full,
    Simplified,
}

/// Tolerances for merging paths before anything else runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSpec {
    /// Delay tolerance in symbol periods.
    pub delay_symbols: f64,
    /// Azimuth and elevation tolerance (radians).
    pub angle_rad: f64,
}

/// Overrides of the SAGE defaults; unset fields keep the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SageOverrides {
    pub max_iterations: Option<usize>,
    pub refine_steps: Option<usize>,
    pub tol: Option<f64>,
    /// Delay grid step in samples.
    pub delay_step_samples: Option<f64>,
    pub angle_step_rad: Option<f64>,
}

/// One experiment. SNR is `||s||^2 / sigma_w^2` in dB, the training energy
/// over the per-sample noise variance; the default of 20 dB is a choice of
/// this crate, not a measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: ScenarioSpec,
    pub array: ArraySpec,
    /// Symbol rate `1/T` (Hz).
    pub bandwidth_hz: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Samples per symbol.
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
    /// Observation window in symbols; derived from the delay spread when unset.
    #[serde(default)]
    pub window_symbols: Option<usize>,
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    pub freq_grid: FreqGrid,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_bounds")]
    pub bounds: Vec<BoundKind>,
    /// Replace the inverse of an ill-conditioned Fisher matrix by an
    /// eigenvalue-truncated pseudo-inverse instead of aborting.
    #[serde(default)]
    pub allow_ill_conditioned: bool,
    #[serde(default)]
    pub merge: Option<MergeSpec>,
    #[serde(default)]
    pub sage: SageOverrides,
}

fn default_beta() -> f64 {
    0.2
}

fn default_oversampling() -> usize {
    2
}

fn default_snr_db() -> f64 {
    20.0
}

fn default_carrier() -> f64 {
    DEFAULT_CARRIER_HZ
}

fn default_bounds() -> Vec<BoundKind> {
    vec![BoundKind::Full, BoundKind::Simplified]
}

impl ExperimentConfig {
    /// Single-path SISO bound-only configuration; a starting point for
    /// programmatic configs.
    pub fn new(name: &str, scenario: ScenarioSpec, array: ArraySpec, bandwidth_hz: f64) -> Self {
        Self {
            name: name.to_string(),
            scenario,
            array,
            bandwidth_hz,
            beta: default_beta(),
            oversampling: default_oversampling(),
            window_symbols: None,
            snr_db: default_snr_db(),
            carrier_hz: default_carrier(),
            freq_grid: FreqGrid {
                start: 0.0,
                stop: 3.0,
                step: 0.1,
            },
            trials: 0,
            seed: 0,
            estimators: Vec::new(),
            bounds: default_bounds(),
            allow_ill_conditioned: false,
            merge: None,
            sage: SageOverrides::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name `{}` must be a non-empty file stem", self.name));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return bad(format!("bandwidth_hz {} must be positive", self.bandwidth_hz));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return bad(format!("carrier_hz {} must be positive", self.carrier_hz));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta {} outside [0, 1]", self.beta));
        }
        if self.oversampling == 0 {
            return bad("oversampling must be >= 1".into());
        }
        if let ArraySpec::Planar { rows, cols } = self.array {
            if rows == 0 || cols == 0 {
                return bad("planar array needs rows, cols >= 1".into());
            }
        }
        self.freq_grid.validate()?;
        if !self.estimators.is_empty() && self.trials == 0 {
            return bad("estimators requested with trials = 0".into());
        }
        if let Some(m) = self.merge {
            if !(m.delay_symbols >= 0.0 && m.angle_rad >= 0.0) {
                return bad("merge tolerances must be >= 0".into());
            }
        }
        Ok(())
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 4] = ["fig3", "fig4", "fig5", "fig6"];

fn fig2_config(name: &str, array: ArraySpec, bandwidth_hz: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, ScenarioSpec::bundled("fig2", 2019), array, bandwidth_hz);
    c.freq_grid = FreqGrid {
        start: 0.0,
        stop: 3.0,
        step: 0.1,
    };
    c.seed = 1;
    // Closely spaced rays of the bundled scenario leave some directions of
    // the Fisher matrix unidentifiable at low resolution.
    c.allow_ill_conditioned = true;
    c
}

fn planar(rows: usize, cols: usize) -> ArraySpec {
    ArraySpec::Planar { rows, cols }
}

/// Bundled sweeps on the `fig2` scenario at desk-scale trial counts:
///
/// - `fig3`: SISO, 8 and 32 antennas at 20 MHz with LS and SAGE.
/// - `fig4`: SISO bounds at 20, 100, 400 and 800 MHz.
/// - `fig5`: 32-antenna bounds at 20, 100, 400 and 800 MHz.
/// - `fig6`: bounds at 20 MHz for 1, 8, 32 and 128 antennas.
pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    const BANDWIDTHS: [f64; 4] = [20e6, 100e6, 400e6, 800e6];
    let configs = match name {
        "fig3" => [("siso", ArraySpec::Siso), ("m8", planar(2, 4)), ("m32", planar(4, 8))]
            .into_iter()
            .map(|(tag, array)| {
                let mut c = fig2_config(&format!("fig3_{tag}"), array, 20e6);
                c.estimators = vec![EstimatorKind::Ls, EstimatorKind::Sage];
                c.trials = 8;
                c
            })
            .collect(),
        "fig4" => BANDWIDTHS
            .iter()
            .map(|&bw| fig2_config(&format!("fig4_siso_{}mhz", bw / 1e6), ArraySpec::Siso, bw))
            .collect(),
        "fig5" => BANDWIDTHS
            .iter()
            .map(|&bw| fig2_config(&format!("fig5_m32_{}mhz", bw / 1e6), planar(4, 8), bw))
            .collect(),
        "fig6" => [
            ("siso", ArraySpec::Siso),
            ("m8", planar(2, 4)),
            ("m32", planar(4, 8)),
            ("m128", planar(8, 16)),
        ]
        .into_iter()
        .map(|(tag, array)| fig2_config(&format!("fig6_{tag}"), array, 20e6))
        .collect(),
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (expected one of {PRESETS:?})"
            )))
        }
    };
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
bandwidth_hz = 20e6

[scenario]
source = { bundled = "fig2" }

[array]
kind = "planar"
rows = 2
cols = 4

[freq_grid]
start = 0.0
stop = 1.0
step = 0.25
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.snr_db, 20.0);
        assert_eq!(c.beta, 0.2);
        assert_eq!(c.oversampling, 2);
        assert_eq!(c.bounds, vec![BoundKind::Full, BoundKind::Simplified]);
        assert!(c.estimators.is_empty());
        assert_eq!(c.array.elements(), 8);
        assert_eq!(c.freq_grid.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn toml_round_trip() {
        for name in PRESETS {
            for c in preset(name).unwrap() {
                c.validate().unwrap();
                let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
                assert_eq!(back, c);
            }
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut c = base.clone();
        c.bandwidth_hz = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.snr_db = f64::NAN;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.freq_grid.step = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.estimators = vec![EstimatorKind::Ls];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("name = 1").is_err());
        assert!(preset("fig9").is_err());
    }
}
