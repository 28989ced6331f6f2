//! Path-set files, bundled scenarios and synthetic test scenarios.
//!
//! Files are CSV with header `gain,delay_s,azimuth_rad,elevation_rad` and an
//! optional `phase_rad` column, one row per path. `gain` is the linear gain
//! magnitude.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{wrap_angle, PathParams, PathSet};
use crate::error::{Error, Result};
use crate::signal::trial_rng;

const FIG2_CSV: &str = include_str!("../data/fig2.csv");

/// Names of the scenarios compiled into the crate.
pub const BUNDLED_SCENARIOS: [&str; 1] = ["fig2"];

/// Raw CSV text of a bundled scenario.
pub fn bundled_csv(name: &str) -> Result<&'static str> {
    match name {
        "fig2" => Ok(FIG2_CSV),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Where the path parameters come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioSource {
    Bundled(String),
    File(PathBuf),
    Synthetic {
        recipe: String,
        /// Symbol period used to space delays (seconds).
        period: f64,
        /// Delay of the single-path recipe (seconds).
        #[serde(default)]
        center: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePolicy {
    /// Use `phase_rad` when the file has it, draw seeded phases otherwise.
    #[default]
    Auto,
    /// Require a `phase_rad` column.
    FromFile,
    /// Always draw phases uniformly from `[0, 2 pi)` with the seed.
    SeededUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Sum of gain magnitudes equals the target.
    #[default]
    Magnitude,
    /// Sum of squared gain magnitudes equals the target.
    Power,
    /// Keep gains as read.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub source: ScenarioSource,
    #[serde(default = "default_target")]
    pub normalization_target: f64,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub phase_policy: PhasePolicy,
    #[serde(default)]
    pub seed: u64,
}

fn default_target() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn bundled(name: &str, seed: u64) -> Self {
        Self::from_source(ScenarioSource::Bundled(name.to_string()), seed)
    }

    pub fn file(path: impl Into<PathBuf>, seed: u64) -> Self {
        Self::from_source(ScenarioSource::File(path.into()), seed)
    }

    pub fn from_source(source: ScenarioSource, seed: u64) -> Self {
        Self {
            source,
            normalization_target: 1.0,
            normalization: Normalization::Magnitude,
            phase_policy: PhasePolicy::Auto,
            seed,
        }
    }
}

/// Loads and normalizes the path set described by `spec`.
pub fn load_pathset(spec: &ScenarioSpec) -> Result<PathSet> {
    if !(spec.normalization_target.is_finite() && spec.normalization_target > 0.0) {
        return Err(Error::InvalidPathSet(format!(
            "normalization target {} must be positive",
            spec.normalization_target
        )));
    }
    let paths = match &spec.source {
        ScenarioSource::Bundled(name) => parse_pathset(bundled_csv(name)?, name, spec)?,
        ScenarioSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_pathset(&text, &path.display().to_string(), spec)?
        }
        ScenarioSource::Synthetic { recipe, period, center } => {
            let recipe: Recipe = recipe.parse()?;
            synthesize_scenario(
                &recipe,
                &RecipeParams {
                    period: *period,
                    center: *center,
                },
            )?
        }
    };
    normalize(paths, spec.normalization, spec.normalization_target)
}

/// Rescales gains so that their magnitude (or power) sum equals `target`.
/// Sums already within a few ulps of the target are left untouched so that
/// reloading a saved set is exact.
pub fn normalize(paths: PathSet, mode: Normalization, target: f64) -> Result<PathSet> {
    let sum: f64 = match mode {
        Normalization::None => return Ok(paths),
        Normalization::Magnitude => paths.iter().map(|p| p.alpha.norm()).sum(),
        Normalization::Power => paths.iter().map(|p| p.alpha.norm_sqr()).sum(),
    };
    if sum <= 0.0 {
        return Err(Error::InvalidPathSet("all gains are zero".into()));
    }
    if (sum - target).abs() <= 4.0 * f64::EPSILON * target {
        return Ok(paths);
    }
    let factor = match mode {
        Normalization::Power => (target / sum).sqrt(),
        _ => target / sum,
    };
    let scaled = paths
        .into_paths()
        .into_iter()
        .map(|mut p| {
            p.alpha *= factor;
            p
        })
        .collect();
    PathSet::new(scaled)
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    gain: f64,
    delay_s: f64,
    azimuth_rad: f64,
    elevation_rad: f64,
    #[serde(default)]
    phase_rad: Option<f64>,
}

fn parse_pathset(text: &str, origin: &str, spec: &ScenarioSpec) -> Result<PathSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    for required in ["gain", "delay_s", "azimuth_rad", "elevation_rad"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Parse {
                path: origin.to_string(),
                row: 0,
                message: format!("missing column `{required}`"),
            });
        }
    }
    let has_phase = headers.iter().any(|h| h == "phase_rad");
    if spec.phase_policy == PhasePolicy::FromFile && !has_phase {
        return Err(Error::Parse {
            path: origin.to_string(),
            row: 0,
            message: "phase policy `from-file` needs a `phase_rad` column".into(),
        });
    }
    let draw = match spec.phase_policy {
        PhasePolicy::SeededUniform => true,
        PhasePolicy::FromFile => false,
        PhasePolicy::Auto => !has_phase,
    };
    let mut rng = trial_rng(spec.seed, 0);
    let mut paths = Vec::new();
    for (i, record) in reader.deserialize::<Row>().enumerate() {
        let row = i + 1;
        let r = record.map_err(|e| Error::Parse {
            path: origin.to_string(),
            row,
            message: e.to_string(),
        })?;
        if r.gain.is_nan() || r.gain < 0.0 {
            return Err(Error::InvalidPath(format!(
                "{origin}: row {row}: negative gain {}",
                r.gain
            )));
        }
        if r.delay_s.is_nan() || r.delay_s < 0.0 {
            return Err(Error::InvalidPath(format!(
                "{origin}: row {row}: negative delay {}",
                r.delay_s
            )));
        }
        let phase = if draw {
            rng.random_range(0.0..TAU)
        } else {
            r.phase_rad.ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                row,
                message: "missing phase_rad value".into(),
            })?
        };
        let path = PathParams::new(
            Complex64::from_polar(r.gain, phase),
            r.delay_s,
            r.azimuth_rad,
            r.elevation_rad,
        )
        .map_err(|e| Error::InvalidPath(format!("{origin}: row {row}: {e}")))?;
        paths.push(path);
    }
    PathSet::new(paths)
}

/// Writes `paths` with 17 significant digits, including `phase_rad`.
pub fn save_pathset(paths: &PathSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "gain,delay_s,azimuth_rad,elevation_rad,phase_rad").map_err(io)?;
    for p in paths {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.alpha.norm(),
            p.tau,
            p.phi,
            p.theta,
            p.alpha.arg()
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Drops paths whose gain magnitude is below `min_gain`.
pub fn prune_weak_paths(paths: &PathSet, min_gain: f64) -> Result<PathSet> {
    let kept: Vec<PathParams> = paths.iter().filter(|p| p.alpha.norm() >= min_gain).copied().collect();
    PathSet::new(kept)
}

/// Deterministic test scenarios.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// One unit path at the window center.
    SinglePath,
    /// Two paths in the same direction, `symbols` symbol periods apart.
    TwoPathDelaySeparated { symbols: f64 },
    /// Two paths at the same delay, `delta_phi` apart in azimuth.
    TwoPathAngleSeparated { delta_phi: f64 },
    /// `paths` paths with delays `k * spacing_symbols * T` and azimuths
    /// `phi0 + k * angle_step`.
    Grid {
        paths: usize,
        spacing_symbols: f64,
        angle_step: f64,
    },
}

/// Scalars the recipes depend on.
#[derive(Debug, Clone, Copy)]
pub struct RecipeParams {
    /// Symbol period (seconds).
    pub period: f64,
    /// Delay of [`Recipe::SinglePath`] (seconds).
    pub center: f64,
}

const RECIPE_PHI: f64 = 0.7;
const RECIPE_THETA: f64 = 1.3;

impl Recipe {
    /// Largest delay produced, in symbol periods (excluding the single-path
    /// center).
    pub fn span_symbols(&self) -> f64 {
        match *self {
            Recipe::SinglePath | Recipe::TwoPathAngleSeparated { .. } => 0.0,
            Recipe::TwoPathDelaySeparated { symbols } => symbols,
            Recipe::Grid {
                paths, spacing_symbols, ..
            } => spacing_symbols * paths.saturating_sub(1) as f64,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipe::SinglePath => write!(f, "single-path"),
            Recipe::TwoPathDelaySeparated { symbols } => {
                write!(f, "two-path-delay-separated({symbols})")
            }
            Recipe::TwoPathAngleSeparated { delta_phi } => {
                write!(f, "two-path-angle-separated({delta_phi})")
            }
            Recipe::Grid {
                paths,
                spacing_symbols,
                angle_step,
            } => write!(f, "grid({paths},{spacing_symbols},{angle_step})"),
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;

    /// Parses `single-path`, `two-path-delay-separated(k)`,
    /// `two-path-angle-separated(dphi)` and `grid(L,k,dphi)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], &s[open + 1..s.len() - 1]),
            Some(_) => return Err(Error::UnknownRecipe(s.to_string())),
            None => (s, ""),
        };
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::UnknownRecipe(s.to_string()))?
        };
        let recipe = match (name.trim(), nums.as_slice()) {
            ("single-path", []) => Recipe::SinglePath,
            ("two-path-delay-separated", [k]) => Recipe::TwoPathDelaySeparated { symbols: *k },
            ("two-path-angle-separated", [d]) => Recipe::TwoPathAngleSeparated { delta_phi: *d },
            ("grid", [l, k, d]) if *l >= 1.0 && l.fract() == 0.0 => Recipe::Grid {
                paths: *l as usize,
                spacing_symbols: *k,
                angle_step: *d,
            },
            _ => return Err(Error::UnknownRecipe(s.to_string())),
        };
        Ok(recipe)
    }
}

/// Builds the path set of a recipe.
pub fn synthesize_scenario(recipe: &Recipe, params: &RecipeParams) -> Result<PathSet> {
    let t = params.period;
    let path = |alpha: Complex64, tau: f64, phi: f64| PathParams::new(alpha, tau, phi, RECIPE_THETA);
    let paths = match *recipe {
        Recipe::SinglePath => vec![path(Complex64::new(1.0, 0.0), params.center, RECIPE_PHI)?],
        Recipe::TwoPathDelaySeparated { symbols } => vec![
            path(Complex64::new(1.0, 0.0), 0.0, RECIPE_PHI)?,
            path(Complex64::from_polar(0.8, 1.0), symbols * t, RECIPE_PHI)?,
        ],
        Recipe::TwoPathAngleSeparated { delta_phi } => vec![
            path(Complex64::new(1.0, 0.0), 0.0, RECIPE_PHI)?,
            path(
                Complex64::from_polar(0.8, 1.0),
                0.0,
                canonical_phi(RECIPE_PHI + delta_phi),
            )?,
        ],
        Recipe::Grid {
            paths,
            spacing_symbols,
            angle_step,
        } => (0..paths)
            .map(|k| {
                let k = k as f64;
                path(
                    Complex64::from_polar(1.0, 1.1 * k),
                    k * spacing_symbols * t,
                    canonical_phi(RECIPE_PHI + k * angle_step),
                )
            })
            .collect::<Result<_>>()?,
    };
    PathSet::new(paths)
}

fn canonical_phi(phi: f64) -> f64 {
    let w = wrap_angle(phi);
    if w <= -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_parsing() {
        assert_eq!("single-path".parse::<Recipe>().unwrap(), Recipe::SinglePath);
        assert_eq!(
            "two-path-delay-separated(100)".parse::<Recipe>().unwrap(),
            Recipe::TwoPathDelaySeparated { symbols: 100.0 }
        );
        assert_eq!(
            "grid(4, 5, 0.5)".parse::<Recipe>().unwrap(),
            Recipe::Grid {
                paths: 4,
                spacing_symbols: 5.0,
                angle_step: 0.5
            }
        );
        for bad in ["spiral", "grid(4,5)", "grid(2.5,1,1)", "single-path(3)", "grid(4,5,0.5"] {
            assert!(matches!(bad.parse::<Recipe>(), Err(Error::UnknownRecipe(_))), "{bad}");
        }
        let r = Recipe::Grid {
            paths: 3,
            spacing_symbols: 2.5,
            angle_step: 0.25,
        };
        assert_eq!(r.to_string().parse::<Recipe>().unwrap(), r);
    }

    #[test]
    fn recipe_geometry() {
        let params = RecipeParams {
            period: 50e-9,
            center: 8e-7,
        };
        let single = synthesize_scenario(&Recipe::SinglePath, &params).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.paths()[0].alpha, Complex64::new(1.0, 0.0));
        assert_eq!(single.paths()[0].tau, 8e-7);

        let pair = synthesize_scenario(&Recipe::TwoPathDelaySeparated { symbols: 100.0 }, &params).unwrap();
        assert!((pair.paths()[1].tau - pair.paths()[0].tau - 100.0 * 50e-9).abs() < 1e-20);

        let grid = synthesize_scenario(
            &Recipe::Grid {
                paths: 4,
                spacing_symbols: 5.0,
                angle_step: 0.5,
            },
            &params,
        )
        .unwrap();
        let delays: Vec<f64> = grid.iter().map(|p| p.tau / 50e-9).collect();
        for (d, e) in delays.iter().zip([0.0, 5.0, 10.0, 15.0]) {
            assert!((d - e).abs() < 1e-12);
        }
    }

    #[test]
    fn bundled_fig2_is_normalized() {
        let set = load_pathset(&ScenarioSpec::bundled("fig2", 7)).unwrap();
        assert_eq!(set.len(), 21);
        assert!((set.total_gain() - 1.0).abs() < 1e-12);
        assert!(matches!(
            load_pathset(&ScenarioSpec::bundled("fig9", 7)),
            Err(Error::UnknownScenario(_))
        ));
    }
}
