//! Diagnostics for how well the paths are resolved in delay and angle.
//!
//! All inner products are normalized, `|x^H y| / (||x|| ||y||)`, so they lie
//! in `[0, 1]`; a zero-norm vector gives 0.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::fisher::{build_fisher, cdot, real_dot, PathVectors};
use crate::channel::{ArrayGeometry, PathSet};
use crate::error::{Error, Result};
use crate::linalg::{SpdSolver, DEFAULT_CONDITION_THRESHOLD};
use crate::signal::TrainingPulse;

/// Cross terms between two paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeparation {
    pub first: usize,
    pub second: usize,
    /// `s^H s'`, `sdot^H sdot'`, `max(sdot^H s', s^H sdot')`.
    pub delay: [f64; 3],
    /// `a^H a'`, `da_theta^H da_theta'`, `da_phi^H da_phi'`,
    /// `max(da_theta^H a', a^H da_theta')`, `max(da_phi^H a', a^H da_phi')`,
    /// `max(da_phi^H da_theta', da_theta^H da_phi')`. Absent without angles.
    pub angle: Option<[f64; 6]>,
}

impl PairSeparation {
    pub fn delay_max(&self) -> f64 {
        self.delay.iter().copied().fold(0.0, f64::max)
    }

    pub fn angle_max(&self) -> Option<f64> {
        self.angle.map(|a| a.iter().copied().fold(0.0, f64::max))
    }

    /// Remaining correlation once the better of the two separation
    /// mechanisms is used: `min(delay, angle)`, or the delay term alone
    /// without angles.
    pub fn residual(&self) -> f64 {
        match self.angle_max() {
            Some(a) => self.delay_max().min(a),
            None => self.delay_max(),
        }
    }
}

/// Per-path symmetry residuals `|da_phi^H a|` and `|da_theta^H a|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSymmetry {
    pub path: usize,
    pub phi: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub pairs: Vec<PairSeparation>,
    pub symmetry: Vec<PathSymmetry>,
    /// Largest pair residual; 0 for a single path.
    pub max_cross_term: f64,
    /// Equilibrated condition number of the Fisher matrix.
    pub fisher_condition_number: f64,
}

fn normalized(value: f64, nx: f64, ny: f64) -> f64 {
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        (value.abs() / (nx * ny)).min(1.0)
    }
}

fn cnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rnorm(x: &[f64]) -> f64 {
    real_dot(x, x).sqrt()
}

pub fn separation_report(paths: &PathSet, array: &ArrayGeometry, pulse: &TrainingPulse) -> Result<SeparationReport> {
    let v = PathVectors::new(paths, array, pulse);
    let l_count = paths.len();
    let siso = array.is_siso();

    let ns: Vec<f64> = v.pulse.iter().map(|x| rnorm(x)).collect();
    let nsd: Vec<f64> = v.pulse_dot.iter().map(|x| rnorm(x)).collect();
    let na: Vec<f64> = v.steering.iter().map(|x| cnorm(x)).collect();
    let nap: Vec<f64> = v.steering_dphi.iter().map(|x| cnorm(x)).collect();
    let nat: Vec<f64> = v.steering_dtheta.iter().map(|x| cnorm(x)).collect();

    let cn = |x: &[Complex64], y: &[Complex64], nx: f64, ny: f64| normalized(cdot(x, y).norm(), nx, ny);

    let mut pairs = Vec::new();
    for i in 0..l_count {
        for j in (i + 1)..l_count {
            let delay = [
                normalized(real_dot(&v.pulse[i], &v.pulse[j]), ns[i], ns[j]),
                normalized(real_dot(&v.pulse_dot[i], &v.pulse_dot[j]), nsd[i], nsd[j]),
                normalized(real_dot(&v.pulse_dot[i], &v.pulse[j]), nsd[i], ns[j]).max(normalized(
                    real_dot(&v.pulse[i], &v.pulse_dot[j]),
                    ns[i],
                    nsd[j],
                )),
            ];
            let angle = (!siso).then(|| {
                [
                    cn(&v.steering[i], &v.steering[j], na[i], na[j]),
                    cn(&v.steering_dtheta[i], &v.steering_dtheta[j], nat[i], nat[j]),
                    cn(&v.steering_dphi[i], &v.steering_dphi[j], nap[i], nap[j]),
                    cn(&v.steering_dtheta[i], &v.steering[j], nat[i], na[j]).max(cn(
                        &v.steering[i],
                        &v.steering_dtheta[j],
                        na[i],
                        nat[j],
                    )),
                    cn(&v.steering_dphi[i], &v.steering[j], nap[i], na[j]).max(cn(
                        &v.steering[i],
                        &v.steering_dphi[j],
                        na[i],
                        nap[j],
                    )),
                    cn(&v.steering_dphi[i], &v.steering_dtheta[j], nap[i], nat[j]).max(cn(
                        &v.steering_dtheta[i],
                        &v.steering_dphi[j],
                        nat[i],
                        nap[j],
                    )),
                ]
            });
            pairs.push(PairSeparation {
                first: i,
                second: j,
                delay,
                angle,
            });
        }
    }

    let symmetry = (0..l_count)
        .map(|l| PathSymmetry {
            path: l,
            phi: cn(&v.steering_dphi[l], &v.steering[l], nap[l], na[l]),
            theta: cn(&v.steering_dtheta[l], &v.steering[l], nat[l], na[l]),
        })
        .collect();

    let max_cross_term = pairs.iter().map(|p| p.residual()).fold(0.0, f64::max);

    let fim = build_fisher(paths, array, pulse, 1.0)?;
    let fisher_condition_number =
        SpdSolver::new_truncated(&fim.matrix, DEFAULT_CONDITION_THRESHOLD)?.condition_number();

    Ok(SeparationReport {
        pairs,
        symmetry,
        max_cross_term,
        fisher_condition_number,
    })
}

impl SeparationReport {
    /// Long-format table `path_a,path_b,quantity,value`. Per-path rows leave
    /// `path_b` empty; summary rows leave both empty.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "path_a,path_b,quantity,value").map_err(io)?;
        const DELAY: [&str; 3] = ["s_s", "sdot_sdot", "sdot_s"];
        const ANGLE: [&str; 6] = ["a_a", "dtheta_dtheta", "dphi_dphi", "dtheta_a", "dphi_a", "dphi_dtheta"];
        for p in &self.pairs {
            for (name, value) in DELAY.iter().zip(p.delay) {
                writeln!(out, "{},{},{name},{value}", p.first, p.second).map_err(io)?;
            }
            if let Some(angle) = p.angle {
                for (name, value) in ANGLE.iter().zip(angle) {
                    writeln!(out, "{},{},{name},{value}", p.first, p.second).map_err(io)?;
                }
            }
        }
        for s in &self.symmetry {
            writeln!(out, "{},,symmetry_phi,{}", s.path, s.phi).map_err(io)?;
            writeln!(out, "{},,symmetry_theta,{}", s.path, s.theta).map_err(io)?;
        }
        writeln!(out, ",,max_cross_term,{}", self.max_cross_term).map_err(io)?;
        writeln!(out, ",,fisher_condition_number,{}", self.fisher_condition_number).map_err(io)?;
        out.flush().map_err(io)
    }
}
