//! Space-alternating generalized EM (SAGE) extraction of path parameters.
//!
//! Each path `l` is fitted against its own "hidden data" estimate
//! `x_l = r - sum_{l' != l} mu_{l'}`: the delay and direction maximize
//! `|a^H X s_tau|^2 / (||a||^2 ||s_tau||^2)` coordinate-wise (grid search
//! followed by dyadic refinement), and the gain is the matching least-squares
//! coefficient. Paths are initialized by successive cancellation,
//! strongest first.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{steering_vector, wrap_angle, ArrayGeometry, PathParams, PathSet};
use crate::error::{Error, Result};
use crate::pathset_io::save_pathset;
use crate::signal::{ReceivedBlock, TrainingPulse};

/// Upper bound on the number of paths extracted.
pub const MAX_SAGE_PATHS: usize = 64;

/// Azimuth and elevation reported when angles are not observable.
pub const SISO_PHI: f64 = 0.0;
pub const SISO_THETA: f64 = FRAC_PI_2;

// Half-width, in grid steps, of the local search around the current estimate.
const LOCAL_GRID_STEPS: i64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SageConfig {
    /// Number of paths to extract.
    pub paths: usize,
    pub max_iterations: usize,
    /// Delay grid step (seconds).
    pub delay_step: f64,
    /// Delay search interval (seconds).
    pub delay_range: (f64, f64),
    /// Azimuth / elevation grid step (radians).
    pub angle_step: f64,
    /// Number of dyadic refinement halvings after each grid search.
    pub refine_steps: usize,
    /// Stop when the largest parameter change (delay and angles in grid
    /// steps, gain relative to its magnitude) falls below this.
    pub tol: f64,
}

impl SageConfig {
    /// Defaults: delay step `T_s / 4` over the whole window, angle step
    /// `2 pi / (16 * array extent in wavelengths)`, 20 refinement halvings.
    pub fn for_setup(paths: usize, array: &ArrayGeometry, pulse: &TrainingPulse) -> Self {
        let extent = array.extent_wavelengths().max(0.5);
        Self {
            paths,
            max_iterations: 50,
            delay_step: pulse.sample_period() / 4.0,
            delay_range: (pulse.time_origin().max(0.0), pulse.window_end()),
            angle_step: 2.0 * PI / (16.0 * extent),
            refine_steps: 20,
            tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 || self.paths > MAX_SAGE_PATHS {
            return Err(Error::InvalidEstimator(format!(
                "path count {} outside 1..={MAX_SAGE_PATHS}",
                self.paths
            )));
        }
        if !(self.delay_step > 0.0 && self.angle_step > 0.0) {
            return Err(Error::InvalidEstimator("grid steps must be positive".into()));
        }
        let (lo, hi) = self.delay_range;
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidEstimator(format!("empty delay range [{lo}, {hi}]")));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidEstimator("tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub paths: PathSet,
    /// Full E/M sweeps performed after initialization.
    pub iterations_used: usize,
    /// `||r - sum_l mu_l||^2` for the final estimates.
    pub residual_energy: f64,
    pub converged: bool,
    /// Residual energy after initialization and after every sweep.
    pub residual_history: Vec<f64>,
}

impl EstimationResult {
    /// Writes the estimated paths as a path-set CSV and the convergence
    /// diagnostics as a JSON sidecar.
    pub fn write(&self, csv_path: impl AsRef<Path>, sidecar: impl AsRef<Path>) -> Result<()> {
        save_pathset(&self.paths, csv_path)?;
        let sidecar = sidecar.as_ref();
        let body = serde_json::json!({
            "iterations": self.iterations_used,
            "residual_energy": self.residual_energy,
            "converged": self.converged,
        });
        let mut file = std::fs::File::create(sidecar).map_err(|e| Error::io(sidecar, e))?;
        writeln!(file, "{}", serde_json::to_string_pretty(&body).expect("json value"))
            .map_err(|e| Error::io(sidecar, e))
    }
}

#[derive(Debug, Clone, Copy)]
struct Estimate {
    tau: f64,
    phi: f64,
    theta: f64,
    alpha: Complex64,
}

struct Extractor<'a> {
    array: &'a ArrayGeometry,
    pulse: &'a TrainingPulse,
    config: &'a SageConfig,
    siso: bool,
    /// Azimuth search interval.
    phi_range: (f64, f64),
}

impl<'a> Extractor<'a> {
    fn steering(&self, phi: f64, theta: f64) -> Vec<Complex64> {
        steering_vector(self.array, phi, theta)
    }

    fn clamp_tau(&self, tau: f64) -> f64 {
        tau.clamp(self.config.delay_range.0, self.config.delay_range.1)
    }

    fn clamp_angles(&self, phi: f64, theta: f64) -> (f64, f64) {
        (phi.clamp(self.phi_range.0, self.phi_range.1), theta.clamp(0.0, PI))
    }

    /// Matched-filter output `a^H X s_tau` and `||s_tau||^2`.
    fn correlate(&self, beamformed: &[Complex64], tau: f64) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        for (n, y) in beamformed.iter().enumerate() {
            let s = self.pulse.value(self.pulse.sample_time(n) - tau);
            acc += y * s;
            energy += s * s;
        }
        (acc, energy)
    }

    fn score(z: Complex64, a_norm2: f64, s_norm2: f64) -> f64 {
        if a_norm2 * s_norm2 == 0.0 {
            0.0
        } else {
            z.norm_sqr() / (a_norm2 * s_norm2)
        }
    }

    fn objective(&self, x: &DMatrix<Complex64>, tau: f64, phi: f64, theta: f64) -> f64 {
        let a = self.steering(phi, theta);
        let y = beamform(x, &a);
        let (z, e) = self.correlate(&y, tau);
        Self::score(z, norm2(&a), e)
    }

    fn delay_search(&self, x: &DMatrix<Complex64>, est: &mut Estimate, candidates: &[f64], best: &mut f64) {
        let a = self.steering(est.phi, est.theta);
        let a2 = norm2(&a);
        let y = beamform(x, &a);
        for &tau in candidates {
            let tau = self.clamp_tau(tau);
            let (z, e) = self.correlate(&y, tau);
            let s = Self::score(z, a2, e);
            if s > *best {
                *best = s;
                est.tau = tau;
            }
        }
    }

    fn angle_search(&self, x: &DMatrix<Complex64>, est: &mut Estimate, candidates: &[(f64, f64)], best: &mut f64) {
        let s = self.pulse.shifted_samples(est.tau);
        let s2: f64 = s.iter().map(|v| v * v).sum();
        let v = project(x, &s);
        for &(phi, theta) in candidates {
            let (phi, theta) = self.clamp_angles(phi, theta);
            let a = self.steering(phi, theta);
            let z: Complex64 = a.iter().zip(&v).map(|(am, vm)| am.conj() * vm).sum();
            let score = Self::score(z, norm2(&a), s2);
            if score > *best {
                *best = score;
                est.phi = phi;
                est.theta = theta;
            }
        }
    }

    /// Local grid search around `est` followed by dyadic refinement.
    fn refine(&self, x: &DMatrix<Complex64>, est: &mut Estimate) {
        let cfg = self.config;
        let mut best = self.objective(x, est.tau, est.phi, est.theta);

        let local: Vec<f64> = (-LOCAL_GRID_STEPS..=LOCAL_GRID_STEPS)
            .filter(|&k| k != 0)
            .map(|k| est.tau + k as f64 * cfg.delay_step)
            .collect();
        self.delay_search(x, est, &local, &mut best);

        if !self.siso {
            let mut local = Vec::new();
            for i in -LOCAL_GRID_STEPS..=LOCAL_GRID_STEPS {
                for j in -LOCAL_GRID_STEPS..=LOCAL_GRID_STEPS {
                    if i != 0 || j != 0 {
                        local.push((
                            est.phi + i as f64 * cfg.angle_step,
                            est.theta + j as f64 * cfg.angle_step,
                        ));
                    }
                }
            }
            self.angle_search(x, est, &local, &mut best);
        }

        let mut h_tau = cfg.delay_step / 2.0;
        let mut h_ang = cfg.angle_step / 2.0;
        for _ in 0..cfg.refine_steps {
            self.delay_search(x, est, &[est.tau - h_tau, est.tau + h_tau], &mut best);
            if !self.siso {
                let (p, t) = (est.phi, est.theta);
                self.angle_search(x, est, &[(p - h_ang, t), (p + h_ang, t)], &mut best);
                let (p, t) = (est.phi, est.theta);
                self.angle_search(x, est, &[(p, t - h_ang), (p, t + h_ang)], &mut best);
            }
            h_tau /= 2.0;
            h_ang /= 2.0;
        }
        est.alpha = self.gain(x, est.tau, est.phi, est.theta);
    }

    /// Least-squares gain `a^H X s / (||a||^2 ||s||^2)`.
    fn gain(&self, x: &DMatrix<Complex64>, tau: f64, phi: f64, theta: f64) -> Complex64 {
        let a = self.steering(phi, theta);
        let y = beamform(x, &a);
        let (z, e) = self.correlate(&y, tau);
        let denom = norm2(&a) * e;
        if denom == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            z / denom
        }
    }

    /// Strongest path in `x` on the full delay and angle grids.
    fn initial_estimate(&self, x: &DMatrix<Complex64>, delay_table: &DelayTable) -> Estimate {
        // delay: power summed over antennas, noncoherently
        let mut best_tau = self.config.delay_range.0;
        let mut best_power = -1.0;
        let mut v = vec![Complex64::new(0.0, 0.0); x.nrows()];
        for k in 0..delay_table.len() {
            let (s, e) = delay_table.samples(k);
            if e == 0.0 {
                continue;
            }
            for (m, vm) in v.iter_mut().enumerate() {
                *vm = x.row(m).iter().zip(s).map(|(xv, sv)| xv * *sv).sum();
            }
            let power = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / e;
            if power > best_power {
                best_power = power;
                best_tau = delay_table.delay(k);
            }
        }
        let mut est = Estimate {
            tau: best_tau,
            phi: SISO_PHI,
            theta: SISO_THETA,
            alpha: Complex64::new(0.0, 0.0),
        };
        if !self.siso {
            let step = self.config.angle_step;
            let n_phi = ((self.phi_range.1 - self.phi_range.0) / step).ceil() as usize;
            let n_theta = (PI / step).ceil() as usize;
            let mut grid = Vec::with_capacity((n_phi + 1) * (n_theta + 1));
            for i in 0..=n_phi {
                for j in 0..=n_theta {
                    grid.push((self.phi_range.0 + i as f64 * step, j as f64 * step));
                }
            }
            let mut best = -1.0;
            self.angle_search(x, &mut est, &grid, &mut best);
        }
        est
    }
}

/// Pulse samples for every delay on the grid, sharing one table of
/// `s(t)` at a quarter-step resolution when the grid allows it.
struct DelayTable {
    start: f64,
    step: f64,
    count: usize,
    rows: Vec<(Vec<f64>, f64)>,
}

impl DelayTable {
    fn new(pulse: &TrainingPulse, start: f64, end: f64, step: f64) -> Self {
        let count = ((end - start) / step).floor() as usize + 1;
        let rows = (0..count)
            .map(|k| {
                let s = pulse.shifted_samples(start + k as f64 * step);
                let e = s.iter().map(|v| v * v).sum();
                (s, e)
            })
            .collect();
        Self {
            start,
            step,
            count,
            rows,
        }
    }

    fn len(&self) -> usize {
        self.count
    }

    fn delay(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    fn samples(&self, k: usize) -> (&[f64], f64) {
        let (s, e) = &self.rows[k];
        (s, *e)
    }
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `y[n] = sum_m conj(a_m) x[m, n]`
fn beamform(x: &DMatrix<Complex64>, a: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.ncols()];
    for (m, am) in a.iter().enumerate() {
        let w = am.conj();
        for (n, yn) in y.iter_mut().enumerate() {
            *yn += w * x[(m, n)];
        }
    }
    y
}

/// `v[m] = sum_n x[m, n] s[n]`
fn project(x: &DMatrix<Complex64>, s: &[f64]) -> Vec<Complex64> {
    (0..x.nrows())
        .map(|m| x.row(m).iter().zip(s).map(|(xv, sv)| xv * *sv).sum())
        .collect()
}

fn contribution(array: &ArrayGeometry, pulse: &TrainingPulse, est: &Estimate) -> DMatrix<Complex64> {
    let a = steering_vector(array, est.phi, est.theta);
    let s = pulse.shifted_samples(est.tau);
    DMatrix::from_fn(a.len(), s.len(), |m, n| est.alpha * a[m] * s[n])
}

fn energy(x: &DMatrix<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Extracts `config.paths` specular paths from `block`.
///
/// A single-element array switches to delay-only estimation with the
/// angles reported as `(SISO_PHI, SISO_THETA)`. Non-convergence within
/// `max_iterations` is reported through `converged = false`.
pub fn sage_extract(
    block: &ReceivedBlock,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    config: &SageConfig,
) -> Result<EstimationResult> {
    config.validate()?;
    if block.antennas() != array.len() || block.samples.ncols() != pulse.len() {
        return Err(Error::InvalidEstimator(format!(
            "block is {}x{} but the setup expects {}x{}",
            block.antennas(),
            block.samples.ncols(),
            array.len(),
            pulse.len()
        )));
    }
    let planar_xz = array.positions().iter().all(|p| p[1] == 0.0);
    let extractor = Extractor {
        array,
        pulse,
        config,
        siso: array.is_siso(),
        // Arrays in the x-z plane cannot tell phi from -phi.
        phi_range: if planar_xz { (0.0, PI) } else { (-PI, PI) },
    };
    let table = DelayTable::new(pulse, config.delay_range.0, config.delay_range.1, config.delay_step);

    let mut residual = block.samples.clone();
    let mut estimates: Vec<Estimate> = Vec::with_capacity(config.paths);
    let mut parts: Vec<DMatrix<Complex64>> = Vec::with_capacity(config.paths);
    for _ in 0..config.paths {
        let mut est = extractor.initial_estimate(&residual, &table);
        extractor.refine(&residual, &mut est);
        let part = contribution(array, pulse, &est);
        residual -= &part;
        estimates.push(est);
        parts.push(part);
    }

    let mut history = vec![energy(&residual)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut change: f64 = 0.0;
        for l in 0..estimates.len() {
            // E-step: hidden data of path l
            let x = &residual + &parts[l];
            let before = estimates[l];
            let mut est = before;
            extractor.refine(&x, &mut est);
            let part = contribution(array, pulse, &est);
            residual = &x - &part;
            parts[l] = part;
            estimates[l] = est;

            let da = if before.alpha.norm() > 0.0 {
                (est.alpha - before.alpha).norm() / before.alpha.norm()
            } else {
                est.alpha.norm()
            };
            change = change
                .max((est.tau - before.tau).abs() / config.delay_step)
                .max((est.phi - before.phi).abs() / config.angle_step)
                .max((est.theta - before.theta).abs() / config.angle_step)
                .max(da);
        }
        history.push(energy(&residual));
        if change < config.tol {
            converged = true;
            break;
        }
    }

    let paths = estimates
        .iter()
        .map(|e| PathParams::new(e.alpha, e.tau.max(0.0), wrap_angle(e.phi), e.theta.clamp(0.0, PI)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimationResult {
        paths: PathSet::from_raw(paths)?,
        iterations_used: iterations,
        residual_energy: *history.last().expect("non-empty history"),
        converged,
        residual_history: history,
    })
}
