//! Root-raised-cosine training pulse and synthesis of sampled array snapshots.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{steering_vector, ArrayGeometry, PathSet};
use crate::error::{Error, Result};

/// Fraction of the window that precedes the peak of a zero-delay pulse.
pub const DEFAULT_PEAK_FRACTION: f64 = 0.25;

/// Extra observation length, in symbol periods, added to the delay spread.
pub const DEFAULT_GUARD_SYMBOLS: usize = 32;

/// Minimum pulse tail, in symbol periods, on each side of the delay spread.
pub const MIN_TAIL_SYMBOLS: f64 = 8.0;

// Half-width (in symbol periods) of the neighbourhood around a removable
// singularity where values are interpolated instead of evaluated directly.
const SINGULAR_HALF_WIDTH: f64 = 1e-3;

/// Sampled RRC training pulse observed over `N` samples.
///
/// Sample `n` is taken at `time_origin + n * T / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPulse {
    beta: f64,
    period: f64,
    oversampling: usize,
    samples: usize,
    time_origin: f64,
}

impl TrainingPulse {
    /// Pulse with the default time origin (zero-delay peak at 25% of the
    /// window).
    pub fn new(beta: f64, period: f64, oversampling: usize, samples: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidPulse(format!("roll-off {beta} outside [0, 1]")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidPulse(format!("symbol period {period} must be positive")));
        }
        if (oversampling as f64) < 1.0 + beta {
            return Err(Error::InvalidPulse(format!(
                "oversampling {oversampling} below 1 + beta = {}",
                1.0 + beta
            )));
        }
        if samples == 0 {
            return Err(Error::InvalidPulse("at least one sample is required".into()));
        }
        let ts = period / oversampling as f64;
        Ok(Self {
            beta,
            period,
            oversampling,
            samples,
            time_origin: -DEFAULT_PEAK_FRACTION * samples as f64 * ts,
        })
    }

    /// Pulse whose window covers `[0, max_delay]` with the default guard:
    /// `N/K >= ceil(max_delay / T) + 32` and at least 8 symbol periods of
    /// tail between `max_delay` and the last sample.
    pub fn covering(beta: f64, period: f64, oversampling: usize, max_delay: f64) -> Result<Self> {
        let spread = (max_delay / period).max(0.0);
        let guarded = spread.ceil() as usize + DEFAULT_GUARD_SYMBOLS;
        // the last sample sits one sample period before the window end
        let needed = spread + MIN_TAIL_SYMBOLS + 1.0 / oversampling as f64;
        let tail = (needed / (1.0 - DEFAULT_PEAK_FRACTION) * (1.0 + 1e-12)).ceil() as usize;
        let symbols = guarded.max(tail);
        Self::new(beta, period, oversampling, symbols * oversampling)
    }

    pub fn with_time_origin(mut self, time_origin: f64) -> Self {
        self.time_origin = time_origin;
        self
    }

    /// Moves the window so that a zero-delay pulse sits in its middle.
    pub fn centered(self) -> Self {
        let t0 = -0.5 * (self.samples as f64 - 1.0) * self.sample_period();
        self.with_time_origin(t0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Symbol period `T`.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn bandwidth(&self) -> f64 {
        1.0 / self.period
    }

    /// Oversampling factor `K`.
    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    pub fn sample_period(&self) -> f64 {
        self.period / self.oversampling as f64
    }

    pub fn time_origin(&self) -> f64 {
        self.time_origin
    }

    /// Observation length in symbol periods, `N / K`.
    pub fn window_symbols(&self) -> f64 {
        self.samples as f64 / self.oversampling as f64
    }

    pub fn sample_time(&self, n: usize) -> f64 {
        self.time_origin + n as f64 * self.sample_period()
    }

    pub fn window_end(&self) -> f64 {
        self.sample_time(self.samples - 1)
    }

    /// Center of the observation window (seconds).
    pub fn window_center(&self) -> f64 {
        0.5 * (self.time_origin + self.window_end())
    }

    pub fn value(&self, t: f64) -> f64 {
        rrc_value(self, t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        rrc_derivative(self, t)
    }

    /// `s(t_n - tau)` for every sample.
    pub fn shifted_samples(&self, tau: f64) -> Vec<f64> {
        (0..self.samples)
            .map(|n| self.value(self.sample_time(n) - tau))
            .collect()
    }

    /// `s'(t_n - tau)` for every sample.
    pub fn shifted_derivative_samples(&self, tau: f64) -> Vec<f64> {
        (0..self.samples)
            .map(|n| self.derivative(self.sample_time(n) - tau))
            .collect()
    }

    /// Checks that the window covers `[min tau, max tau]` with at least
    /// `tail_symbols` symbol periods of margin on each side.
    pub fn check_covers(&self, paths: &PathSet, tail_symbols: f64) -> Result<()> {
        let needed_start = paths.min_delay() - tail_symbols * self.period;
        let needed_end = paths.max_delay() + tail_symbols * self.period;
        let (start, end) = (self.time_origin, self.window_end());
        if start > needed_start || end < needed_end {
            return Err(Error::WindowTooShort {
                window_start: start,
                window_end: end,
                needed_start,
                needed_end,
            });
        }
        Ok(())
    }
}

fn rrc_numerator(x: f64, beta: f64) -> f64 {
    (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos()
}

fn rrc_numerator_derivative(x: f64, beta: f64) -> f64 {
    PI * (1.0 - beta) * (PI * x * (1.0 - beta)).cos() + 4.0 * beta * (PI * x * (1.0 + beta)).cos()
        - 4.0 * beta * x * PI * (1.0 + beta) * (PI * x * (1.0 + beta)).sin()
}

fn rrc_denominator(x: f64, beta: f64) -> f64 {
    PI * x * (1.0 - (4.0 * beta * x).powi(2))
}

fn rrc_denominator_derivative(x: f64, beta: f64) -> f64 {
    PI * (1.0 - 48.0 * beta * beta * x * x)
}

/// Shape in units of `x = t / T`, without the `1/sqrt(T)` factor.
fn shape_direct(x: f64, beta: f64) -> f64 {
    rrc_numerator(x, beta) / rrc_denominator(x, beta)
}

/// Derivative with respect to `x` of [`shape_direct`].
fn shape_derivative_direct(x: f64, beta: f64) -> f64 {
    let n = rrc_numerator(x, beta);
    let d = rrc_denominator(x, beta);
    (rrc_numerator_derivative(x, beta) * d - n * rrc_denominator_derivative(x, beta)) / (d * d)
}

/// The removable singularity closest to `x`, if `x` is within the
/// interpolation neighbourhood.
fn nearby_singularity(x: f64, beta: f64) -> Option<f64> {
    if x.abs() < 2.0 * SINGULAR_HALF_WIDTH {
        return Some(0.0);
    }
    if beta > 0.0 {
        let xs = 1.0 / (4.0 * beta);
        if (x.abs() - xs).abs() < 2.0 * SINGULAR_HALF_WIDTH {
            return Some(xs.copysign(x));
        }
    }
    None
}

/// Cubic Lagrange interpolation through `xs +- h`, `xs +- 2h`, which stay
/// clear of the cancellation around `xs`.
fn interpolate_across(xs: f64, x: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = SINGULAR_HALF_WIDTH;
    let nodes = [xs - 2.0 * h, xs - h, xs + h, xs + 2.0 * h];
    let values = nodes.map(&f);
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        acc += w * values[i];
    }
    acc
}

fn shape(x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && x.abs() == 1.0 / (4.0 * beta) {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    match nearby_singularity(x, beta) {
        Some(xs) => interpolate_across(xs, x, |y| shape_direct(y, beta)),
        None => shape_direct(x, beta),
    }
}

fn shape_derivative(x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    match nearby_singularity(x, beta) {
        Some(xs) => interpolate_across(xs, x, |y| shape_derivative_direct(y, beta)),
        None => shape_derivative_direct(x, beta),
    }
}

/// Unit-energy RRC pulse `s(t)`.
pub fn rrc_value(pulse: &TrainingPulse, t: f64) -> f64 {
    let tp = pulse.period;
    shape(t / tp, pulse.beta) / tp.sqrt()
}

/// Time derivative `ds/dt` of the RRC pulse.
pub fn rrc_derivative(pulse: &TrainingPulse, t: f64) -> f64 {
    let tp = pulse.period;
    shape_derivative(t / tp, pulse.beta) / (tp * tp.sqrt())
}

/// `||s||^2`: energy of the pulse sampled over the observation window.
pub fn pulse_energy(pulse: &TrainingPulse) -> f64 {
    pulse.shifted_samples(0.0).iter().map(|s| s * s).sum()
}

/// Root mean-squared bandwidth `sigma_F = ||s'|| / (2 pi ||s||)` from the
/// sampled pulse and its sampled derivative.
pub fn mean_squared_bandwidth(pulse: &TrainingPulse) -> f64 {
    let s2: f64 = pulse.shifted_samples(0.0).iter().map(|s| s * s).sum();
    let d2: f64 = pulse.shifted_derivative_samples(0.0).iter().map(|s| s * s).sum();
    (d2 / s2).sqrt() / TAU
}

/// `sigma_F` obtained by integrating `f^2 |S(f)|^2` and `|S(f)|^2` over one
/// period of the sampled-pulse spectrum (composite Simpson rule).
pub fn mean_squared_bandwidth_spectral(pulse: &TrainingPulse) -> f64 {
    let fs = 1.0 / pulse.sample_period();
    let intervals = 8 * pulse.len().max(64);
    let step = fs / intervals as f64;
    let samples = pulse.shifted_samples(0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=intervals {
        let f = -fs / 2.0 + i as f64 * step;
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = dtft(pulse, &samples, f).norm_sqr();
        num += w * f * f * p;
        den += w * p;
    }
    (num / den).sqrt()
}

/// DTFT of a real sequence sampled on the pulse's time grid.
fn dtft(pulse: &TrainingPulse, x: &[f64], f: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -TAU * f * pulse.sample_period());
    let mut phasor = Complex64::from_polar(1.0, -TAU * f * pulse.time_origin);
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in x {
        acc += phasor * v;
        phasor *= rot;
    }
    acc
}

/// DTFT of complex samples on the pulse's time grid:
/// `X(f) = sum_n x[n] exp(-j 2 pi f t_n)`.
pub fn dtft_complex(pulse: &TrainingPulse, x: &[Complex64], f: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -TAU * f * pulse.sample_period());
    let mut phasor = Complex64::from_polar(1.0, -TAU * f * pulse.time_origin);
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in x {
        acc += phasor * v;
        phasor *= rot;
    }
    acc
}

/// Spectrum of the sampled pulse, `S(f) = sum_n s(t_n) exp(-j 2 pi f t_n)`.
pub fn pulse_spectrum(pulse: &TrainingPulse, f: f64) -> Complex64 {
    dtft(pulse, &pulse.shifted_samples(0.0), f)
}

/// Noisy snapshot `r_m[n]` of every antenna over the observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    /// `M x N` samples.
    pub samples: DMatrix<Complex64>,
    /// Per-sample complex noise variance.
    pub noise_var: f64,
    pub pulse: TrainingPulse,
}

impl ReceivedBlock {
    pub fn antennas(&self) -> usize {
        self.samples.nrows()
    }

    pub fn time_origin(&self) -> f64 {
        self.pulse.time_origin()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Writes the samples as `m,n,re,im` rows.
    pub fn write_debug_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "m,n,re,im").map_err(io)?;
        for m in 0..self.samples.nrows() {
            for n in 0..self.samples.ncols() {
                let x = self.samples[(m, n)];
                writeln!(out, "{m},{n},{:e},{:e}", x.re, x.im).map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

/// Noiseless mean `mu_{m,n} = sum_l alpha_l a_m(phi_l, theta_l) s(t_n - tau_l)`.
pub fn noiseless_samples(paths: &PathSet, array: &ArrayGeometry, pulse: &TrainingPulse) -> DMatrix<Complex64> {
    let mut mu = DMatrix::from_element(array.len(), pulse.len(), Complex64::new(0.0, 0.0));
    for p in paths {
        let a = steering_vector(array, p.phi, p.theta);
        let s = pulse.shifted_samples(p.tau);
        for (m, am) in a.iter().enumerate() {
            let g = p.alpha * am;
            for (n, sn) in s.iter().enumerate() {
                mu[(m, n)] += g * *sn;
            }
        }
    }
    mu
}

/// Random generator for Monte-Carlo trial `trial` of a run seeded with
/// `seed`. Trials use disjoint ChaCha streams.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Adds circularly-symmetric complex Gaussian noise of variance `noise_var`
/// (each real component `noise_var / 2`).
pub fn add_noise(samples: &mut DMatrix<Complex64>, noise_var: f64, rng: &mut ChaCha8Rng) {
    if noise_var == 0.0 {
        return;
    }
    let sd = (noise_var / 2.0).sqrt();
    for m in 0..samples.nrows() {
        for n in 0..samples.ncols() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            samples[(m, n)] += Complex64::new(sd * re, sd * im);
        }
    }
}

/// Options for [`synthesize_received_with`].
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Reject windows that do not cover the delay spread plus this many
    /// symbol periods on each side. `None` disables the check.
    pub min_tail_symbols: Option<f64>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            min_tail_symbols: Some(MIN_TAIL_SYMBOLS),
        }
    }
}

/// Noisy received block; deterministic for a given seed.
pub fn synthesize_received(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
    seed: u64,
) -> Result<ReceivedBlock> {
    let mut rng = trial_rng(seed, 0);
    synthesize_received_with(paths, array, pulse, noise_var, &mut rng, SynthesisOptions::default())
}

pub fn synthesize_received_with(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
    rng: &mut ChaCha8Rng,
    options: SynthesisOptions,
) -> Result<ReceivedBlock> {
    if !(noise_var.is_finite() && noise_var >= 0.0) {
        return Err(Error::InvalidPulse(format!("noise variance {noise_var} must be >= 0")));
    }
    if let Some(tail) = options.min_tail_symbols {
        pulse.check_covers(paths, tail)?;
    }
    let mut samples = noiseless_samples(paths, array, pulse);
    add_noise(&mut samples, noise_var, rng);
    Ok(ReceivedBlock {
        samples,
        noise_var,
        pulse: pulse.clone(),
    })
}
