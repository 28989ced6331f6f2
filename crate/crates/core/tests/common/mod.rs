//! Independent reference implementations used as test oracles. Nothing here
//! calls the crate's numerical routines; only plain data (positions,
//! wavelength, sample times) is read from crate types.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use extrapolate::channel::{ArrayGeometry, PathParams, PathSet};
use extrapolate::signal::TrainingPulse;
use extrapolate::Complex64;
use nalgebra::DMatrix;

/// RRC pulse straight from its textbook formula, with the textbook limits
/// at `t = 0` and `t = +-T/(4 beta)`.
pub fn rrc(t: f64, period: f64, beta: f64) -> f64 {
    let x = t / period;
    if x == 0.0 {
        return (1.0 - beta + 4.0 * beta / PI) / period.sqrt();
    }
    if beta > 0.0 && ((4.0 * beta * x).abs() - 1.0).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / (2.0 * period).sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
    num / den / period.sqrt()
}

pub fn steering(array: &ArrayGeometry, phi: f64, theta: f64) -> Vec<Complex64> {
    let k = TAU / array.wavelength();
    let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    array
        .positions()
        .iter()
        .map(|p| Complex64::from_polar(1.0, -k * (u[0] * p[0] + u[1] * p[1] + u[2] * p[2])))
        .collect()
}

pub fn response(paths: &[PathParams], array: &ArrayGeometry, f: f64) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); array.len()];
    for p in paths {
        let a = steering(array, p.phi, p.theta);
        for (hm, am) in h.iter_mut().zip(a) {
            *hm += p.alpha * am * Complex64::from_polar(1.0, -TAU * f * p.tau);
        }
    }
    h
}

/// Noiseless received samples, flattened antenna-major.
pub fn mean(paths: &[PathParams], array: &ArrayGeometry, pulse: &TrainingPulse) -> Vec<Complex64> {
    let mut mu = vec![Complex64::new(0.0, 0.0); array.len() * pulse.len()];
    for p in paths {
        let a = steering(array, p.phi, p.theta);
        for (m, am) in a.iter().enumerate() {
            for n in 0..pulse.len() {
                let s = rrc(pulse.sample_time(n) - p.tau, pulse.period(), pulse.beta());
                mu[m * pulse.len() + n] += p.alpha * am * s;
            }
        }
    }
    mu
}

/// Real parameters in the crate's block layout: `[tau; phi; theta; re; im]`
/// or `[tau; re; im]` for one antenna.
pub fn flatten(paths: &[PathParams], siso: bool) -> Vec<f64> {
    let mut v: Vec<f64> = paths.iter().map(|p| p.tau).collect();
    if !siso {
        v.extend(paths.iter().map(|p| p.phi));
        v.extend(paths.iter().map(|p| p.theta));
    }
    v.extend(paths.iter().map(|p| p.alpha.re));
    v.extend(paths.iter().map(|p| p.alpha.im));
    v
}

pub fn unflatten(v: &[f64], l: usize, siso: bool) -> Vec<PathParams> {
    (0..l)
        .map(|i| {
            let (phi, theta, g) = if siso {
                (0.0, PI / 2.0, 1)
            } else {
                (v[l + i], v[2 * l + i], 3)
            };
            PathParams {
                alpha: Complex64::new(v[g * l + i], v[(g + 1) * l + i]),
                tau: v[i],
                phi,
                theta,
            }
        })
        .collect()
}

/// Central-difference step for each parameter family.
pub fn step(index: usize, l: usize, siso: bool, period: f64) -> f64 {
    let block = index / l;
    match (block, siso) {
        (0, _) => 1e-4 * period,
        (1 | 2, false) => 1e-5,
        _ => 1e-6,
    }
}

/// Jacobian columns of an arbitrary complex-valued model by central
/// differences.
pub fn jacobian(
    params: &[f64],
    steps: impl Fn(usize) -> f64,
    model: impl Fn(&[f64]) -> Vec<Complex64>,
) -> Vec<Vec<Complex64>> {
    (0..params.len())
        .map(|i| {
            let h = steps(i);
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[i] += h;
            minus[i] -= h;
            let (a, b) = (model(&plus), model(&minus));
            a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect()
}

/// Fisher information `2/sigma^2 Re(J^H J)` of a Gaussian mean model from a
/// finite-difference Jacobian of the received samples.
pub fn fisher_fd(paths: &PathSet, array: &ArrayGeometry, pulse: &TrainingPulse, noise_var: f64) -> DMatrix<f64> {
    let siso = array.is_siso();
    let l = paths.len();
    let psi = flatten(paths.paths(), siso);
    let j = jacobian(
        &psi,
        |i| step(i, l, siso, pulse.period()),
        |v| mean(&unflatten(v, l, siso), array, pulse),
    );
    DMatrix::from_fn(psi.len(), psi.len(), |a, b| {
        let s: Complex64 = j[a].iter().zip(&j[b]).map(|(x, y)| x.conj() * y).sum();
        2.0 / noise_var * s.re
    })
}

/// Largest entry error relative to `sqrt(I_aa I_bb)`.
pub fn scaled_max_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let scale = (b[(i, i)] * b[(j, j)]).sqrt();
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// Deterministic pseudo-random well-spread scenario for oracle checks.
pub fn random_paths(l: usize, seed: u64, period: f64) -> PathSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let paths = (0..l)
        .map(|i| {
            PathParams::new(
                Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(0.0..TAU)),
                (2.0 + 3.0 * i as f64 + rng.random_range(0.0..2.0)) * period,
                rng.random_range(-3.0..3.0),
                rng.random_range(0.3..2.8),
            )
            .unwrap()
        })
        .collect();
    PathSet::new(paths).unwrap()
}
