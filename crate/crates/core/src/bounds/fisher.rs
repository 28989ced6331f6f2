use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{steering_with_derivatives, ArrayGeometry, PathSet};
use crate::error::{Error, Result};
use crate::signal::TrainingPulse;

/// Real parameter families of a path, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Delay,
    Azimuth,
    Elevation,
    GainRe,
    GainIm,
}

impl ParamKind {
    pub const SIMO: [ParamKind; 5] = [
        ParamKind::Delay,
        ParamKind::Azimuth,
        ParamKind::Elevation,
        ParamKind::GainRe,
        ParamKind::GainIm,
    ];
    pub const SISO: [ParamKind; 3] = [ParamKind::Delay, ParamKind::GainRe, ParamKind::GainIm];
}

/// Ordering of the real parameter vector: `[tau; phi; theta; Re a; Im a]`
/// (each block of length `L`), or `[tau; Re a; Im a]` without angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterLayout {
    paths: usize,
    siso: bool,
}

impl ParameterLayout {
    pub fn new(paths: usize, siso: bool) -> Self {
        Self { paths, siso }
    }

    pub fn for_array(paths: usize, array: &ArrayGeometry) -> Self {
        Self::new(paths, array.is_siso())
    }

    pub fn kinds(&self) -> &'static [ParamKind] {
        if self.siso {
            &ParamKind::SISO
        } else {
            &ParamKind::SIMO
        }
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn is_siso(&self) -> bool {
        self.siso
    }

    pub fn dim(&self) -> usize {
        self.kinds().len() * self.paths
    }

    /// Position of parameter `kind` of path `l`, if present in this layout.
    pub fn index(&self, kind: ParamKind, l: usize) -> Option<usize> {
        let block = self.kinds().iter().position(|&k| k == kind)?;
        Some(block * self.paths + l)
    }

    /// `(kind, path)` stored at position `i`.
    pub fn parameter(&self, i: usize) -> (ParamKind, usize) {
        (self.kinds()[i / self.paths], i % self.paths)
    }
}

/// Fisher information of the real path parameters, including the
/// `2 / sigma_w^2` factor.
#[derive(Debug, Clone)]
pub struct FisherMatrix {
    pub matrix: DMatrix<f64>,
    pub layout: ParameterLayout,
    pub noise_var: f64,
}

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The `L x L` sub-block coupling `row` and `col` parameters.
    pub fn block(&self, row: ParamKind, col: ParamKind) -> Option<DMatrix<f64>> {
        let l = self.layout.paths();
        let r0 = self.layout.index(row, 0)?;
        let c0 = self.layout.index(col, 0)?;
        Some(self.matrix.view((r0, c0), (l, l)).into_owned())
    }
}

/// Per-path vectors shared by the Fisher matrix and the separation
/// diagnostics.
pub(crate) struct PathVectors {
    /// `s(t_n - tau_l)`
    pub pulse: Vec<Vec<f64>>,
    /// `s'(t_n - tau_l)`
    pub pulse_dot: Vec<Vec<f64>>,
    pub steering: Vec<Vec<Complex64>>,
    pub steering_dphi: Vec<Vec<Complex64>>,
    pub steering_dtheta: Vec<Vec<Complex64>>,
}

impl PathVectors {
    pub fn new(paths: &PathSet, array: &ArrayGeometry, pulse: &TrainingPulse) -> Self {
        let mut out = Self {
            pulse: Vec::with_capacity(paths.len()),
            pulse_dot: Vec::with_capacity(paths.len()),
            steering: Vec::with_capacity(paths.len()),
            steering_dphi: Vec::with_capacity(paths.len()),
            steering_dtheta: Vec::with_capacity(paths.len()),
        };
        for p in paths {
            out.pulse.push(pulse.shifted_samples(p.tau));
            out.pulse_dot.push(pulse.shifted_derivative_samples(p.tau));
            let d = steering_with_derivatives(array, p.phi, p.theta);
            out.steering.push(d.response);
            out.steering_dphi.push(d.d_phi);
            out.steering_dtheta.push(d.d_theta);
        }
        out
    }
}

pub(crate) fn real_dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `x^H y`
pub(crate) fn cdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Assembles the Fisher information matrix of the path parameters.
///
/// Every derivative of the mean factors as `c * (array vector) x (time
/// vector)`, so each entry is `2/sigma^2 Re{conj(c_u) c_v (A_u^H A_v)(T_u^T T_v)}`.
/// A single-element array yields the `3L` layout without angles.
pub fn build_fisher(
    paths: &PathSet,
    array: &ArrayGeometry,
    pulse: &TrainingPulse,
    noise_var: f64,
) -> Result<FisherMatrix> {
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::InvalidPulse(format!(
            "noise variance {noise_var} must be positive for a Fisher matrix"
        )));
    }
    let layout = ParameterLayout::for_array(paths.len(), array);
    let vectors = PathVectors::new(paths, array, pulse);
    let alphas: Vec<Complex64> = paths.iter().map(|p| p.alpha).collect();
    let l_count = paths.len();

    // Factor table: (coefficient, array vector id, time vector id) where
    // array ids are [a_l | da_phi_l | da_theta_l] and time ids [s_l | s'_l].
    let factor = |i: usize| -> (Complex64, usize, usize) {
        let (kind, l) = layout.parameter(i);
        let one = Complex64::new(1.0, 0.0);
        match kind {
            ParamKind::Delay => (-alphas[l], l, l_count + l),
            ParamKind::Azimuth => (alphas[l], l_count + l, l),
            ParamKind::Elevation => (alphas[l], 2 * l_count + l, l),
            ParamKind::GainRe => (one, l, l),
            ParamKind::GainIm => (Complex64::new(0.0, 1.0), l, l),
        }
    };

    let array_vecs: Vec<&Vec<Complex64>> = vectors
        .steering
        .iter()
        .chain(&vectors.steering_dphi)
        .chain(&vectors.steering_dtheta)
        .collect();
    let time_vecs: Vec<&Vec<f64>> = vectors.pulse.iter().chain(&vectors.pulse_dot).collect();

    let na = array_vecs.len();
    let mut array_gram = DMatrix::from_element(na, na, Complex64::new(0.0, 0.0));
    for i in 0..na {
        for j in i..na {
            let v = cdot(array_vecs[i], array_vecs[j]);
            array_gram[(i, j)] = v;
            array_gram[(j, i)] = v.conj();
        }
    }
    let nt = time_vecs.len();
    let mut time_gram = DMatrix::zeros(nt, nt);
    for i in 0..nt {
        for j in i..nt {
            let v = real_dot(time_vecs[i], time_vecs[j]);
            time_gram[(i, j)] = v;
            time_gram[(j, i)] = v;
        }
    }

    let dim = layout.dim();
    let scale = 2.0 / noise_var;
    let mut matrix = DMatrix::zeros(dim, dim);
    for u in 0..dim {
        let (cu, au, tu) = factor(u);
        for v in u..dim {
            let (cv, av, tv) = factor(v);
            let value = scale * (cu.conj() * cv * array_gram[(au, av)] * time_gram[(tu, tv)]).re;
            matrix[(u, v)] = value;
            matrix[(v, u)] = value;
        }
    }
    Ok(FisherMatrix {
        matrix,
        layout,
        noise_var,
    })
}

/// Gradient of `H_m(f)` with respect to the real path parameters, for every
/// antenna `m` (one vector of length `5L`, or `3L` without angles, per
/// antenna).
pub fn g_vectors(paths: &PathSet, array: &ArrayGeometry, f: f64) -> Vec<Vec<Complex64>> {
    let layout = ParameterLayout::for_array(paths.len(), array);
    let dim = layout.dim();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; array.len()];
    let j = Complex64::new(0.0, 1.0);
    let dtau = Complex64::new(0.0, -TAU * f);
    for (l, p) in paths.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -TAU * f * p.tau);
        let d = steering_with_derivatives(array, p.phi, p.theta);
        for (m, g) in out.iter_mut().enumerate() {
            let a = d.response[m] * phase;
            for &kind in layout.kinds() {
                let value = match kind {
                    ParamKind::Delay => dtau * p.alpha * a,
                    ParamKind::Azimuth => p.alpha * d.d_phi[m] * phase,
                    ParamKind::Elevation => p.alpha * d.d_theta[m] * phase,
                    ParamKind::GainRe => a,
                    ParamKind::GainIm => j * a,
                };
                g[layout.index(kind, l).expect("kind from layout")] = value;
            }
        }
    }
    out
}

/// Gradient vector for antenna `m`; see [`g_vectors`].
pub fn g_vector(paths: &PathSet, array: &ArrayGeometry, m: usize, f: f64) -> Vec<Complex64> {
    g_vectors(paths, array, f).swap_remove(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathParams;
    use crate::signal::pulse_energy;

    const T: f64 = 50e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn layout_indices() {
        let simo = ParameterLayout::new(3, false);
        assert_eq!(simo.dim(), 15);
        assert_eq!(simo.index(ParamKind::Elevation, 1), Some(7));
        assert_eq!(simo.parameter(13), (ParamKind::GainIm, 1));
        let siso = ParameterLayout::new(3, true);
        assert_eq!(siso.dim(), 9);
        assert_eq!(siso.index(ParamKind::Azimuth, 0), None);
        assert_eq!(siso.index(ParamKind::GainRe, 2), Some(5));
    }

    #[test]
    fn single_path_siso_entries() {
        let pulse = TrainingPulse::new(0.2, T, 2, 128).unwrap();
        let alpha = c(0.6, -0.3);
        let paths = PathSet::new(vec![PathParams::new(alpha, 2e-7, 0.0, 1.0).unwrap()]).unwrap();
        let array = ArrayGeometry::single(0.1).unwrap();
        let sigma2 = 0.01;
        let fim = build_fisher(&paths, &array, &pulse, sigma2).unwrap();
        assert_eq!(fim.dim(), 3);
        let s = pulse.shifted_samples(2e-7);
        let sd = pulse.shifted_derivative_samples(2e-7);
        let es: f64 = s.iter().map(|x| x * x).sum();
        let esd: f64 = sd.iter().map(|x| x * x).sum();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(fim.matrix[(1, 1)], 2.0 / sigma2 * es) < 1e-13);
        assert!(rel(fim.matrix[(2, 2)], 2.0 / sigma2 * es) < 1e-13);
        assert!(rel(fim.matrix[(0, 0)], 2.0 / sigma2 * alpha.norm_sqr() * esd) < 1e-13);
        // Re / Im gains are orthogonal
        assert_eq!(fim.matrix[(1, 2)], 0.0);
        assert!((es - pulse_energy(&pulse)).abs() < 1e-3 * es);
    }

    #[test]
    fn doubling_gain_scales_delay_block_only() {
        let pulse = TrainingPulse::new(0.2, T, 2, 128).unwrap();
        let array = ArrayGeometry::rectangular(2, 4, 0.1).unwrap();
        let mk = |k: f64| {
            PathSet::new(vec![
                PathParams::new(c(0.5 * k, 0.2 * k), 1e-7, 0.4, 1.2).unwrap(),
                PathParams::new(c(-0.3 * k, 0.1 * k), 6e-7, 1.9, 1.7).unwrap(),
            ])
            .unwrap()
        };
        let a = build_fisher(&mk(1.0), &array, &pulse, 0.1).unwrap();
        let b = build_fisher(&mk(2.0), &array, &pulse, 0.1).unwrap();
        let tt_a = a.block(ParamKind::Delay, ParamKind::Delay).unwrap();
        let tt_b = b.block(ParamKind::Delay, ParamKind::Delay).unwrap();
        assert!((tt_b - tt_a * 4.0).norm() < 1e-10 * b.matrix.norm());
        let rr_a = a.block(ParamKind::GainRe, ParamKind::GainRe).unwrap();
        let rr_b = b.block(ParamKind::GainRe, ParamKind::GainRe).unwrap();
        assert_eq!(rr_a, rr_b);
    }

    #[test]
    fn g_vector_single_unit_path() {
        let paths = PathSet::new(vec![PathParams::new(c(1.0, 0.0), 0.0, 0.0, 1.0).unwrap()]).unwrap();
        let array = ArrayGeometry::single(0.1).unwrap();
        let f = 3e6;
        let g = g_vector(&paths, &array, 0, f);
        let expected = [c(0.0, -TAU * f), c(1.0, 0.0), c(0.0, 1.0)];
        for (x, y) in g.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-9 * y.norm());
        }
        let g0 = g_vector(&paths, &array, 0, 0.0);
        assert_eq!(g0[0], c(0.0, 0.0));
    }
}
