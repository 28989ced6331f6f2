//! Specular multipath channels and receive-array geometry.
//!
//! A channel is a list of specular paths, each described by a complex gain,
//! a delay and a direction of arrival `(phi, theta)`. The direction unit
//! vector is `u = (sin theta cos phi, sin theta sin phi, cos theta)`, so
//! `theta` is measured from the +z axis and `theta = pi/2` is the horizontal
//! plane. Elements are isotropic; the response of element `m` at position
//! `p_m` is `exp(-j 2 pi / lambda <u, p_m>)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency used by the bundled experiments (Hz).
pub const DEFAULT_CARRIER_HZ: f64 = 3.5e9;

/// One specular path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// Complex gain (linear).
    pub alpha: Complex64,
    /// Delay in seconds.
    pub tau: f64,
    /// Azimuth in radians, `(-pi, pi]`.
    pub phi: f64,
    /// Elevation from the +z axis in radians, `[0, pi]`.
    pub theta: f64,
}

impl PathParams {
    pub fn new(alpha: Complex64, tau: f64, phi: f64, theta: f64) -> Result<Self> {
        let path = Self { alpha, tau, phi, theta };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::InvalidPath(format!("non-finite gain {}", self.alpha)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidPath(format!("delay {} must be >= 0", self.tau)));
        }
        if !(self.phi > -PI && self.phi <= PI) {
            return Err(Error::InvalidPath(format!("azimuth {} outside (-pi, pi]", self.phi)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::InvalidPath(format!("elevation {} outside [0, pi]", self.theta)));
        }
        Ok(())
    }
}

/// An ordered, non-empty list of specular paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<PathParams>,
}

impl PathSet {
    /// Builds a path set, rejecting empty lists, invalid paths and exact
    /// duplicates of `(tau, phi, theta)`.
    pub fn new(paths: Vec<PathParams>) -> Result<Self> {
        let set = Self::from_raw(paths)?;
        for (i, a) in set.paths.iter().enumerate() {
            for (j, b) in set.paths.iter().enumerate().skip(i + 1) {
                if a.tau == b.tau && a.phi == b.phi && a.theta == b.theta {
                    return Err(Error::InvalidPathSet(format!(
                        "paths {i} and {j} share delay and direction"
                    )));
                }
            }
        }
        Ok(set)
    }

    /// Builds a path set that may contain coincident paths. Used to study
    /// rank-deficient scenarios and as the input of [`merge_close_paths`].
    pub fn from_raw(paths: Vec<PathParams>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidPathSet("at least one path is required".into()));
        }
        for p in &paths {
            p.validate()?;
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathParams] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PathParams> {
        self.paths.iter()
    }

    pub fn min_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min)
    }

    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.tau).fold(0.0, f64::max)
    }

    /// Sum of gain magnitudes.
    pub fn total_gain(&self) -> f64 {
        self.paths.iter().map(|p| p.alpha.norm()).sum()
    }

    pub fn into_paths(self) -> Vec<PathParams> {
        self.paths
    }
}

impl<'a> IntoIterator for &'a PathSet {
    type Item = &'a PathParams;
    type IntoIter = std::slice::Iter<'a, PathParams>;

    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}

/// Receive-array element positions and carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 3]>,
    wavelength: f64,
    shape: Option<(usize, usize)>,
}

impl ArrayGeometry {
    pub fn from_positions(positions: Vec<[f64; 3]>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArray("at least one element is required".into()));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArray(format!("wavelength {wavelength} must be positive")));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArray("non-finite element position".into()));
        }
        Ok(Self {
            positions,
            wavelength,
            shape: None,
        })
    }

    /// Single isotropic element at the origin.
    pub fn single(wavelength: f64) -> Result<Self> {
        Self::from_positions(vec![[0.0; 3]], wavelength)
    }

    /// Planar `rows x cols` array in the x-z plane with half-wavelength
    /// spacing, centred on the origin. Columns run along x, rows along z.
    pub fn rectangular(rows: usize, cols: usize, wavelength: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArray(format!("empty {rows}x{cols} array")));
        }
        let d = wavelength / 2.0;
        let x0 = (cols as f64 - 1.0) / 2.0;
        let z0 = (rows as f64 - 1.0) / 2.0;
        let mut positions = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                positions.push([(c as f64 - x0) * d, 0.0, (r as f64 - z0) * d]);
            }
        }
        let mut array = Self::from_positions(positions, wavelength)?;
        array.shape = Some((rows, cols));
        Ok(array)
    }

    pub fn wavelength_for(carrier_hz: f64) -> f64 {
        SPEED_OF_LIGHT / carrier_hz
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// `(rows, cols)` when built by [`ArrayGeometry::rectangular`].
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// One element: angles are not observable.
    pub fn is_siso(&self) -> bool {
        self.positions.len() == 1
    }

    /// Largest distance between two elements, in wavelengths.
    pub fn extent_wavelengths(&self) -> f64 {
        let mut best = 0.0_f64;
        for a in &self.positions {
            for b in &self.positions {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                best = best.max(d);
            }
        }
        best / self.wavelength
    }

    fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }
}

fn direction(phi: f64, theta: f64) -> [f64; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [st * cp, st * sp, ct]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Response of every element towards `(phi, theta)`.
pub fn steering_vector(array: &ArrayGeometry, phi: f64, theta: f64) -> Vec<Complex64> {
    let u = direction(phi, theta);
    let k = array.wavenumber();
    array
        .positions
        .iter()
        .map(|p| Complex64::from_polar(1.0, -k * dot(&u, p)))
        .collect()
}

/// Steering vector together with its exact derivatives with respect to
/// azimuth and elevation.
#[derive(Debug, Clone)]
pub struct SteeringDerivatives {
    pub response: Vec<Complex64>,
    pub d_phi: Vec<Complex64>,
    pub d_theta: Vec<Complex64>,
}

pub fn steering_with_derivatives(array: &ArrayGeometry, phi: f64, theta: f64) -> SteeringDerivatives {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let u = [st * cp, st * sp, ct];
    let du_phi = [-st * sp, st * cp, 0.0];
    let du_theta = [ct * cp, ct * sp, -st];
    let k = array.wavenumber();
    let m = array.len();
    let mut out = SteeringDerivatives {
        response: Vec::with_capacity(m),
        d_phi: Vec::with_capacity(m),
        d_theta: Vec::with_capacity(m),
    };
    for p in &array.positions {
        let a = Complex64::from_polar(1.0, -k * dot(&u, p));
        // d/dx exp(-j k <u, p>) = -j k <du/dx, p> exp(...)
        out.d_phi.push(Complex64::new(0.0, -k * dot(&du_phi, p)) * a);
        out.d_theta.push(Complex64::new(0.0, -k * dot(&du_theta, p)) * a);
        out.response.push(a);
    }
    out
}

/// `(d a / d phi, d a / d theta)` for every element.
pub fn steering_derivatives(array: &ArrayGeometry, phi: f64, theta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = steering_with_derivatives(array, phi, theta);
    (d.d_phi, d.d_theta)
}

/// Channel frequency response `H_m(f) = sum_l alpha_l a_m(phi_l, theta_l) exp(-j 2 pi f tau_l)`
/// at baseband offset `f`.
pub fn channel_frequency_response(paths: &PathSet, array: &ArrayGeometry, f: f64) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); array.len()];
    for p in paths {
        let a = steering_vector(array, p.phi, p.theta);
        let g = p.alpha * Complex64::from_polar(1.0, -TAU * f * p.tau);
        for (hm, am) in h.iter_mut().zip(&a) {
            *hm += g * am;
        }
    }
    h
}

/// Wraps an angle difference into `(-pi, pi]`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Result of [`merge_close_paths`].
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub paths: PathSet,
    /// For each output path, the input indices merged into it.
    pub groups: Vec<Vec<usize>>,
    /// Output indices whose summed gain nearly cancelled (|sum| below 1e-9
    /// times the sum of the merged magnitudes).
    pub cancelled: Vec<usize>,
}

/// Replaces clusters of paths that lie within `delay_tol` in delay and
/// `angle_tol` in both azimuth and elevation by a single path.
///
/// Clusters are the connected components of the "close" relation. A merged
/// path carries the summed complex gain and the gain-magnitude-weighted mean
/// of `(tau, phi, theta)`. Merging repeats until no two output paths are
/// close, so the operation is idempotent.
pub fn merge_close_paths(paths: &PathSet, delay_tol: f64, angle_tol: f64) -> Result<MergeOutcome> {
    if !(delay_tol > 0.0 && angle_tol > 0.0) {
        return Err(Error::InvalidPathSet(format!(
            "merge tolerances must be positive (delay {delay_tol}, angle {angle_tol})"
        )));
    }
    let mut current: Vec<PathParams> = paths.paths.clone();
    let mut groups: Vec<Vec<usize>> = (0..current.len()).map(|i| vec![i]).collect();
    let mut magnitudes: Vec<f64> = current.iter().map(|p| p.alpha.norm()).collect();

    loop {
        let comps = close_components(&current, delay_tol, angle_tol);
        if comps.len() == current.len() {
            break;
        }
        let mut next = Vec::with_capacity(comps.len());
        let mut next_groups = Vec::with_capacity(comps.len());
        let mut next_mags = Vec::with_capacity(comps.len());
        for comp in comps {
            let members: Vec<&PathParams> = comp.iter().map(|&i| &current[i]).collect();
            next.push(merge_group(&members));
            let mut g: Vec<usize> = comp.iter().flat_map(|&i| groups[i].clone()).collect();
            g.sort_unstable();
            next_groups.push(g);
            next_mags.push(comp.iter().map(|&i| magnitudes[i]).sum());
        }
        current = next;
        groups = next_groups;
        magnitudes = next_mags;
    }

    let cancelled = current
        .iter()
        .zip(&magnitudes)
        .enumerate()
        .filter(|(_, (p, &mag))| mag > 0.0 && p.alpha.norm() < 1e-9 * mag)
        .map(|(i, _)| i)
        .collect();
    Ok(MergeOutcome {
        paths: PathSet::from_raw(current)?,
        groups,
        cancelled,
    })
}

fn is_close(a: &PathParams, b: &PathParams, delay_tol: f64, angle_tol: f64) -> bool {
    (a.tau - b.tau).abs() <= delay_tol
        && wrap_angle(a.phi - b.phi).abs() <= angle_tol
        && (a.theta - b.theta).abs() <= angle_tol
}

fn close_components(paths: &[PathParams], delay_tol: f64, angle_tol: f64) -> Vec<Vec<usize>> {
    let n = paths.len();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if label[start].is_some() {
            continue;
        }
        let id = comps.len();
        let mut comp = vec![start];
        label[start] = Some(id);
        let mut head = 0;
        while head < comp.len() {
            let i = comp[head];
            head += 1;
            for j in 0..n {
                if label[j].is_none() && is_close(&paths[i], &paths[j], delay_tol, angle_tol) {
                    label[j] = Some(id);
                    comp.push(j);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn merge_group(members: &[&PathParams]) -> PathParams {
    if members.len() == 1 {
        return *members[0];
    }
    let alpha: Complex64 = members.iter().map(|p| p.alpha).sum();
    let total: f64 = members.iter().map(|p| p.alpha.norm()).sum();
    let weights: Vec<f64> = if total > 0.0 {
        members.iter().map(|p| p.alpha.norm() / total).collect()
    } else {
        vec![1.0 / members.len() as f64; members.len()]
    };
    let reference = members[0].phi;
    let mut tau = 0.0;
    let mut dphi = 0.0;
    let mut theta = 0.0;
    for (p, w) in members.iter().zip(&weights) {
        tau += w * p.tau;
        dphi += w * wrap_angle(p.phi - reference);
        theta += w * p.theta;
    }
    let mut phi = wrap_angle(reference + dphi);
    if phi <= -PI {
        phi = PI;
    }
    PathParams {
        alpha,
        tau: tau.max(0.0),
        phi,
        theta: theta.clamp(0.0, PI),
    }
}
