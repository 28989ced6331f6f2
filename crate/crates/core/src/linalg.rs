//! Symmetric positive-definite solves for information matrices.
//!
//! The matrix is first equilibrated, `B = D^-1 A D^-1` with
//! `D = diag(sqrt(A_ii))`, so that parameters with very different units
//! (seconds, radians, linear gains) do not inflate the condition number.
//! The condition number reported is the exact 2-norm condition number of
//! `B`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default condition-number threshold above which a matrix is treated as
/// singular.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone)]
enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    /// Eigenvectors and inverted eigenvalues, with the smallest eigenvalues
    /// zeroed.
    Truncated {
        vectors: DMatrix<f64>,
        inv_values: DVector<f64>,
    },
}

/// Factorization of a real symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    inv_scale: DVector<f64>,
    factor: Factor,
    condition: f64,
    truncated: usize,
}

impl SpdSolver {
    /// Factors `matrix`, failing with [`Error::SingularFisher`] when the
    /// equilibrated condition number exceeds `threshold`.
    pub fn new(matrix: &DMatrix<f64>, threshold: f64) -> Result<Self> {
        Self::build(matrix, threshold, false)
    }

    /// Like [`SpdSolver::new`] but falls back to an eigenvalue-truncated
    /// pseudo-inverse (eigenvalues below `lambda_max / threshold` dropped)
    /// instead of failing.
    pub fn new_truncated(matrix: &DMatrix<f64>, threshold: f64) -> Result<Self> {
        Self::build(matrix, threshold, true)
    }

    fn build(matrix: &DMatrix<f64>, threshold: f64, allow_truncation: bool) -> Result<Self> {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "matrix must be square");
        let inv_scale = DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let d = matrix[(i, i)];
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            }),
        );
        let mut scaled = matrix.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= inv_scale[i] * inv_scale[j];
            }
        }
        // exact symmetry before factorization
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (scaled[(i, j)] + scaled[(j, i)]);
                scaled[(i, j)] = v;
                scaled[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(scaled.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };

        if condition <= threshold {
            if let Some(chol) = Cholesky::new(scaled) {
                return Ok(Self {
                    inv_scale,
                    factor: Factor::Cholesky(chol),
                    condition,
                    truncated: 0,
                });
            }
        }
        if !allow_truncation {
            return Err(Error::SingularFisher { condition, threshold });
        }
        let cutoff = max / threshold;
        let mut truncated = 0;
        let inv_values = eig.eigenvalues.map(|v| {
            if v > cutoff {
                1.0 / v
            } else {
                truncated += 1;
                0.0
            }
        });
        Ok(Self {
            inv_scale,
            factor: Factor::Truncated {
                vectors: eig.eigenvectors,
                inv_values,
            },
            condition,
            truncated,
        })
    }

    /// 2-norm condition number of the equilibrated matrix.
    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Number of eigen-directions dropped by the pseudo-solve (0 for a
    /// regular Cholesky factorization).
    pub fn truncated_directions(&self) -> usize {
        self.truncated
    }

    pub fn dim(&self) -> usize {
        self.inv_scale.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let scaled = b.component_mul(&self.inv_scale);
        let y = match &self.factor {
            Factor::Cholesky(chol) => chol.solve(&scaled),
            Factor::Truncated { vectors, inv_values } => {
                let coeffs = vectors.tr_mul(&scaled).component_mul(inv_values);
                vectors * coeffs
            }
        };
        y.component_mul(&self.inv_scale)
    }

    /// `g^H A^-1 g` for a complex vector `g` (real for real symmetric `A`).
    pub fn quadratic_form(&self, g: &[Complex64]) -> f64 {
        let n = self.dim();
        assert_eq!(g.len(), n);
        let re = DVector::from_iterator(n, g.iter().map(|z| z.re));
        let im = DVector::from_iterator(n, g.iter().map(|z| z.im));
        re.dot(&self.solve(&re)) + im.dot(&self.solve(&im))
    }
}
