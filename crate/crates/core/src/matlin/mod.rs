//! Dense real-matrix kernels: Lyapunov and Riccati solvers, spectral
//! quantities, controllability tests, pole placement and SPD solves.
//!
//! Every tolerance here is relative to `max(1, scale)` of the relevant input
//! so the same thresholds behave on tiny and large instances.

mod dense;
mod lyapunov;
mod placement;
mod riccati;

pub use dense::{
    compensated_dot, controllability_matrix, eigenvalues, is_controllable, is_observable,
    kalman_singular_values, observability_matrix, spd_solve, spectral_abscissa, spectral_norm,
    sqrt_psd, symmetric_eigenvalues, DEFAULT_RANK_TOL,
};
pub use lyapunov::{lyapunov_differential, solve_lyapunov, KRONECKER_MAX_DIM};
pub use placement::place_poles;
pub use riccati::solve_care;

use nalgebra::DMatrix;
use std::ops::Deref;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Square real matrix that is symmetric by construction.
///
/// The constructor replaces the input with `(M + Mᵀ)/2`, so the stored value is
/// exactly symmetric. Inputs whose asymmetry exceeds `1e-12` of their largest
/// absolute entry are rejected by [`SymmetricMatrix::new`];
/// [`SymmetricMatrix::symmetrize`] accepts anything square.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

/// Relative asymmetry admitted by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

impl SymmetricMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m, "symmetric matrix")?;
        check_finite(&m, "symmetric matrix")?;
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::DimensionMismatch(format!(
                "matrix is not symmetric (asymmetry {asym:e} vs scale {scale:e})"
            )));
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetric part of `m`. Panics if `m` is not square.
    pub fn symmetrize(m: Matrix) -> Self {
        assert!(m.is_square(), "symmetrize: matrix must be square");
        let t = m.transpose();
        SymmetricMatrix((m + t) * 0.5)
    }

    pub fn identity(k: usize) -> Self {
        SymmetricMatrix(Matrix::identity(k, k))
    }

    pub fn zeros(k: usize) -> Self {
        SymmetricMatrix(Matrix::zeros(k, k))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymmetricMatrix(Matrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(d),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.0).min()
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.0).max()
    }

    /// Positive semidefinite up to `tol · max(1, ‖M‖₂)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let ev = symmetric_eigenvalues(&self.0);
        let scale = ev.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        ev.min() >= -tol * scale
    }

    /// Positive definite: Cholesky succeeds and the smallest eigenvalue exceeds
    /// `tol · max(1, ‖M‖₂)`.
    pub fn is_pd(&self, tol: f64) -> bool {
        if nalgebra::Cholesky::new(self.0.clone()).is_none() {
            return false;
        }
        let ev = symmetric_eigenvalues(&self.0);
        let scale = ev.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        ev.min() > tol * scale
    }
}

impl Deref for SymmetricMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl From<SymmetricMatrix> for Matrix {
    fn from(s: SymmetricMatrix) -> Matrix {
        s.0
    }
}

pub(crate) fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Frobenius inner product `tr(AᵀB)`.
pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.dot(b)
}

/// Block diagonal `diag(a, b)`.
pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Matrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// 2×2 block matrix `[[a, b], [c, d]]`; block shapes must tile.
pub fn block2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    debug_assert_eq!(a.nrows(), b.nrows());
    debug_assert_eq!(c.nrows(), d.nrows());
    debug_assert_eq!(a.ncols(), c.ncols());
    debug_assert_eq!(b.ncols(), d.ncols());
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    let mut out = Matrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((0, c1), (r1, c2)).copy_from(b);
    out.view_mut((r1, 0), (r2, c1)).copy_from(c);
    out.view_mut((r1, c1), (r2, c2)).copy_from(d);
    out
}
