use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::{
    check_finite, check_square, compensated_dot, spectral_abscissa, Matrix, SymmetricMatrix,
};
use crate::error::{Error, Result};

/// Largest dimension solved through the vectorized Kronecker system; larger
/// problems go through a complex Schur reduction.
pub const KRONECKER_MAX_DIM: usize = 20;

const RESIDUAL_TOL: f64 = 1e-10;
/// Residual floor relative to `‖A‖_F ‖P‖_F`, the best a rounded `P` can do.
const BACKWARD_TOL: f64 = 1e3 * f64::EPSILON;
const MAX_REFINEMENTS: usize = 4;

/// Unique solution `P` of `A P + P Aᵀ = −Q` for Hurwitz `A`.
///
/// The result is symmetrized, refined, and checked against the residual
/// contract `‖A P + P Aᵀ + Q‖_F ≤ 1e-10 · max(1, ‖Q‖_F)`, floored at
/// `1e3 · ε · ‖A‖_F ‖P‖_F` for badly scaled `A`.
pub fn solve_lyapunov(a: &Matrix, q: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_square(a, "Lyapunov A")?;
    check_finite(a, "Lyapunov A")?;
    let k = a.nrows();
    if q.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "Lyapunov: A is {k}x{k} but Q is {0}x{0}",
            q.dim()
        )));
    }
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= 0.0 {
        return Err(Error::NotHurwitz { abscissa });
    }
    let solver = if k <= KRONECKER_MAX_DIM {
        Solver::kronecker(a)?
    } else {
        Solver::schur(a)?
    };
    let mut p = SymmetricMatrix::symmetrize(solver.solve(q.as_matrix())?).into_matrix();
    // refinement against a compensated residual recovers accuracy lost to
    // ill-conditioned or badly scaled A
    for _ in 0..MAX_REFINEMENTS {
        let r = residual_compensated(a, &p, q.as_matrix());
        let dp = solver.solve(&r)?;
        let dp = (&dp + dp.transpose()) * 0.5;
        p += &dp;
        if dp.norm().is_nan() || dp.norm() <= f64::EPSILON * p.norm() {
            break;
        }
    }
    let p = SymmetricMatrix::symmetrize(p);
    let res = residual_compensated(a, p.as_matrix(), q.as_matrix()).norm();
    let tol = (RESIDUAL_TOL * q.norm().max(1.0)).max(BACKWARD_TOL * a.norm() * p.norm());
    if !res.is_finite() || res > tol {
        return Err(Error::NumericalFailure(format!(
            "Lyapunov residual {res:e} exceeds {tol:e}"
        )));
    }
    Ok(p)
}

/// `‖A P + P Aᵀ + Q‖_F`.
#[cfg(test)]
pub(crate) fn lyapunov_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    residual_compensated(a, p, q).norm()
}

/// `Q + A P + P Aᵀ` with every entry accumulated in doubled precision.
fn residual_compensated(a: &Matrix, p: &Matrix, q: &Matrix) -> Matrix {
    let k = a.nrows();
    Matrix::from_fn(k, k, |i, j| {
        let terms = (0..k).flat_map(|l| [(a[(i, l)], p[(l, j)]), (p[(i, l)], a[(j, l)])]);
        compensated_dot(q[(i, j)], terms)
    })
}

/// Factored Lyapunov operator of a fixed `A`, reusable across right-hand sides.
enum Solver {
    Kronecker {
        k: usize,
        lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    },
    Schur {
        u: DMatrix<Complex64>,
        t: DMatrix<Complex64>,
    },
}

impl Solver {
    /// `(I ⊗ A + A ⊗ I) vec(P) = −vec(Q)` in column-major vec ordering.
    fn kronecker(a: &Matrix) -> Result<Self> {
        let k = a.nrows();
        let mut op = DMatrix::<f64>::zeros(k * k, k * k);
        // row index i + j·k holds (AP + PAᵀ)_{ij}
        for j in 0..k {
            for i in 0..k {
                let row = i + j * k;
                for l in 0..k {
                    op[(row, l + j * k)] += a[(i, l)];
                    op[(row, i + l * k)] += a[(j, l)];
                }
            }
        }
        Ok(Solver::Kronecker { k, lu: op.lu() })
    }

    /// Complex Schur form `A = U T Uᴴ` for Bartels–Stewart.
    fn schur(a: &Matrix) -> Result<Self> {
        let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));
        let schur = Schur::try_new(ac, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
        let (u, t) = schur.unpack();
        Ok(Solver::Schur { u, t })
    }

    /// `P` with `A P + P Aᵀ = −Q`.
    fn solve(&self, q: &Matrix) -> Result<Matrix> {
        match self {
            Solver::Kronecker { k, lu } => {
                let rhs = -nalgebra::DVector::from_column_slice(q.as_slice());
                let x = lu.solve(&rhs).ok_or_else(|| {
                    Error::NumericalFailure("singular Kronecker Lyapunov system".into())
                })?;
                Ok(Matrix::from_column_slice(*k, *k, x.as_slice()))
            }
            Solver::Schur { u, t } => schur_back_substitution(u, t, q),
        }
    }
}

/// Solve `T Y + Y Tᴴ = −Uᴴ Q U` by back substitution, then `P = Re(U Y Uᴴ)`.
fn schur_back_substitution(
    u: &DMatrix<Complex64>,
    t: &DMatrix<Complex64>,
    q: &Matrix,
) -> Result<Matrix> {
    let k = t.nrows();
    let qc: DMatrix<Complex64> = q.map(|v| Complex64::new(v, 0.0));
    let c = u.adjoint() * qc * u;
    let mut y = DMatrix::<Complex64>::zeros(k, k);
    for i in (0..k).rev() {
        for j in (0..k).rev() {
            let mut acc = -c[(i, j)];
            for l in (i + 1)..k {
                acc -= t[(i, l)] * y[(l, j)];
            }
            for l in (j + 1)..k {
                acc -= y[(i, l)] * t[(j, l)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            if denom.norm() == 0.0 {
                return Err(Error::NumericalFailure(
                    "Schur Lyapunov pivot vanished".into(),
                ));
            }
            y[(i, j)] = acc / denom;
        }
    }
    let p = u * y * u.adjoint();
    Ok(p.map(|z| z.re))
}

#[cfg(test)]
fn solve_kronecker(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    Solver::kronecker(a)?.solve(q)
}

#[cfg(test)]
fn solve_schur(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    Solver::schur(a)?.solve(q)
}

/// Differential of the Lyapunov operator at `(A, Q)` along `(V, W)`:
/// `𝕃(A, V·𝕃(A,Q) + 𝕃(A,Q)·Vᵀ + W)`.
pub fn lyapunov_differential(
    a: &Matrix,
    q: &SymmetricMatrix,
    v: &Matrix,
    w: &SymmetricMatrix,
) -> Result<SymmetricMatrix> {
    if v.shape() != a.shape() || w.dim() != a.nrows() {
        return Err(Error::DimensionMismatch(
            "Lyapunov differential: V and W must match A".into(),
        ));
    }
    let p = solve_lyapunov(a, q)?;
    let vp = v * p.as_matrix();
    let forcing = SymmetricMatrix::symmetrize(&vp + vp.transpose() + w.as_matrix());
    solve_lyapunov(a, &forcing)
}
