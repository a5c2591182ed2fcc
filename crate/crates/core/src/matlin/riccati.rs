use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_square, compensated_dot, place_poles, solve_lyapunov, spectral_abscissa, Matrix,
    SymmetricMatrix,
};
use crate::error::{Error, Result};

const MAX_ITERS: usize = 100;
const RESIDUAL_TOL: f64 = 1e-10;
/// Residual floor relative to the size of the terms, the best a rounded `P` can do.
const BACKWARD_TOL: f64 = 1e3 * f64::EPSILON;
// once the residual contract holds, stop when an update no longer moves P
const STEP_TOL: f64 = 1e-14;

/// Stabilizing solution of `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` by Newton–Kleinman
/// iteration.
///
/// The iteration starts from a gain placing the closed-loop poles at
/// `−1 − i/n`, `i = 1..n`. If `(A, B)` is only stabilizable and `A` is already
/// Hurwitz, it starts from the zero gain instead.
pub fn solve_care(
    a: &Matrix,
    b: &Matrix,
    q: &SymmetricMatrix,
    r: &SymmetricMatrix,
) -> Result<SymmetricMatrix> {
    check_square(a, "CARE A")?;
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n || q.dim() != n || r.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "CARE: A {n}x{n}, B {}x{m}, Q {}x{}, R {}x{}",
            b.nrows(),
            q.dim(),
            q.dim(),
            r.dim(),
            r.dim()
        )));
    }
    let r_chol = Cholesky::new(r.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let r_inv_bt = r_chol.solve(&b.transpose());
    let s = b * &r_inv_bt; // B R⁻¹ Bᵀ

    let mut gain = initial_gain(a, b)?;
    let mut best: Option<(SymmetricMatrix, f64)> = None;

    for _ in 0..MAX_ITERS {
        let a_k = a - b * &gain;
        let forcing =
            SymmetricMatrix::symmetrize(q.as_matrix() + gain.transpose() * r.as_matrix() * &gain);
        let p = match solve_lyapunov(&a_k.transpose(), &forcing) {
            Ok(p) => p,
            Err(Error::NotHurwitz { .. }) => {
                return Err(Error::NoStabilizingSolution(
                    "Newton-Kleinman iterate lost stability".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        let res = care_residual(a, &s, q, &p);
        let moved = best
            .as_ref()
            .map(|(prev, _)| (p.as_matrix() - prev.as_matrix()).norm() / p.norm().max(1.0))
            .unwrap_or(f64::INFINITY);
        let improved = best.as_ref().is_none_or(|(_, r0)| res < *r0);
        if improved {
            best = Some((p.clone(), res));
        }
        let converged = res <= residual_tol(a, &s, q, &p);
        if converged && (moved <= STEP_TOL || !improved) {
            break;
        }
        gain = &r_inv_bt * p.as_matrix();
    }

    let (p, res) =
        best.ok_or_else(|| Error::NumericalFailure("CARE produced no iterate".into()))?;
    let tol = residual_tol(a, &s, q, &p);
    if !res.is_finite() || res > tol {
        return Err(Error::NumericalFailure(format!(
            "CARE residual {res:e} exceeds {tol:e}"
        )));
    }
    let closed = a - &s * p.as_matrix();
    let abscissa = spectral_abscissa(&closed)?;
    if abscissa >= 0.0 {
        return Err(Error::NoStabilizingSolution(format!(
            "closed loop spectral abscissa {abscissa:e}"
        )));
    }
    Ok(p)
}

/// `‖AᵀP + PA − P S P + Q‖_F` with `S = B R⁻¹ Bᵀ`, accumulated in doubled
/// precision.
pub(crate) fn care_residual(a: &Matrix, s: &Matrix, q: &Matrix, p: &Matrix) -> f64 {
    let n = a.nrows();
    let sp = s * p;
    Matrix::from_fn(n, n, |i, j| {
        let terms = (0..n).flat_map(|l| {
            [
                (a[(l, i)], p[(l, j)]),
                (p[(i, l)], a[(l, j)]),
                (-p[(i, l)], sp[(l, j)]),
            ]
        });
        compensated_dot(q[(i, j)], terms)
    })
    .norm()
}

/// Residual bound: `1e-10 · max(1, ‖Q‖_F)`, floored at what rounding `P`
/// alone can produce.
fn residual_tol(a: &Matrix, s: &Matrix, q: &SymmetricMatrix, p: &SymmetricMatrix) -> f64 {
    let p = p.as_matrix();
    let terms = 2.0 * (p * a).norm() + (p * s * p).norm();
    (RESIDUAL_TOL * q.norm().max(1.0)).max(BACKWARD_TOL * terms)
}

fn initial_gain(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let poles: Vec<Complex64> = (1..=n)
        .map(|i| Complex64::new(-1.0 - i as f64 / n as f64, 0.0))
        .collect();
    // fixed seed: the Riccati solution is unique, the start only needs to stabilize
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CA4E);
    match place_poles(a, b, &poles, &mut rng) {
        Ok(f) => Ok(f),
        Err(placement) => {
            if spectral_abscissa(a)? < 0.0 {
                Ok(Matrix::zeros(b.ncols(), n))
            } else {
                Err(Error::NoStabilizingSolution(format!(
                    "no stabilizing initial gain: {placement}"
                )))
            }
        }
    }
}
