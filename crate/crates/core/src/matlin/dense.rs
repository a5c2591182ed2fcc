use nalgebra::{Cholesky, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use super::{check_finite, check_square, Matrix, SymmetricMatrix};
use crate::error::{Error, Result};

/// Default relative rank tolerance for the Kalman-matrix tests.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const SCHUR_MAX_ITERS: usize = 10_000;

/// Eigenvalues of a real square matrix via the real Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    check_square(m, "eigenvalue argument")?;
    check_finite(m, "eigenvalue argument")?;
    let schur =
        Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITERS).ok_or(Error::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigenvalues of the symmetric part of `m`, unsorted.
pub fn symmetric_eigenvalues(m: &Matrix) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues from
/// roundoff are clamped to zero.
pub fn sqrt_psd(m: &SymmetricMatrix) -> Matrix {
    let eig = SymmetricEigen::new(m.as_matrix().clone());
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let u = &eig.eigenvectors;
    u * Matrix::from_diagonal(&d) * u.transpose()
}

/// Kalman controllability matrix `[B, AB, …, A^{n−1}B]`.
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        if k + 1 < n {
            block = a * block;
        }
    }
    out
}

/// Kalman observability matrix `[C; CA; …; CA^{n−1}]`.
pub fn observability_matrix(a: &Matrix, c: &Matrix) -> Matrix {
    controllability_matrix(&a.transpose(), &c.transpose()).transpose()
}

/// Smallest and largest singular value of a Kalman matrix with `n` rows
/// (or columns, for the observability form). Returns `(min, max)`.
pub fn kalman_singular_values(kalman: &Matrix) -> (f64, f64) {
    let sv = kalman.singular_values();
    let rank_dim = kalman.nrows().min(kalman.ncols());
    if sv.len() < rank_dim || sv.is_empty() {
        return (0.0, 0.0);
    }
    (sv.min(), sv.max())
}

fn full_rank(kalman: &Matrix, states: usize, tol: f64) -> bool {
    if kalman.iter().any(|v| !v.is_finite()) {
        return false;
    }
    // a wide/tall Kalman matrix has at most min(rows, cols) singular values
    if kalman.nrows().min(kalman.ncols()) < states {
        return false;
    }
    let (lo, hi) = kalman_singular_values(kalman);
    lo > tol * hi.max(1.0)
}

/// `(A, B)` controllable by the Kalman rank test.
pub fn is_controllable(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    assert_eq!(
        a.nrows(),
        b.nrows(),
        "is_controllable: A and B row mismatch"
    );
    full_rank(&controllability_matrix(a, b), a.nrows(), tol)
}

/// `(A, C)` observable by the Kalman rank test.
pub fn is_observable(a: &Matrix, c: &Matrix, tol: f64) -> bool {
    assert_eq!(
        a.ncols(),
        c.ncols(),
        "is_observable: A and C column mismatch"
    );
    full_rank(&observability_matrix(a, c), a.nrows(), tol)
}

const REFINEMENT_STEPS: usize = 3;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `init + Σ xᵢ yᵢ` accumulated in doubled precision, then rounded once.
pub fn compensated_dot(init: f64, terms: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (init, 0.0);
    for (x, y) in terms {
        let prod = x * y;
        let (t, e) = two_sum(s, prod);
        s = t;
        c += e + x.mul_add(y, -prod);
    }
    s + c
}

/// Solve `G x = d` for symmetric positive definite `G` by Cholesky, refined
/// against compensated residuals.
pub fn spd_solve(g: &SymmetricMatrix, d: &DVector<f64>) -> Result<DVector<f64>> {
    if g.dim() != d.len() {
        return Err(Error::DimensionMismatch(format!(
            "spd_solve: {}x{} system with rhs of length {}",
            g.dim(),
            g.dim(),
            d.len()
        )));
    }
    let chol = Cholesky::new(g.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let mut x = chol.solve(d);
    let n = d.len();
    for _ in 0..REFINEMENT_STEPS {
        let r = DVector::from_fn(n, |i, _| {
            compensated_dot(d[i], (0..n).map(|j| (-g[(i, j)], x[j])))
        });
        let dx = chol.solve(&r);
        x += &dx;
        if dx.norm().is_nan() || dx.norm() <= f64::EPSILON * x.norm() {
            break;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn abscissa_examples() {
        assert_relative_eq!(spectral_abscissa(&dmatrix![-1.0]).unwrap(), -1.0);
        assert!(
            spectral_abscissa(&dmatrix![0.0, 1.0; -1.0, 0.0])
                .unwrap()
                .abs()
                < 1e-14
        );
        // λ² + 4λ + 4: double root at −2, perturbation is O(sqrt(eps))
        let s = spectral_abscissa(&dmatrix![-1.0, -1.0; 1.0, -3.0]).unwrap();
        assert!((s + 2.0).abs() < 1e-7, "{s}");
    }

    #[test]
    fn abscissa_rejects_nan() {
        assert_eq!(
            spectral_abscissa(&dmatrix![f64::NAN]),
            Err(Error::NonFinite("eigenvalue argument"))
        );
    }

    #[test]
    fn spectral_norm_examples() {
        assert_relative_eq!(spectral_norm(&Matrix::identity(3, 3)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            spectral_norm(&dmatrix![3.0, 0.0; 0.0, -5.0]),
            5.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            spectral_norm(&dmatrix![0.0, 2.0; 0.0, 0.0]),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn kalman_rank_examples() {
        assert!(is_controllable(
            &dmatrix![0.0],
            &dmatrix![1.0],
            DEFAULT_RANK_TOL
        ));
        assert!(!is_controllable(
            &Matrix::identity(2, 2),
            &dmatrix![1.0; 0.0],
            DEFAULT_RANK_TOL
        ));
        assert!(is_observable(
            &dmatrix![0.0, 1.0; 0.0, 0.0],
            &dmatrix![1.0, 0.0],
            DEFAULT_RANK_TOL
        ));
        assert!(!is_observable(
            &dmatrix![0.0, 1.0; 0.0, 0.0],
            &dmatrix![0.0, 1.0],
            DEFAULT_RANK_TOL
        ));
    }

    #[test]
    fn zero_input_is_uncontrollable() {
        assert!(!is_controllable(
            &dmatrix![-3.0],
            &dmatrix![0.0],
            DEFAULT_RANK_TOL
        ));
    }

    #[test]
    fn spd_solve_examples() {
        let d = DVector::from_vec(vec![0.3, -1.2, 7.0]);
        let x = spd_solve(&SymmetricMatrix::identity(3), &d).unwrap();
        assert_relative_eq!(x, d, epsilon = 1e-15);

        let g = SymmetricMatrix::from_diagonal(&[2.0, 4.0]);
        let x = spd_solve(&g, &DVector::from_vec(vec![2.0, 4.0])).unwrap();
        assert_relative_eq!(x, DVector::from_vec(vec![1.0, 1.0]), epsilon = 1e-15);
    }

    #[test]
    fn spd_solve_hilbert_matches_inverse() {
        let h = Matrix::from_fn(4, 4, |i, j| 1.0 / (i + j + 1) as f64);
        let d = DVector::from_element(4, 1.0);
        let x = spd_solve(&SymmetricMatrix::new(h.clone()).unwrap(), &d).unwrap();
        let oracle = h.clone().try_inverse().unwrap() * &d;
        assert!((&x - &oracle).norm() <= 1e-8 * oracle.norm());
        assert!((&h * &x - &d).norm() <= 1e-10 * d.norm());
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let g = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        assert_eq!(
            spd_solve(&g, &DVector::from_vec(vec![1.0, 1.0])),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = SymmetricMatrix::new(dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        let r = sqrt_psd(&m);
        assert_relative_eq!(&r * &r, m.as_matrix().clone(), epsilon = 1e-13);
    }
}
