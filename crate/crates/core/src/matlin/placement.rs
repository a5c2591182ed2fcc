use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_square, eigenvalues, is_controllable, Matrix, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 10;
const MAX_COND: f64 = 1e8;
const SPECTRUM_TOL: f64 = 1e-6;
const CONJUGATE_TOL: f64 = 1e-12;

/// Real block of the pole set: either a real pole or a conjugate pair `a ± bi`.
#[derive(Debug, Clone, Copy)]
enum PoleBlock {
    Real(f64),
    Pair { re: f64, im: f64 },
}

/// Gain `F` (m×n) such that `spec(A − B F)` equals `poles`.
///
/// Sylvester method: draw a Gaussian `G` (m×n), solve `A X − X Λ = B G` with
/// `Λ` the real block-diagonal form of `poles`, and return `F = G X⁻¹`.
/// `G` is redrawn (up to 10 attempts) when `X` is ill-conditioned or the
/// placed spectrum misses the request.
pub fn place_poles<R: Rng + ?Sized>(
    a: &Matrix,
    b: &Matrix,
    poles: &[Complex64],
    rng: &mut R,
) -> Result<Matrix> {
    check_square(a, "placement A")?;
    let n = a.nrows();
    if b.nrows() != n || b.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "placement: B is {}x{} for {n} states",
            b.nrows(),
            b.ncols()
        )));
    }
    if poles.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "placement: {} poles requested for {n} states",
            poles.len()
        )));
    }
    if !is_controllable(a, b, DEFAULT_RANK_TOL) {
        return Err(Error::PlacementFailure("(A, B) is not controllable".into()));
    }
    let blocks = pole_blocks(poles)?;
    let m = b.ncols();
    let mut target: Vec<Complex64> = poles.to_vec();
    sort_spectrum(&mut target);

    let mut last_reason = String::from("no attempt made");
    for _ in 0..MAX_ATTEMPTS {
        let g = Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = match solve_block_sylvester(a, &blocks, &(b * &g)) {
            Some(x) => x,
            None => {
                last_reason = "poles intersect the spectrum of A".into();
                continue;
            }
        };
        let sv = x.singular_values();
        let cond = sv.max() / sv.min();
        if !cond.is_finite() || cond > MAX_COND {
            last_reason = format!("Sylvester solution condition number {cond:e}");
            continue;
        }
        let Some(x_inv) = x.try_inverse() else {
            last_reason = "Sylvester solution is singular".into();
            continue;
        };
        let f = g * x_inv;
        let mut placed = eigenvalues(&(a - b * &f))?;
        sort_spectrum(&mut placed);
        let worst = placed
            .iter()
            .zip(&target)
            .map(|(p, t)| (p - t).norm())
            .fold(0.0, f64::max);
        if worst <= SPECTRUM_TOL {
            return Ok(f);
        }
        last_reason = format!("placed spectrum off by {worst:e}");
    }
    Err(Error::PlacementFailure(last_reason))
}

/// Sort by real part, then imaginary part.
pub(crate) fn sort_spectrum(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn pole_blocks(poles: &[Complex64]) -> Result<Vec<PoleBlock>> {
    let mut blocks = Vec::new();
    let mut upper: Vec<Complex64> = Vec::new();
    let mut lower: Vec<Complex64> = Vec::new();
    for p in poles {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::NonFinite("poles"));
        }
        if p.im.abs() <= CONJUGATE_TOL * p.norm().max(1.0) {
            blocks.push(PoleBlock::Real(p.re));
        } else if p.im > 0.0 {
            upper.push(*p);
        } else {
            lower.push(*p);
        }
    }
    for p in upper {
        let idx = lower
            .iter()
            .position(|c| (c - p.conj()).norm() <= CONJUGATE_TOL * p.norm().max(1.0))
            .ok_or_else(|| Error::PlacementFailure(format!("pole {p} has no conjugate partner")))?;
        lower.swap_remove(idx);
        blocks.push(PoleBlock::Pair { re: p.re, im: p.im });
    }
    if !lower.is_empty() {
        return Err(Error::PlacementFailure(
            "pole set is not closed under conjugation".into(),
        ));
    }
    Ok(blocks)
}

/// Solve `A X − X Λ = RHS` column block by column block; `Λ` is block
/// diagonal so each real pole is one shifted solve and each pair one real
/// `2n × 2n` solve.
fn solve_block_sylvester(a: &Matrix, blocks: &[PoleBlock], rhs: &Matrix) -> Option<Matrix> {
    let n = a.nrows();
    let eye = Matrix::identity(n, n);
    let mut x = Matrix::zeros(n, n);
    let mut col = 0;
    for block in blocks {
        match *block {
            PoleBlock::Real(lambda) => {
                let shifted = a - &eye * lambda;
                let sol = shifted.lu().solve(&rhs.column(col).into_owned())?;
                x.set_column(col, &sol);
                col += 1;
            }
            PoleBlock::Pair { re, im } => {
                // Λ block [[re, im], [−im, re]] on columns (col, col+1)
                let shifted = a - &eye * re;
                let mut sys = DMatrix::<f64>::zeros(2 * n, 2 * n);
                sys.view_mut((0, 0), (n, n)).copy_from(&shifted);
                sys.view_mut((0, n), (n, n)).copy_from(&(&eye * im));
                sys.view_mut((n, 0), (n, n)).copy_from(&(&eye * -im));
                sys.view_mut((n, n), (n, n)).copy_from(&shifted);
                let mut r = nalgebra::DVector::zeros(2 * n);
                r.rows_mut(0, n).copy_from(&rhs.column(col));
                r.rows_mut(n, n).copy_from(&rhs.column(col + 1));
                let sol = sys.lu().solve(&r)?;
                x.set_column(col, &sol.rows(0, n));
                x.set_column(col + 1, &sol.rows(n, n));
                col += 2;
            }
        }
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spectrum_matches(m: &Matrix, poles: &[Complex64], tol: f64) -> bool {
        let mut got = eigenvalues(m).unwrap();
        let mut want = poles.to_vec();
        sort_spectrum(&mut got);
        sort_spectrum(&mut want);
        got.iter().zip(&want).all(|(g, w)| (g - w).norm() <= tol)
    }

    #[test]
    fn scalar_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = place_poles(
            &dmatrix![0.0],
            &dmatrix![1.0],
            &[Complex64::new(-1.5, 0.0)],
            &mut rng,
        )
        .unwrap();
        assert_relative_eq!(f[(0, 0)], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn full_actuation_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let poles = [Complex64::new(-1.0, 0.0), Complex64::new(-2.0, 0.0)];
        let f = place_poles(
            &Matrix::zeros(2, 2),
            &Matrix::identity(2, 2),
            &poles,
            &mut rng,
        )
        .unwrap();
        assert!(spectrum_matches(&(-&f), &poles, 1e-6));
    }

    #[test]
    fn complex_pair_on_double_integrator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        let b = dmatrix![0.0; 1.0];
        let poles = [Complex64::new(-1.0, 2.0), Complex64::new(-1.0, -2.0)];
        let f = place_poles(&a, &b, &poles, &mut rng).unwrap();
        assert!(spectrum_matches(&(&a - &b * &f), &poles, 1e-6));
        // single input: the gain is unique, s² + 2s + 5
        assert_relative_eq!(f, dmatrix![5.0, 2.0], epsilon = 1e-9);
    }

    #[test]
    fn random_mimo_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut placed = 0;
        for _ in 0..20 {
            let a = Matrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
            let b = Matrix::from_fn(4, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
            let poles: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.random_range(-2.0..-1.0), 0.0))
                .collect();
            let f = place_poles(&a, &b, &poles, &mut rng).unwrap();
            assert!(spectrum_matches(&(&a - &b * &f), &poles, 1e-6));
            placed += 1;
        }
        assert_eq!(placed, 20);
    }

    #[test]
    fn rejects_unpaired_complex_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = place_poles(
            &Matrix::zeros(2, 2),
            &Matrix::identity(2, 2),
            &[Complex64::new(-1.0, 1.0), Complex64::new(-2.0, 0.0)],
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PlacementFailure(_)));
    }

    #[test]
    fn rejects_uncontrollable_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = place_poles(
            &Matrix::identity(2, 2),
            &dmatrix![1.0; 0.0],
            &[Complex64::new(-1.0, 0.0), Complex64::new(-2.0, 0.0)],
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PlacementFailure(_)));
    }
}
