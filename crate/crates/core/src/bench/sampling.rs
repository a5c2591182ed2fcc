use rand::Rng;
use rand_distr::StandardNormal;

use super::generate_random_plant;
use crate::error::{Error, Result};
use crate::lqg::{Controller, Plant, TangentDirection};
use crate::matlin::Matrix;
use crate::optimizer::random_minimal_init;

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Matrix {
    let qr = gaussian(q, q, rng).qr();
    let (q_mat, r) = (qr.q(), qr.r());
    // sign fix makes the draw Haar-distributed
    let signs = Matrix::from_diagonal(&r.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    q_mat * signs
}

/// Random `S ∈ GL(q)` with 2-norm condition number exactly `cond`:
/// `U diag(σ) Vᵀ` with Haar `U`, `V`, `σ₁ = 1`, `σ_q = cond` and the rest
/// log-uniform between. For `q = 1` the condition number is always one and
/// `S` is a random scalar in `±[1, cond]`.
pub fn random_similarity<R: Rng + ?Sized>(q: usize, cond: f64, rng: &mut R) -> Result<Matrix> {
    if q == 0 || !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "need q ≥ 1 and cond ≥ 1, got q = {q}, cond = {cond}"
        )));
    }
    let log_cond = cond.ln();
    let mut sigma: Vec<f64> = (0..q)
        .map(|_| (rng.random::<f64>() * log_cond).exp())
        .collect();
    if q == 1 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return Ok(Matrix::from_element(1, 1, sign * sigma[0]));
    }
    sigma[0] = 1.0;
    sigma[q - 1] = cond;
    let u = random_orthogonal(q, rng);
    let v = random_orthogonal(q, rng);
    Ok(u * Matrix::from_diagonal(&nalgebra::DVector::from_vec(sigma)) * v.transpose())
}

/// Tangent direction at `k` with i.i.d. standard Gaussian entries.
pub fn random_direction<R: Rng + ?Sized>(k: &Controller, rng: &mut R) -> TangentDirection {
    let (q, m, p) = (k.order(), k.outputs(), k.inputs());
    TangentDirection::new(
        gaussian(q, q, rng),
        gaussian(q, p, rng),
        gaussian(m, q, rng),
    )
    .expect("shapes match the controller")
}

/// Dense random plant together with a random minimal stabilizing controller.
pub fn random_admissible_pair<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    p: usize,
    rng: &mut R,
) -> Result<(Plant, Controller)> {
    let plant = generate_random_plant(n, m, p, 1.0, rng)?;
    let k = random_minimal_init(&plant, rng)?;
    Ok((plant, k))
}

/// Draws of [`random_admissible_pair`] before [`random_bounded_pair`] gives up.
pub const MAX_BOUNDED_DRAWS: usize = 1000;

/// [`random_admissible_pair`] redrawn until initialization succeeds and
/// `‖K‖_F ≤ max_norm`.
///
/// Pole placement into a fixed band occasionally needs very large gains; the
/// resulting closed loops are so badly conditioned that double precision
/// cannot resolve relative tolerances near `1e-8`.
pub fn random_bounded_pair<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    p: usize,
    max_norm: f64,
    rng: &mut R,
) -> Result<(Plant, Controller)> {
    for _ in 0..MAX_BOUNDED_DRAWS {
        match random_admissible_pair(n, m, p, rng) {
            Ok((plant, k)) if k.norm() <= max_norm => return Ok((plant, k)),
            Ok(_) | Err(Error::InitFailure { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::InitFailure {
        attempts: MAX_BOUNDED_DRAWS,
    })
}
