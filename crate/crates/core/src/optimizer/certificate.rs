use crate::error::{Error, Result};
use crate::lqg::{assemble_closed_loop, hat_e, Controller, Plant, TangentDirection};
use crate::matlin::{solve_lyapunov, spectral_norm, SymmetricMatrix};

/// Step bound `s(K, V) = 1 / (2 ‖Ê(V)‖₂ λ̄(𝕃(A_cl(K), I)))`.
///
/// `K + tV` is stabilizing for every `t ∈ [0, s)`: with `P = 𝕃(A_cl, I)` the
/// same `P` stays a Lyapunov certificate for `A_cl(K) + t Ê(V)`. It says
/// nothing about minimality. Directions that leave `A_cl` unchanged get `+∞`.
pub fn stability_certificate(plant: &Plant, k: &Controller, v: &TangentDirection) -> Result<f64> {
    if !v.matches(k) {
        return Err(Error::DimensionMismatch(
            "direction does not match controller".into(),
        ));
    }
    if v.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let cl = assemble_closed_loop(plant, k)?;
    let dim = cl.a_cl.nrows();
    let p = solve_lyapunov(&cl.a_cl, &SymmetricMatrix::identity(dim)).map_err(|e| match e {
        Error::NotHurwitz { abscissa } => Error::NotStabilizing { abscissa },
        other => other,
    })?;
    let e_norm = spectral_norm(&hat_e(plant, v));
    if e_norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (2.0 * e_norm * p.max_eigenvalue()))
}
