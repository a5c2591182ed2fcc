use super::{assemble_closed_loop, ClosedLoop, Controller, Plant, TangentDirection};
use crate::error::{Error, Result};
use crate::matlin::{
    block_diag, lyapunov_differential, solve_lyapunov, spectral_abscissa, Matrix, SymmetricMatrix,
};

/// Cost-side quantities at one controller: the closed loop, the state
/// covariance `X = 𝕃(A_cl, W_cl)`, the adjoint `Y = 𝕃(A_clᵀ, Q_cl)` and the
/// cost `tr(Q_cl X)`.
///
/// Computing this once per iterate lets every directional derivative reuse the
/// two Lyapunov solves.
#[derive(Debug, Clone)]
pub struct LqgEvaluation<'a> {
    plant: &'a Plant,
    controller: Controller,
    closed_loop: ClosedLoop,
    x: SymmetricMatrix,
    y: SymmetricMatrix,
    cost: f64,
}

fn lift_stability_error(e: Error) -> Error {
    match e {
        Error::NotHurwitz { abscissa } => Error::NotStabilizing { abscissa },
        other => other,
    }
}

/// Closed loop and `X(K)`, failing with `NotStabilizing` for unstable loops.
fn covariance_parts(plant: &Plant, k: &Controller) -> Result<(ClosedLoop, SymmetricMatrix)> {
    let cl = assemble_closed_loop(plant, k)?;
    let x = solve_lyapunov(&cl.a_cl, &cl.w_cl).map_err(lift_stability_error)?;
    Ok((cl, x))
}

impl<'a> LqgEvaluation<'a> {
    pub fn new(plant: &'a Plant, k: &Controller) -> Result<Self> {
        let (closed_loop, x) = covariance_parts(plant, k)?;
        let y = solve_lyapunov(&closed_loop.a_cl.transpose(), &closed_loop.q_cl)
            .map_err(lift_stability_error)?;
        let cost = closed_loop.q_cl.dot(x.as_matrix());
        if !cost.is_finite() {
            return Err(Error::NumericalFailure("LQG cost is not finite".into()));
        }
        Ok(LqgEvaluation {
            plant,
            controller: k.clone(),
            closed_loop,
            x,
            y,
            cost,
        })
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn closed_loop(&self) -> &ClosedLoop {
        &self.closed_loop
    }

    pub fn plant(&self) -> &'a Plant {
        self.plant
    }

    /// State covariance `X(K)`.
    pub fn state_covariance(&self) -> &SymmetricMatrix {
        &self.x
    }

    /// Adjoint `Y = 𝕃(A_clᵀ, Q_cl)`.
    pub fn adjoint(&self) -> &SymmetricMatrix {
        &self.y
    }

    /// `dJ_K(V) = tr(dQ_cl(V) X) + tr(Y (Ê(V) X + X Ê(V)ᵀ + dW_cl(V)))`.
    pub fn differential(&self, v: &TangentDirection) -> Result<f64> {
        if !v.matches(&self.controller) {
            return Err(Error::DimensionMismatch(
                "direction does not match controller".into(),
            ));
        }
        let plant = self.plant;
        let k = &self.controller;
        let d_q = d_q_cl(plant, k, v);
        let d_w = d_w_cl(plant, k, v);
        let e_hat = hat_e(plant, v);
        let ex = &e_hat * self.x.as_matrix();
        let forcing = &ex + ex.transpose() + d_w;
        Ok(d_q.dot(self.x.as_matrix()) + self.y.dot(&forcing))
    }

    /// Euclidean gradient `grad J(K)` in closed form.
    ///
    /// With `Z = Y X` partitioned conformally with `A_cl`:
    /// `E = 2 Z₂₂`, `F = 2 (Z₂₁ Cᵀ + Y₂₂ B_K V)`, `G = 2 (Bᵀ Z₁₂ + R C_K X₂₂)`.
    pub fn euclidean_gradient(&self) -> TangentDirection {
        let plant = self.plant;
        let k = &self.controller;
        let n = plant.n();
        let q = k.order();
        let z = self.y.as_matrix() * self.x.as_matrix();
        let z12 = z.view((0, n), (n, q));
        let z21 = z.view((n, 0), (q, n));
        let z22 = z.view((n, n), (q, q));
        let x22 = self.x.view((n, n), (q, q));
        let y22 = self.y.view((n, n), (q, q));
        TangentDirection {
            e: z22.into_owned() * 2.0,
            f: (z21 * plant.c().transpose() + y22 * k.b_k() * plant.v().as_matrix()) * 2.0,
            g: (plant.b().transpose() * z12 + plant.r().as_matrix() * k.c_k() * x22) * 2.0,
        }
    }
}

/// `Ê(V) = dA_cl(V) = [[0, B G], [F C, E]]`.
pub(crate) fn hat_e(plant: &Plant, v: &TangentDirection) -> Matrix {
    crate::matlin::block2(
        &Matrix::zeros(plant.n(), plant.n()),
        &(plant.b() * &v.g),
        &(&v.f * plant.c()),
        &v.e,
    )
}

fn d_q_cl(plant: &Plant, k: &Controller, v: &TangentDirection) -> Matrix {
    let n = plant.n();
    let lower = v.g.transpose() * plant.r().as_matrix() * k.c_k();
    block_diag(&Matrix::zeros(n, n), &(&lower + lower.transpose()))
}

fn d_w_cl(plant: &Plant, k: &Controller, v: &TangentDirection) -> Matrix {
    let n = plant.n();
    let lower = &v.f * plant.v().as_matrix() * k.b_k().transpose();
    block_diag(&Matrix::zeros(n, n), &(&lower + lower.transpose()))
}

/// `X(K) = 𝕃(A_cl(K), W_cl(K))`.
pub fn state_covariance(plant: &Plant, k: &Controller) -> Result<SymmetricMatrix> {
    Ok(covariance_parts(plant, k)?.1)
}

/// `J(K) = tr(Q_cl(K) X(K))`.
pub fn lqg_cost(plant: &Plant, k: &Controller) -> Result<f64> {
    let (cl, x) = covariance_parts(plant, k)?;
    Ok(cl.q_cl.dot(x.as_matrix()))
}

/// Directional derivative `dJ_K(V)` via the adjoint identity.
pub fn cost_differential(plant: &Plant, k: &Controller, v: &TangentDirection) -> Result<f64> {
    LqgEvaluation::new(plant, k)?.differential(v)
}

/// Directional derivative through the nested Lyapunov differential
/// `dX = d𝕃_{(A_cl, W_cl)}(Ê(V), dW_cl(V))`; one extra pair of solves per
/// direction. Used as an independent reference for [`cost_differential`].
pub fn cost_differential_nested(
    plant: &Plant,
    k: &Controller,
    v: &TangentDirection,
) -> Result<f64> {
    let (cl, x) = covariance_parts(plant, k)?;
    if !v.matches(k) {
        return Err(Error::DimensionMismatch(
            "direction does not match controller".into(),
        ));
    }
    let d_w = SymmetricMatrix::symmetrize(d_w_cl(plant, k, v));
    let d_x = lyapunov_differential(&cl.a_cl, &cl.w_cl, &hat_e(plant, v), &d_w)
        .map_err(lift_stability_error)?;
    let d_q = d_q_cl(plant, k, v);
    Ok(d_q.dot(x.as_matrix()) + cl.q_cl.dot(d_x.as_matrix()))
}

/// Closed-loop spectral abscissa, `+∞` if the eigensolver fails.
pub fn closed_loop_abscissa(plant: &Plant, k: &Controller) -> Result<f64> {
    let cl = assemble_closed_loop(plant, k)?;
    Ok(spectral_abscissa(&cl.a_cl).unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqg::fixtures::{scalar_controller, scalar_plant};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn e_dir() -> TangentDirection {
        TangentDirection::new(dmatrix![1.0], dmatrix![0.0], dmatrix![0.0]).unwrap()
    }

    #[test]
    fn scalar_covariance() {
        let x = state_covariance(&scalar_plant(), &scalar_controller()).unwrap();
        assert_relative_eq!(
            x.as_matrix().clone(),
            dmatrix![7.0 / 16.0, 1.0 / 16.0; 1.0 / 16.0, 3.0 / 16.0],
            epsilon = 1e-14
        );
    }

    #[test]
    fn zero_forcing_gives_zero_covariance() {
        // W = 0 violates (A, W^1/2) controllability, so evaluate the loop directly
        let cl = ClosedLoop {
            w_cl: SymmetricMatrix::zeros(2),
            ..assemble_closed_loop(&scalar_plant(), &scalar_controller()).unwrap()
        };
        let x = solve_lyapunov(&cl.a_cl, &cl.w_cl).unwrap();
        assert_eq!(x.amax(), 0.0);
    }

    #[test]
    fn scalar_cost() {
        assert_relative_eq!(
            lqg_cost(&scalar_plant(), &scalar_controller()).unwrap(),
            0.625,
            epsilon = 1e-14
        );
    }

    #[test]
    fn cost_is_coordinate_invariant_scalar() {
        let k = scalar_controller().transform(&dmatrix![2.0]).unwrap();
        assert_relative_eq!(
            lqg_cost(&scalar_plant(), &k).unwrap(),
            0.625,
            epsilon = 1e-14
        );
        // X transforms as Ŝ X Ŝᵀ with Ŝ = diag(1, 2)
        let x = state_covariance(&scalar_plant(), &scalar_controller()).unwrap();
        let xs = state_covariance(&scalar_plant(), &k).unwrap();
        let s_hat = dmatrix![1.0, 0.0; 0.0, 2.0];
        assert_relative_eq!(
            xs.as_matrix().clone(),
            &s_hat * x.as_matrix() * &s_hat,
            epsilon = 1e-14
        );
    }

    #[test]
    fn scalar_differential() {
        // J(a) = 1 − (a−3)(a+1)/(2(a−1)²), J'(a) = −4/(a−1)³ = 1/16 at a = −3
        let d = cost_differential(&scalar_plant(), &scalar_controller(), &e_dir()).unwrap();
        assert_relative_eq!(d, 1.0 / 16.0, epsilon = 1e-14);
        let zero = TangentDirection::zeros(1, 1, 1);
        assert_eq!(
            cost_differential(&scalar_plant(), &scalar_controller(), &zero).unwrap(),
            0.0
        );
    }

    #[test]
    fn nested_and_adjoint_agree_scalar() {
        let v = TangentDirection::new(dmatrix![0.3], dmatrix![-1.1], dmatrix![0.7]).unwrap();
        let a = cost_differential(&scalar_plant(), &scalar_controller(), &v).unwrap();
        let b = cost_differential_nested(&scalar_plant(), &scalar_controller(), &v).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn gradient_components_match_differential() {
        let plant = scalar_plant();
        let eval = LqgEvaluation::new(&plant, &scalar_controller()).unwrap();
        let grad = eval.euclidean_gradient();
        for i in 0..3 {
            let mut coords = nalgebra::DVector::zeros(3);
            coords[i] = 1.0;
            let dir = TangentDirection::from_vector(&coords, 1, 1, 1).unwrap();
            assert_relative_eq!(
                grad.to_vector()[i],
                eval.differential(&dir).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn unstable_controller_is_rejected() {
        let k = Controller::new(dmatrix![3.0], dmatrix![0.0], dmatrix![1.0]).unwrap();
        assert!(matches!(
            lqg_cost(&scalar_plant(), &k),
            Err(Error::NotStabilizing { .. })
        ));
    }
}
