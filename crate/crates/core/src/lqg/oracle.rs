use nalgebra::Cholesky;

use super::{Controller, Plant};
use crate::error::{Error, Result};
use crate::matlin::{solve_care, Matrix, SymmetricMatrix};

/// Classical LQG solution: the observer-based controller built from the
/// control and filter Riccati equations, and its cost.
#[derive(Debug, Clone)]
pub struct LqgOptimum {
    pub controller: Controller,
    pub cost: f64,
    /// Control Riccati solution `P`.
    pub control_riccati: SymmetricMatrix,
    /// Filter Riccati solution `Σ`.
    pub filter_riccati: SymmetricMatrix,
}

/// Optimal controller `A_K = A − B F − L C`, `B_K = L`, `C_K = −F` with
/// `F = R⁻¹BᵀP`, `L = ΣCᵀV⁻¹`, and `J* = tr(PW) + tr(P B R⁻¹ Bᵀ P Σ)`.
pub fn lqg_riccati_optimum(plant: &Plant) -> Result<LqgOptimum> {
    let a = plant.a();
    let b = plant.b();
    let c = plant.c();
    let p = solve_care(a, b, plant.q(), plant.r())?;
    let sigma = solve_care(&a.transpose(), &c.transpose(), plant.w(), plant.v())?;

    let r_chol = Cholesky::new(plant.r().as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let v_chol = Cholesky::new(plant.v().as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let gain: Matrix = r_chol.solve(&(b.transpose() * p.as_matrix()));
    // L = Σ Cᵀ V⁻¹ = (V⁻¹ C Σ)ᵀ
    let observer: Matrix = v_chol.solve(&(c * sigma.as_matrix())).transpose();

    let a_k = a - b * &gain - &observer * c;
    let controller = Controller::new(a_k, observer, -gain.clone())?;
    let cost = p.dot(plant.w().as_matrix())
        + (p.as_matrix() * b * r_chol.solve(&(b.transpose() * p.as_matrix())) * sigma.as_matrix())
            .trace();
    Ok(LqgOptimum {
        controller,
        cost,
        control_riccati: p,
        filter_riccati: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqg::fixtures::scalar_plant;
    use crate::lqg::{lqg_cost, PlantParts};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_optimum() {
        let opt = lqg_riccati_optimum(&scalar_plant()).unwrap();
        let r2 = 2f64.sqrt();
        assert_relative_eq!(
            opt.controller.a_k()[(0, 0)],
            1.0 - 2.0 * r2,
            epsilon = 1e-13
        );
        assert_relative_eq!(opt.controller.b_k()[(0, 0)], r2 - 1.0, epsilon = 1e-13);
        assert_relative_eq!(opt.controller.c_k()[(0, 0)], 1.0 - r2, epsilon = 1e-13);
        assert_relative_eq!(opt.cost, 6.0 * r2 - 8.0, epsilon = 1e-13);
        let j = lqg_cost(&scalar_plant(), &opt.controller).unwrap();
        assert_relative_eq!(j, opt.cost, max_relative = 1e-12);
    }

    #[test]
    fn integrator_optimum() {
        let plant = Plant::new(PlantParts {
            a: dmatrix![0.0],
            b: dmatrix![1.0],
            c: dmatrix![1.0],
            w: dmatrix![1.0],
            v: dmatrix![1.0],
            q: dmatrix![1.0],
            r: dmatrix![1.0],
        })
        .unwrap();
        let opt = lqg_riccati_optimum(&plant).unwrap();
        assert_relative_eq!(opt.cost, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn self_dual_plant_has_equal_riccati_solutions() {
        let a = dmatrix![-1.0, 2.0; 0.5, -3.0];
        // self-duality needs A = Aᵀ as well as B = C = I
        let a = (&a + a.transpose()) * 0.5;
        let plant = Plant::with_identity_weights(a, Matrix::identity(2, 2), Matrix::identity(2, 2))
            .unwrap();
        let opt = lqg_riccati_optimum(&plant).unwrap();
        assert_relative_eq!(
            opt.control_riccati.as_matrix().clone(),
            opt.filter_riccati.as_matrix().clone(),
            epsilon = 1e-12
        );
    }
}
