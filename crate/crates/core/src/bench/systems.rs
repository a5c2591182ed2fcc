use nalgebra::dmatrix;

use crate::lqg::{fixtures, Plant, PlantParts};

/// A named plant for the comparison harness.
#[derive(Debug, Clone)]
pub struct BenchmarkSystem {
    pub name: String,
    pub plant: Plant,
    /// Where the data came from.
    pub provenance: String,
    /// Known optimal cost; when absent the harness asks the Riccati oracle.
    pub optimal_cost: Option<f64>,
}

impl BenchmarkSystem {
    pub fn new(name: impl Into<String>, plant: Plant, provenance: impl Into<String>) -> Self {
        BenchmarkSystem {
            name: name.into(),
            plant,
            provenance: provenance.into(),
            optimal_cost: None,
        }
    }

    pub fn with_optimal_cost(mut self, cost: f64) -> Self {
        self.optimal_cost = Some(cost);
        self
    }
}

/// The scalar sanity plant `(−1, 1, 1, 1, 1, 1, 1)`, `J* = 6√2 − 8`.
pub fn scalar_system() -> BenchmarkSystem {
    BenchmarkSystem::new(
        "scalar",
        fixtures::scalar_plant(),
        "scalar sanity plant (A,B,C,W,V,Q,R) = (-1,1,1,1,1,1,1)",
    )
    .with_optimal_cost(6.0 * 2f64.sqrt() - 8.0)
}

/// Doyle's double-integrator-like plant `A = [[1,1],[0,1]]`, `B = [0;1]`,
/// `C = [1,0]` with rank-one weights `W = σ 𝟙𝟙ᵀ`, `Q = ρ 𝟙𝟙ᵀ` and
/// `V = R = 1`.
///
/// The weights are not standardized; `sigma` and `rho` are left
/// to the caller.
pub fn doyle_system(sigma: f64, rho: f64) -> crate::Result<BenchmarkSystem> {
    let ones = dmatrix![1.0, 1.0; 1.0, 1.0];
    let plant = Plant::new(PlantParts {
        a: dmatrix![1.0, 1.0; 0.0, 1.0],
        b: dmatrix![0.0; 1.0],
        c: dmatrix![1.0, 0.0],
        w: &ones * sigma,
        v: dmatrix![1.0],
        q: &ones * rho,
        r: dmatrix![1.0],
    })?;
    Ok(BenchmarkSystem::new(
        "doyle",
        plant,
        format!("Doyle (1978) counterexample structure; weights sigma = {sigma}, rho = {rho} chosen here"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqg::lqg_riccati_optimum;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_optimum_matches_oracle() {
        let sys = scalar_system();
        let opt = lqg_riccati_optimum(&sys.plant).unwrap();
        assert_relative_eq!(opt.cost, sys.optimal_cost.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn doyle_plant_is_valid() {
        let sys = doyle_system(1.0, 1.0).unwrap();
        assert_eq!((sys.plant.n(), sys.plant.m(), sys.plant.p()), (2, 1, 1));
        assert!(lqg_riccati_optimum(&sys.plant).unwrap().cost.is_finite());
    }
}
