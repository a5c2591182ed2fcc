use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::TangentBasis;
use crate::lqg::{
    admissible, closed_loop_abscissa, lqg_riccati_optimum, Controller, LqgEvaluation, Plant,
};
use crate::matlin::{symmetric_eigenvalues, SymmetricMatrix};

/// Base of the finite-difference step, scaled by `1 + ‖K‖_F`.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-4;
/// Eigenvalues with `|λ| ≤ ZERO_EIGENVALUE_TOL · max|λ|` count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-6;

/// Probe step `base · (1 + ‖K‖_F)`.
pub fn hessian_step(k: &Controller, base: f64) -> f64 {
    base * (1.0 + k.norm())
}

/// Central-difference Hessian of `J` over the fixed tangent basis, built from
/// exact gradients: `H_ij = (dJ(Eᵢ)|_{K+hEⱼ} − dJ(Eᵢ)|_{K−hEⱼ}) / 2h`, then
/// symmetrized.
pub fn finite_difference_hessian(plant: &Plant, k: &Controller, h: f64) -> Result<SymmetricMatrix> {
    let abscissa = closed_loop_abscissa(plant, k)?;
    if abscissa >= -10.0 * h {
        return Err(Error::NotStabilizing { abscissa });
    }
    let basis = TangentBasis::for_controller(k);
    let dim = basis.len();
    let differential = |kk: &Controller| -> Result<_> {
        let eval = LqgEvaluation::new(plant, kk)?;
        Ok(basis.coordinates(&eval.euclidean_gradient()))
    };
    let mut h_mat = DMatrix::zeros(dim, dim);
    for (j, e_j) in basis.iter().enumerate() {
        let plus = differential(&k.retract(&e_j, h))?;
        let minus = differential(&k.retract(&e_j, -h))?;
        h_mat.set_column(j, &((plus - minus) / (2.0 * h)));
    }
    Ok(SymmetricMatrix::symmetrize(h_mat))
}

/// Inertia of the Hessian at the LQG optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    /// Plant state dimension.
    pub n: usize,
    pub step: f64,
}

impl SignatureReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, n: usize, step: f64) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let scale = eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let threshold = ZERO_EIGENVALUE_TOL * scale;
        let zero = eigenvalues.iter().filter(|x| x.abs() <= threshold).count();
        let negative = eigenvalues.iter().filter(|x| **x < -threshold).count();
        SignatureReport {
            negative,
            zero,
            positive: eigenvalues.len() - zero - negative,
            eigenvalues,
            n,
            step,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        (self.negative, self.zero, self.positive)
    }

    /// Nullity equals the orbit dimension `n²` and nothing is negative.
    pub fn is_expected(&self) -> bool {
        self.negative == 0 && self.zero == self.n * self.n
    }
}

impl fmt::Display for SignatureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{}), N={}, n^2={}",
            self.negative,
            self.zero,
            self.positive,
            self.dim(),
            self.n * self.n
        )
    }
}

/// Signature of the finite-difference Hessian at the Riccati optimum, with
/// step `hessian_step(K*, base_step)`.
pub fn hessian_signature_check(plant: &Plant, base_step: f64) -> Result<SignatureReport> {
    let opt = lqg_riccati_optimum(plant)?;
    if !admissible(plant, &opt.controller) {
        return Err(Error::NotMinimal);
    }
    let h = hessian_step(&opt.controller, base_step);
    let hess = finite_difference_hessian(plant, &opt.controller, h)?;
    let eigenvalues = symmetric_eigenvalues(hess.as_matrix())
        .iter()
        .copied()
        .collect();
    Ok(SignatureReport::from_eigenvalues(eigenvalues, plant.n(), h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generate_random_plant;
    use crate::lqg::fixtures::{scalar_controller, scalar_plant};
    use crate::lqg::{lqg_cost, TangentDirection};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_entry_matches_closed_form() {
        // J(a) = 1 − (a−3)(a+1)/(2(a−1)²) along A_K = a, so J'' = 12/(a−1)⁴
        let hess = finite_difference_hessian(&scalar_plant(), &scalar_controller(), 1e-4).unwrap();
        assert!((hess[(0, 0)] - 0.046875).abs() < 1e-4);
        assert_relative_eq!(hess[(0, 0)], 12.0 / 256.0, max_relative = 1e-6);
    }

    #[test]
    fn matches_second_differences_of_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plant = generate_random_plant(2, 1, 1, 1.0, &mut rng).unwrap();
        let k = crate::optimizer::random_minimal_init(&plant, &mut rng).unwrap();
        let hess = finite_difference_hessian(&plant, &k, 1e-4).unwrap();
        let basis = TangentBasis::for_controller(&k);
        let j = |v: &TangentDirection| lqg_cost(&plant, &k.retract(v, 1.0)).unwrap();
        let eps = 1e-3;
        for (a, b) in [(0, 0), (1, 3), (4, 6), (7, 7)] {
            let (ea, eb) = (basis.direction(a).scale(eps), basis.direction(b).scale(eps));
            let second = (j(&ea.add_scaled(&eb, 1.0))
                - j(&ea.add_scaled(&eb, -1.0))
                - j(&ea.scale(-1.0).add_scaled(&eb, 1.0))
                + j(&ea.scale(-1.0).add_scaled(&eb, -1.0)))
                / (4.0 * eps * eps);
            assert_relative_eq!(hess[(a, b)], second, max_relative = 1e-3, epsilon = 1e-6);
        }
    }

    #[test]
    fn scalar_signature() {
        let report = hessian_signature_check(&scalar_plant(), DEFAULT_HESSIAN_STEP).unwrap();
        assert_eq!(report.signature(), (0, 1, 2));
        assert_eq!(report.to_string(), "(0,1,2), N=3, n^2=1");
        assert!(report.is_expected());
    }

    #[test]
    fn threshold_is_relative() {
        let r = SignatureReport::from_eigenvalues(vec![2.0, -1e-7, 1e-9, -3.0, 1e-5], 1, 1e-4);
        assert_eq!(r.signature(), (1, 2, 2));
        assert_eq!(r.eigenvalues, vec![-3.0, -1e-7, 1e-9, 1e-5, 2.0]);
    }

    #[test]
    fn rejects_probes_near_the_boundary() {
        let k = Controller::new(dmatrix![-3.0], dmatrix![1.0], dmatrix![-1.0]).unwrap();
        assert!(matches!(
            finite_difference_hessian(&scalar_plant(), &k, 0.5),
            Err(Error::NotStabilizing { .. })
        ));
    }
}
