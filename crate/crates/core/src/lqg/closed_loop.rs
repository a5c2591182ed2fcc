use super::{Controller, Plant};
use crate::error::{Error, Result};
use crate::matlin::{
    block2, block_diag, controllability_matrix, is_controllable, is_observable,
    kalman_singular_values, observability_matrix, spectral_abscissa, Matrix, SymmetricMatrix,
    DEFAULT_RANK_TOL,
};

/// Plant and controller interconnection.
///
/// `d_cl` is the closed-loop feedthrough, kept for completeness; nothing in
/// the crate reads it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    pub a_cl: Matrix,
    pub b_cl: Matrix,
    pub c_cl: Matrix,
    pub d_cl: Matrix,
    pub q_cl: SymmetricMatrix,
    pub w_cl: SymmetricMatrix,
}

/// Stability and minimality of a controller for a given plant.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub stabilizing: bool,
    pub minimal: bool,
    pub spectral_abscissa: f64,
    pub min_sv_ctrb: f64,
    pub min_sv_obsv: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.stabilizing && self.minimal
    }
}

pub(crate) fn check_compatible(plant: &Plant, k: &Controller) -> Result<()> {
    if k.inputs() != plant.p() || k.outputs() != plant.m() {
        return Err(Error::DimensionMismatch(format!(
            "controller maps {} outputs to {} inputs, plant has p={}, m={}",
            k.inputs(),
            k.outputs(),
            plant.p(),
            plant.m()
        )));
    }
    Ok(())
}

/// Closed-loop matrices of the interconnection.
pub fn assemble_closed_loop(plant: &Plant, k: &Controller) -> Result<ClosedLoop> {
    check_compatible(plant, k)?;
    let (n, m, p, q) = (plant.n(), plant.m(), plant.p(), k.order());
    let a_cl = block2(
        plant.a(),
        &(plant.b() * k.c_k()),
        &(k.b_k() * plant.c()),
        k.a_k(),
    );
    let b_cl = block2(
        &Matrix::identity(n, n),
        &Matrix::zeros(n, p),
        &Matrix::zeros(q, n),
        k.b_k(),
    );
    let c_cl = block_diag(plant.c(), k.c_k());
    let d_cl = block2(
        &Matrix::zeros(p, n),
        &Matrix::identity(p, p),
        &Matrix::zeros(m, n),
        &Matrix::zeros(m, p),
    );
    let q_k = k.c_k().transpose() * plant.r().as_matrix() * k.c_k();
    let w_k = k.b_k() * plant.v().as_matrix() * k.b_k().transpose();
    Ok(ClosedLoop {
        a_cl,
        b_cl,
        c_cl,
        d_cl,
        q_cl: SymmetricMatrix::symmetrize(block_diag(plant.q(), &q_k)),
        w_cl: SymmetricMatrix::symmetrize(block_diag(plant.w(), &w_k)),
    })
}

/// Stability of the closed loop and minimality of `(A_K, B_K, C_K)`.
///
/// Degenerate controllers (e.g. `B_K = 0`) report `minimal = false` rather
/// than failing.
pub fn is_admissible(plant: &Plant, k: &Controller, tol: f64) -> Result<AdmissibilityReport> {
    let cl = assemble_closed_loop(plant, k)?;
    let abscissa = spectral_abscissa(&cl.a_cl).unwrap_or(f64::INFINITY);
    let ctrb = controllability_matrix(k.a_k(), k.b_k());
    let obsv = observability_matrix(k.a_k(), k.c_k());
    let (min_sv_ctrb, _) = kalman_singular_values(&ctrb);
    let (min_sv_obsv, _) = kalman_singular_values(&obsv);
    let minimal = is_controllable(k.a_k(), k.b_k(), tol) && is_observable(k.a_k(), k.c_k(), tol);
    Ok(AdmissibilityReport {
        stabilizing: abscissa < 0.0,
        minimal,
        spectral_abscissa: abscissa,
        min_sv_ctrb,
        min_sv_obsv,
    })
}

/// Shorthand for [`is_admissible`] at the default tolerance.
pub fn admissible(plant: &Plant, k: &Controller) -> bool {
    is_admissible(plant, k, DEFAULT_RANK_TOL)
        .map(|r| r.is_admissible())
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lqg::fixtures::{scalar_controller, scalar_plant};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_fixture_blocks() {
        let cl = assemble_closed_loop(&scalar_plant(), &scalar_controller()).unwrap();
        assert_eq!(cl.a_cl, dmatrix![-1.0, -1.0; 1.0, -3.0]);
        assert_eq!(cl.b_cl, Matrix::identity(2, 2));
        assert_eq!(cl.c_cl, dmatrix![1.0, 0.0; 0.0, -1.0]);
        assert_eq!(cl.q_cl.as_matrix(), &Matrix::identity(2, 2));
        assert_eq!(cl.w_cl.as_matrix(), &Matrix::identity(2, 2));
        assert_eq!(cl.d_cl, dmatrix![0.0, 1.0; 0.0, 0.0]);
    }

    #[test]
    fn zero_b_k_kills_controller_noise() {
        let k = Controller::new(dmatrix![-2.0], dmatrix![0.0], dmatrix![1.0]).unwrap();
        let cl = assemble_closed_loop(&scalar_plant(), &k).unwrap();
        assert_eq!(cl.w_cl.as_matrix(), &dmatrix![1.0, 0.0; 0.0, 0.0]);
    }

    #[test]
    fn zero_c_k_is_block_triangular() {
        let k = Controller::new(dmatrix![-2.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
        let cl = assemble_closed_loop(&scalar_plant(), &k).unwrap();
        assert_eq!(cl.q_cl.as_matrix(), &dmatrix![1.0, 0.0; 0.0, 0.0]);
        assert_eq!(cl.a_cl[(0, 1)], 0.0);
    }

    #[test]
    fn admissibility_examples() {
        let plant = scalar_plant();
        let r = is_admissible(&plant, &scalar_controller(), DEFAULT_RANK_TOL).unwrap();
        assert!(r.stabilizing && r.minimal);
        // double eigenvalue at −2
        assert!((r.spectral_abscissa + 2.0).abs() < 1e-7);

        let k = Controller::new(dmatrix![-2.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
        assert!(!is_admissible(&plant, &k, DEFAULT_RANK_TOL).unwrap().minimal);

        let k = Controller::new(dmatrix![3.0], dmatrix![0.0], dmatrix![1.0]).unwrap();
        let r = is_admissible(&plant, &k, DEFAULT_RANK_TOL).unwrap();
        assert!(!r.minimal && !r.stabilizing);
        assert_relative_eq!(r.spectral_abscissa, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let k = Controller::new(dmatrix![-1.0], dmatrix![1.0, 1.0], dmatrix![1.0]).unwrap();
        assert!(matches!(
            assemble_closed_loop(&scalar_plant(), &k),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
