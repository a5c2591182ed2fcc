use nalgebra::{Cholesky, DVector, SymmetricEigen};

use super::TangentBasis;
use crate::error::{Error, Result};
use crate::lqg::{assemble_closed_loop, hat_e, Controller, LqgEvaluation, Plant, TangentDirection};
use crate::matlin::{
    block2, solve_lyapunov, spd_solve, symmetric_eigenvalues, Matrix, SymmetricMatrix,
};

/// Weights `(w1, w2, w3)` of the KM metric; `w1 > 0`, `w2, w3 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricWeights {
    w1: f64,
    w2: f64,
    w3: f64,
}

impl MetricWeights {
    pub const UNIFORM: MetricWeights = MetricWeights {
        w1: 1.0,
        w2: 1.0,
        w3: 1.0,
    };
    pub const DYNAMICS_ONLY: MetricWeights = MetricWeights {
        w1: 1.0,
        w2: 0.0,
        w3: 0.0,
    };

    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        let ok = w1.is_finite()
            && w2.is_finite()
            && w3.is_finite()
            && w1 > 0.0
            && w2 >= 0.0
            && w3 >= 0.0;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "metric weights must satisfy w1 > 0, w2 >= 0, w3 >= 0 (got {w1}, {w2}, {w3})"
            )));
        }
        Ok(MetricWeights { w1, w2, w3 })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }
    pub fn w3(&self) -> f64 {
        self.w3
    }
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self::UNIFORM
    }
}

/// Controllability and observability Grammians of `(A_cl, B_cl, C_cl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammianPair {
    pub wc: SymmetricMatrix,
    pub wo: SymmetricMatrix,
}

/// `(Ê, F̂, Ĝ)`: differentials of `A_cl`, `B_cl`, `C_cl` along a direction.
#[derive(Debug, Clone, PartialEq)]
pub struct HatMaps {
    pub e: Matrix,
    pub f: Matrix,
    pub g: Matrix,
}

/// `Wc = 𝕃(A_cl, B_cl B_clᵀ)`, `Wo = 𝕃(A_clᵀ, C_clᵀ C_cl)`.
///
/// Fails with `NotMinimal` when either Grammian is not positive definite.
pub fn closed_loop_grammians(plant: &Plant, k: &Controller) -> Result<GrammianPair> {
    let cl = assemble_closed_loop(plant, k)?;
    let lift = |e: Error| match e {
        Error::NotHurwitz { abscissa } => Error::NotStabilizing { abscissa },
        other => other,
    };
    let wc = solve_lyapunov(
        &cl.a_cl,
        &SymmetricMatrix::symmetrize(&cl.b_cl * cl.b_cl.transpose()),
    )
    .map_err(lift)?;
    let wo = solve_lyapunov(
        &cl.a_cl.transpose(),
        &SymmetricMatrix::symmetrize(cl.c_cl.transpose() * &cl.c_cl),
    )
    .map_err(lift)?;
    for g in [&wc, &wo] {
        if Cholesky::new(g.as_matrix().clone()).is_none() {
            return Err(Error::NotMinimal);
        }
    }
    Ok(GrammianPair { wc, wo })
}

fn check_direction(plant: &Plant, v: &TangentDirection) -> Result<()> {
    let q = v.order();
    if v.e.shape() != (q, q) || v.f.shape() != (q, plant.p()) || v.g.shape() != (plant.m(), q) {
        return Err(Error::DimensionMismatch(format!(
            "direction blocks {:?}, {:?}, {:?} do not fit plant (m={}, p={})",
            v.e.shape(),
            v.f.shape(),
            v.g.shape(),
            plant.m(),
            plant.p()
        )));
    }
    Ok(())
}

/// `Ê(V) = [[0, BG], [FC, E]]`, `F̂(V) = [[0, 0], [0, F]]`, `Ĝ(V) = [[0, 0], [0, G]]`.
pub fn hat_maps(plant: &Plant, v: &TangentDirection) -> Result<HatMaps> {
    check_direction(plant, v)?;
    let (n, m, p, q) = (plant.n(), plant.m(), plant.p(), v.order());
    let f = block2(
        &Matrix::zeros(n, n),
        &Matrix::zeros(n, p),
        &Matrix::zeros(q, n),
        &v.f,
    );
    let g = block2(
        &Matrix::zeros(p, n),
        &Matrix::zeros(p, q),
        &Matrix::zeros(m, n),
        &v.g,
    );
    Ok(HatMaps {
        e: hat_e(plant, v),
        f,
        g,
    })
}

/// KM metric anchored at one controller; Grammians are computed once.
#[derive(Debug, Clone)]
pub struct KmMetric<'a> {
    plant: &'a Plant,
    controller: Controller,
    grammians: GrammianPair,
    weights: MetricWeights,
}

impl<'a> KmMetric<'a> {
    pub fn new(plant: &'a Plant, k: &Controller, weights: MetricWeights) -> Result<Self> {
        let grammians = closed_loop_grammians(plant, k)?;
        Ok(KmMetric {
            plant,
            controller: k.clone(),
            grammians,
            weights,
        })
    }

    pub fn grammians(&self) -> &GrammianPair {
        &self.grammians
    }

    pub fn weights(&self) -> MetricWeights {
        self.weights
    }

    pub fn inner(&self, v1: &TangentDirection, v2: &TangentDirection) -> Result<f64> {
        let h1 = hat_maps(self.plant, v1)?;
        let h2 = hat_maps(self.plant, v2)?;
        Ok(self.inner_hats(&self.weighted(&h1), &h2))
    }

    /// Precomputed left factors `(Wo Ê Wc, Wo F̂, Ĝ Wc)` for one direction.
    fn weighted(&self, h: &HatMaps) -> HatMaps {
        let wc = self.grammians.wc.as_matrix();
        let wo = self.grammians.wo.as_matrix();
        HatMaps {
            e: wo * &h.e * wc,
            f: wo * &h.f,
            g: &h.g * wc,
        }
    }

    fn inner_hats(&self, left: &HatMaps, right: &HatMaps) -> f64 {
        self.weights.w1 * left.e.dot(&right.e)
            + self.weights.w2 * left.f.dot(&right.f)
            + self.weights.w3 * left.g.dot(&right.g)
    }

    /// Gram matrix `Gᵢⱼ = ⟨Eᵢ, Eⱼ⟩_K` over `basis`.
    pub fn gram_matrix(&self, basis: &TangentBasis) -> Result<GramMatrix> {
        let hats: Vec<HatMaps> = basis
            .iter()
            .map(|d| hat_maps(self.plant, &d))
            .collect::<Result<_>>()?;
        let left: Vec<HatMaps> = hats.iter().map(|h| self.weighted(h)).collect();
        let n = hats.len();
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.inner_hats(&left[i], &hats[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        GramMatrix::factorize(
            SymmetricMatrix::symmetrize(g),
            self.controller.clone(),
            self.weights,
        )
    }
}

/// `⟨V₁, V₂⟩_K` under the KM metric with the given weights.
pub fn km_inner(
    plant: &Plant,
    k: &Controller,
    weights: MetricWeights,
    v1: &TangentDirection,
    v2: &TangentDirection,
) -> Result<f64> {
    KmMetric::new(plant, k, weights)?.inner(v1, v2)
}

const JITTER_RETRIES: usize = 3;
const JITTER_SCALE: f64 = 1e-12;
const JITTER_GROWTH: f64 = 100.0;

/// Metric coordinates at one controller, with the jitter needed (if any) to
/// make them Cholesky-factorizable.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    matrix: SymmetricMatrix,
    factorizable: SymmetricMatrix,
    jitter: f64,
    controller: Controller,
    weights: MetricWeights,
}

impl GramMatrix {
    /// Factor `g`, adding `λI` with `λ = 1e-12·tr(G)/N` (×100 per retry, three
    /// retries) when Cholesky fails.
    fn factorize(
        g: SymmetricMatrix,
        controller: Controller,
        weights: MetricWeights,
    ) -> Result<Self> {
        let n = g.dim();
        let mut lambda = JITTER_SCALE * g.trace().abs() / n as f64;
        let mut candidate = g.clone();
        let mut jitter = 0.0;
        for attempt in 0..=JITTER_RETRIES {
            if attempt > 0 {
                jitter = lambda;
                candidate =
                    SymmetricMatrix::symmetrize(g.as_matrix() + Matrix::identity(n, n) * lambda);
                lambda *= JITTER_GROWTH;
            }
            if Cholesky::new(candidate.as_matrix().clone()).is_some() {
                return Ok(GramMatrix {
                    matrix: g,
                    factorizable: candidate,
                    jitter,
                    controller,
                    weights,
                });
            }
        }
        Err(Error::MetricDegenerate)
    }

    /// Raw Gram matrix, without jitter.
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    /// Spectral condition number of the raw Gram matrix; infinite when it is
    /// not positive definite.
    pub fn condition_number(&self) -> f64 {
        let ev = symmetric_eigenvalues(self.matrix.as_matrix());
        let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }

    /// Jitter added before factorization; zero when none was needed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn weights(&self) -> MetricWeights {
        self.weights
    }

    /// `G⁻¹ d` via Cholesky.
    pub fn solve(&self, d: &DVector<f64>) -> Result<DVector<f64>> {
        spd_solve(&self.factorizable, d).map_err(|_| Error::MetricDegenerate)
    }
}

/// `G` over the canonical basis at `K`.
pub fn metric_gram_matrix(
    plant: &Plant,
    k: &Controller,
    weights: MetricWeights,
    basis: &TangentBasis,
) -> Result<GramMatrix> {
    KmMetric::new(plant, k, weights)?.gram_matrix(basis)
}

/// Euclidean gradient: `Σᵢ dJ(Eᵢ) Eᵢ` over the orthonormal basis.
pub fn euclidean_gradient(plant: &Plant, k: &Controller) -> Result<TangentDirection> {
    Ok(LqgEvaluation::new(plant, k)?.euclidean_gradient())
}

/// Riemannian gradient data at one controller.
#[derive(Debug, Clone)]
pub struct RiemannianGradient {
    /// `∇J = Σⱼ gⱼ Eⱼ` with `g = G⁻¹ d`.
    pub direction: TangentDirection,
    /// `‖∇J‖²_K = dᵀ G⁻¹ d`.
    pub norm_sq: f64,
    /// `dᵢ = dJ(Eᵢ)`.
    pub differential: DVector<f64>,
    pub gram: GramMatrix,
    /// Coordinate change `T` the gradient was computed in, if any;
    /// `differential` and `gram` then refer to `𝒯_T K`.
    pub balancing: Option<Matrix>,
}

impl RiemannianGradient {
    /// Gradient at the controller of an existing cost evaluation, solved in
    /// the canonical basis of the given coordinates.
    pub fn at(eval: &LqgEvaluation<'_>, weights: MetricWeights) -> Result<Self> {
        let k = eval.controller();
        let basis = TangentBasis::for_controller(k);
        let gram = metric_gram_matrix(eval.plant(), k, weights, &basis)?;
        let d = basis.coordinates(&eval.euclidean_gradient());
        let coords = gram.solve(&d)?;
        let norm_sq = d.dot(&coords).max(0.0);
        Ok(RiemannianGradient {
            direction: basis.combine(&coords),
            norm_sq,
            differential: d,
            gram,
            balancing: None,
        })
    }

    /// Gradient solved in balanced controller coordinates and mapped back.
    ///
    /// The result does not depend on the coordinates of `eval` up to
    /// rounding, whereas the conditioning of [`RiemannianGradient::at`]
    /// degrades with the fourth power of a coordinate change. Falls back to
    /// the given coordinates when no balancing transform exists.
    pub fn balanced(eval: &LqgEvaluation<'_>, weights: MetricWeights) -> Result<Self> {
        let plant = eval.plant();
        let Some(t) = balancing_transform(plant, eval.controller()) else {
            return Self::at(eval, weights);
        };
        let (Ok(kb), Some(t_inv)) = (eval.controller().transform(&t), t.clone().try_inverse())
        else {
            return Self::at(eval, weights);
        };
        let grad = Self::at(&LqgEvaluation::new(plant, &kb)?, weights)?;
        Ok(RiemannianGradient {
            direction: grad.direction.transform(&t_inv)?,
            balancing: Some(t),
            ..grad
        })
    }
}

/// `T` such that the controller blocks of both closed-loop Grammians at
/// `𝒯_T K` equal the same diagonal matrix `Σ`.
///
/// With `Wc₂₂ = L Lᵀ` and `Lᵀ Wo₂₂ L = U Λ Uᵀ`, `T = Λ^{1/4} Uᵀ L⁻¹` and
/// `Σ = Λ^{1/2}`. `None` when a block is not positive definite.
pub fn balancing_transform(plant: &Plant, k: &Controller) -> Option<Matrix> {
    let (n, q) = (plant.n(), k.order());
    let g = closed_loop_grammians(plant, k).ok()?;
    let block = |w: &SymmetricMatrix| w.as_matrix().view((n, n), (q, q)).into_owned();
    let l = Cholesky::new(block(&g.wc))?.l();
    let eig = SymmetricEigen::new(l.transpose() * block(&g.wo) * &l);
    if !eig.eigenvalues.iter().all(|&x| x > 0.0 && x.is_finite()) {
        return None;
    }
    let scale = Matrix::from_diagonal(&eig.eigenvalues.map(|x| x.sqrt().sqrt()));
    let l_inv = l.try_inverse()?;
    let t = scale * eig.eigenvectors.transpose() * l_inv;
    t.iter().all(|x| x.is_finite()).then_some(t)
}

/// `(∇J(K), ‖∇J(K)‖²_K)` under the KM metric, computed in balanced coordinates.
pub fn riemannian_gradient(
    plant: &Plant,
    k: &Controller,
    weights: MetricWeights,
) -> Result<(TangentDirection, f64)> {
    let eval = LqgEvaluation::new(plant, k)?;
    let grad = RiemannianGradient::balanced(&eval, weights)?;
    Ok((grad.direction, grad.norm_sq))
}
