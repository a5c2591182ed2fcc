use crate::error::{Error, Result};
use crate::matlin::{
    is_controllable, is_observable, sqrt_psd, Matrix, SymmetricMatrix, DEFAULT_RANK_TOL,
};

/// Linear plant `ẋ = Ax + Bu + w`, `y = Cx + v` with noise covariances
/// `W` (process) and `V` (measurement) and quadratic cost weights `Q`, `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    w: SymmetricMatrix,
    v: SymmetricMatrix,
    q: SymmetricMatrix,
    r: SymmetricMatrix,
}

/// Outcome of one standing assumption on the plant data.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub holds: bool,
}

/// Raw plant matrices before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParts {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub w: Matrix,
    pub v: Matrix,
    pub q: Matrix,
    pub r: Matrix,
}

impl PlantParts {
    fn check_shapes(&self) -> Result<()> {
        let n = self.a.nrows();
        let mismatch = |what: &str, got: (usize, usize), want: (usize, usize)| {
            Error::DimensionMismatch(format!(
                "{what} is {}x{}, expected {}x{}",
                got.0, got.1, want.0, want.1
            ))
        };
        if n == 0 || !self.a.is_square() {
            return Err(mismatch("A", self.a.shape(), (n.max(1), n.max(1))));
        }
        let m = self.b.ncols();
        let p = self.c.nrows();
        if m == 0 || self.b.nrows() != n {
            return Err(mismatch("B", self.b.shape(), (n, m.max(1))));
        }
        if p == 0 || self.c.ncols() != n {
            return Err(mismatch("C", self.c.shape(), (p.max(1), n)));
        }
        for (what, mat, k) in [
            ("W", &self.w, n),
            ("V", &self.v, p),
            ("Q", &self.q, n),
            ("R", &self.r, m),
        ] {
            if mat.shape() != (k, k) {
                return Err(mismatch(what, mat.shape(), (k, k)));
            }
        }
        for (what, mat) in [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("W", &self.w),
            ("V", &self.v),
            ("Q", &self.q),
            ("R", &self.r),
        ] {
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPlant(format!(
                    "{what} has non-finite entries"
                )));
            }
        }
        Ok(())
    }

    /// Evaluate every standing assumption. Shapes must already conform.
    pub fn assumptions(&self) -> Result<Vec<AssumptionCheck>> {
        self.check_shapes()?;
        let tol = DEFAULT_RANK_TOL;
        let symmetric =
            |m: &Matrix| (m - m.transpose()).amax() <= crate::matlin::SYMMETRY_TOL * m.amax();
        let w_sym = symmetric(&self.w);
        let v_sym = symmetric(&self.v);
        let q_sym = symmetric(&self.q);
        let r_sym = symmetric(&self.r);
        let w = SymmetricMatrix::symmetrize(self.w.clone());
        let v = SymmetricMatrix::symmetrize(self.v.clone());
        let q = SymmetricMatrix::symmetrize(self.q.clone());
        let r = SymmetricMatrix::symmetrize(self.r.clone());
        let w_psd = w_sym && w.is_psd(tol);
        let q_psd = q_sym && q.is_psd(tol);
        Ok(vec![
            AssumptionCheck {
                name: "W symmetric positive semidefinite",
                holds: w_psd,
            },
            AssumptionCheck {
                name: "V symmetric positive definite",
                holds: v_sym && v.is_pd(tol),
            },
            AssumptionCheck {
                name: "Q symmetric positive semidefinite",
                holds: q_psd,
            },
            AssumptionCheck {
                name: "R symmetric positive definite",
                holds: r_sym && r.is_pd(tol),
            },
            AssumptionCheck {
                name: "(A, B) controllable",
                holds: is_controllable(&self.a, &self.b, tol),
            },
            AssumptionCheck {
                name: "(A, W^1/2) controllable",
                holds: w_psd && is_controllable(&self.a, &sqrt_psd(&w), tol),
            },
            AssumptionCheck {
                name: "(A, C) observable",
                holds: is_observable(&self.a, &self.c, tol),
            },
            AssumptionCheck {
                name: "(A, Q^1/2) observable",
                holds: q_psd && is_observable(&self.a, &sqrt_psd(&q), tol),
            },
        ])
    }
}

impl Plant {
    /// Validate and build a plant; the first violated assumption is reported.
    pub fn new(parts: PlantParts) -> Result<Self> {
        if let Some(bad) = parts.assumptions()?.into_iter().find(|c| !c.holds) {
            return Err(Error::InvalidPlant(bad.name.to_string()));
        }
        Ok(Plant {
            w: SymmetricMatrix::symmetrize(parts.w),
            v: SymmetricMatrix::symmetrize(parts.v),
            q: SymmetricMatrix::symmetrize(parts.q),
            r: SymmetricMatrix::symmetrize(parts.r),
            a: parts.a,
            b: parts.b,
            c: parts.c,
        })
    }

    /// Plant with identity noise covariances and cost weights.
    pub fn with_identity_weights(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let p = c.nrows();
        Self::new(PlantParts {
            a,
            b,
            c,
            w: Matrix::identity(n, n),
            v: Matrix::identity(p, p),
            q: Matrix::identity(n, n),
            r: Matrix::identity(m, m),
        })
    }

    pub fn to_parts(&self) -> PlantParts {
        PlantParts {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            w: self.w.as_matrix().clone(),
            v: self.v.as_matrix().clone(),
            q: self.q.as_matrix().clone(),
            r: self.r.as_matrix().clone(),
        }
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn w(&self) -> &SymmetricMatrix {
        &self.w
    }
    pub fn v(&self) -> &SymmetricMatrix {
        &self.v
    }
    pub fn q(&self) -> &SymmetricMatrix {
        &self.q
    }
    pub fn r(&self) -> &SymmetricMatrix {
        &self.r
    }
}
