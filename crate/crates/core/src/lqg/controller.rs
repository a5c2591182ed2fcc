use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matlin::{block2, Matrix};

/// Condition number above which a coordinate transform is treated as singular.
pub const MAX_TRANSFORM_COND: f64 = 1e12;

/// Dynamic output-feedback controller `ξ̇ = A_K ξ + B_K y`, `u = C_K ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    a_k: Matrix,
    b_k: Matrix,
    c_k: Matrix,
}

/// Tangent vector `(E, F, G)` at a controller, perturbing `(A_K, B_K, C_K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDirection {
    pub e: Matrix,
    pub f: Matrix,
    pub g: Matrix,
}

fn check_blocks(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<()> {
    let q = a.nrows();
    if q == 0
        || !a.is_square()
        || b.nrows() != q
        || c.ncols() != q
        || b.ncols() == 0
        || c.nrows() == 0
    {
        return Err(Error::DimensionMismatch(format!(
            "controller blocks {}x{}, {}x{}, {}x{} do not tile",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    Ok(())
}

/// Flatten three blocks row-major, in (first, second, third) order.
fn flatten(blocks: [&Matrix; 3]) -> DVector<f64> {
    let len = blocks.iter().map(|m| m.len()).sum();
    let mut out = DVector::zeros(len);
    let mut k = 0;
    for m in blocks {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[k] = m[(i, j)];
                k += 1;
            }
        }
    }
    out
}

fn unflatten(v: &DVector<f64>, shapes: [(usize, usize); 3]) -> Result<[Matrix; 3]> {
    let len: usize = shapes.iter().map(|(r, c)| r * c).sum();
    if v.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "coordinate vector has length {}, expected {len}",
            v.len()
        )));
    }
    let mut k = 0;
    let mut take = |(r, c): (usize, usize)| {
        let m = Matrix::from_fn(r, c, |i, j| v[k + i * c + j]);
        k += r * c;
        m
    };
    Ok([take(shapes[0]), take(shapes[1]), take(shapes[2])])
}

/// `S⁻¹` when `cond(S) < MAX_TRANSFORM_COND`.
fn checked_inverse(s: &Matrix, q: usize) -> Result<Matrix> {
    if s.shape() != (q, q) {
        return Err(Error::DimensionMismatch(format!(
            "transform is {}x{}, controller order {q}",
            s.nrows(),
            s.ncols()
        )));
    }
    let sv = s.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond >= MAX_TRANSFORM_COND {
        return Err(Error::SingularTransform { cond });
    }
    s.clone().try_inverse().ok_or(Error::SingularTransform {
        cond: f64::INFINITY,
    })
}

impl Controller {
    pub fn new(a_k: Matrix, b_k: Matrix, c_k: Matrix) -> Result<Self> {
        check_blocks(&a_k, &b_k, &c_k)?;
        if [&a_k, &b_k, &c_k]
            .iter()
            .any(|m| m.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::NonFinite("controller"));
        }
        Ok(Controller { a_k, b_k, c_k })
    }

    pub fn a_k(&self) -> &Matrix {
        &self.a_k
    }
    pub fn b_k(&self) -> &Matrix {
        &self.b_k
    }
    pub fn c_k(&self) -> &Matrix {
        &self.c_k
    }

    /// Controller order `q`.
    pub fn order(&self) -> usize {
        self.a_k.nrows()
    }

    /// Number of plant outputs the controller reads.
    pub fn inputs(&self) -> usize {
        self.b_k.ncols()
    }

    /// Number of plant inputs the controller drives.
    pub fn outputs(&self) -> usize {
        self.c_k.nrows()
    }

    /// Block form `[[0_{m×p}, C_K], [B_K, A_K]]`.
    pub fn block_form(&self) -> Matrix {
        block2(
            &Matrix::zeros(self.outputs(), self.inputs()),
            &self.c_k,
            &self.b_k,
            &self.a_k,
        )
    }

    /// Parameters `(A_K, B_K, C_K)` flattened row-major in that order.
    pub fn to_vector(&self) -> DVector<f64> {
        flatten([&self.a_k, &self.b_k, &self.c_k])
    }

    pub fn from_vector(v: &DVector<f64>, q: usize, m: usize, p: usize) -> Result<Self> {
        let [a, b, c] = unflatten(v, [(q, q), (q, p), (m, q)])?;
        Self::new(a, b, c)
    }

    /// Euclidean retraction `K + t V`.
    pub fn retract(&self, v: &TangentDirection, t: f64) -> Controller {
        assert!(
            v.matches(self),
            "retract: direction shape does not match controller"
        );
        Controller {
            a_k: &self.a_k + &v.e * t,
            b_k: &self.b_k + &v.f * t,
            c_k: &self.c_k + &v.g * t,
        }
    }

    /// Frobenius norm of the block form.
    pub fn norm(&self) -> f64 {
        (self.a_k.norm_squared() + self.b_k.norm_squared() + self.c_k.norm_squared()).sqrt()
    }

    /// Coordinate change `(S A_K S⁻¹, S B_K, C_K S⁻¹)`.
    pub fn transform(&self, s: &Matrix) -> Result<Controller> {
        let s_inv = checked_inverse(s, self.order())?;
        Ok(Controller {
            a_k: s * &self.a_k * &s_inv,
            b_k: s * &self.b_k,
            c_k: &self.c_k * &s_inv,
        })
    }
}

impl TangentDirection {
    pub fn new(e: Matrix, f: Matrix, g: Matrix) -> Result<Self> {
        check_blocks(&e, &f, &g)?;
        Ok(TangentDirection { e, f, g })
    }

    pub fn zeros(q: usize, m: usize, p: usize) -> Self {
        TangentDirection {
            e: Matrix::zeros(q, q),
            f: Matrix::zeros(q, p),
            g: Matrix::zeros(m, q),
        }
    }

    /// Zero direction shaped like `k`.
    pub fn zeros_like(k: &Controller) -> Self {
        Self::zeros(k.order(), k.outputs(), k.inputs())
    }

    /// The controller's own parameters viewed as a tangent vector.
    pub fn from_controller(k: &Controller) -> Self {
        TangentDirection {
            e: k.a_k.clone(),
            f: k.b_k.clone(),
            g: k.c_k.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.e.nrows()
    }

    pub fn matches(&self, k: &Controller) -> bool {
        self.e.shape() == k.a_k.shape()
            && self.f.shape() == k.b_k.shape()
            && self.g.shape() == k.c_k.shape()
    }

    /// Dimension `q² + qp + qm` of the tangent space.
    pub fn dim(&self) -> usize {
        self.e.len() + self.f.len() + self.g.len()
    }

    /// Coordinates in the canonical basis: E row-major, then F, then G.
    pub fn to_vector(&self) -> DVector<f64> {
        flatten([&self.e, &self.f, &self.g])
    }

    pub fn from_vector(v: &DVector<f64>, q: usize, m: usize, p: usize) -> Result<Self> {
        let [e, f, g] = unflatten(v, [(q, q), (q, p), (m, q)])?;
        Ok(TangentDirection { e, f, g })
    }

    pub fn scale(&self, c: f64) -> Self {
        TangentDirection {
            e: &self.e * c,
            f: &self.f * c,
            g: &self.g * c,
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &TangentDirection, c: f64) -> Self {
        TangentDirection {
            e: &self.e + &other.e * c,
            f: &self.f + &other.f * c,
            g: &self.g + &other.g * c,
        }
    }

    /// Frobenius inner product of the block forms.
    pub fn inner(&self, other: &TangentDirection) -> f64 {
        self.e.dot(&other.e) + self.f.dot(&other.f) + self.g.dot(&other.g)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.e
            .iter()
            .chain(self.f.iter())
            .chain(self.g.iter())
            .all(|x| *x == 0.0)
    }

    /// Pushforward of the coordinate change; the transform is linear, so this
    /// is the same formula as [`Controller::transform`].
    pub fn transform(&self, s: &Matrix) -> Result<TangentDirection> {
        let s_inv = checked_inverse(s, self.order())?;
        Ok(TangentDirection {
            e: s * &self.e * &s_inv,
            f: s * &self.f,
            g: &self.g * &s_inv,
        })
    }
}
