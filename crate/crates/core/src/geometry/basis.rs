use nalgebra::DVector;

use crate::lqg::{Controller, TangentDirection};

/// Canonical unit basis of the tangent space: entries of `E` in row-major
/// order, then `F`, then `G`. Orthonormal for the Frobenius inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TangentBasis {
    q: usize,
    m: usize,
    p: usize,
}

impl TangentBasis {
    /// Basis for order-`q` controllers with `m` plant inputs and `p` outputs.
    pub fn new(q: usize, m: usize, p: usize) -> Self {
        TangentBasis { q, m, p }
    }

    pub fn for_controller(k: &Controller) -> Self {
        Self::new(k.order(), k.outputs(), k.inputs())
    }

    /// `N = q² + qp + mq`.
    pub fn len(&self) -> usize {
        self.q * self.q + self.q * self.p + self.m * self.q
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.q, self.m, self.p)
    }

    /// The `i`-th basis direction.
    pub fn direction(&self, i: usize) -> TangentDirection {
        assert!(i < self.len(), "basis index {i} out of range");
        let mut coords = DVector::zeros(self.len());
        coords[i] = 1.0;
        self.combine(&coords)
    }

    /// `Σ cᵢ Eᵢ`.
    pub fn combine(&self, coords: &DVector<f64>) -> TangentDirection {
        TangentDirection::from_vector(coords, self.q, self.m, self.p)
            .expect("coordinate vector length matches the basis")
    }

    /// Coordinates of `v` in this basis.
    pub fn coordinates(&self, v: &TangentDirection) -> DVector<f64> {
        v.to_vector()
    }

    pub fn iter(&self) -> impl Iterator<Item = TangentDirection> + '_ {
        (0..self.len()).map(|i| self.direction(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal() {
        let basis = TangentBasis::new(2, 1, 3);
        assert_eq!(basis.len(), 4 + 6 + 2);
        let dirs: Vec<_> = basis.iter().collect();
        for (i, a) in dirs.iter().enumerate() {
            for (j, b) in dirs.iter().enumerate() {
                assert_eq!(a.inner(b), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn ordering_is_e_then_f_then_g() {
        let basis = TangentBasis::new(2, 1, 1);
        assert_eq!(basis.direction(1).e[(0, 1)], 1.0);
        assert_eq!(basis.direction(2).e[(1, 0)], 1.0);
        assert_eq!(basis.direction(4).f[(0, 0)], 1.0);
        assert_eq!(basis.direction(5).f[(1, 0)], 1.0);
        assert_eq!(basis.direction(7).g[(0, 1)], 1.0);
    }
}
