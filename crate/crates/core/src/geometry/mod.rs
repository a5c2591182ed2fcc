//! Krishnaprasad–Martin metric on minimal controllers.
//!
//! For a minimal stabilizing `K` the closed-loop Grammians `Wc`, `Wo` are
//! positive definite and
//!
//! ```text
//! ⟨V₁, V₂⟩_K = w1·tr[Wo Ê₁ Wc Ê₂ᵀ] + w2·tr[F̂₁ᵀ Wo F̂₂] + w3·tr[Ĝ₁ Wc Ĝ₂ᵀ]
//! ```
//!
//! where `Ê`, `F̂`, `Ĝ` are the differentials of `A_cl`, `B_cl`, `C_cl`. The
//! metric is invariant under controller coordinate changes, which makes the
//! Riemannian gradient equivariant.

mod basis;
mod metric;

pub use basis::TangentBasis;
pub use metric::{
    balancing_transform, closed_loop_grammians, euclidean_gradient, hat_maps, km_inner,
    metric_gram_matrix, riemannian_gradient, GramMatrix, GrammianPair, HatMaps, KmMetric,
    MetricWeights, RiemannianGradient,
};
