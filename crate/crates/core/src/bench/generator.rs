use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::BenchmarkSystem;
use crate::error::{Error, Result};
use crate::lqg::Plant;

pub const MAX_GENERATION_ATTEMPTS: usize = 50;

fn sparse_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    density: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        if rng.random::<f64>() < density {
            rng.sample(StandardNormal)
        } else {
            0.0
        }
    })
}

/// Random plant with identity weights whose `A`, `B`, `C` entries are zero
/// with probability `1 − density` and standard Gaussian otherwise. Draws
/// repeat until the standing assumptions hold.
pub fn generate_random_plant<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    p: usize,
    density: f64,
    rng: &mut R,
) -> Result<Plant> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidConfig(format!(
            "dimensions must be positive, got ({n}, {m}, {p})"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        // A, B, C are drawn in this order, each row-major
        let a = sparse_gaussian(n, n, density, rng).transpose();
        let b = sparse_gaussian(m, n, density, rng).transpose();
        let c = sparse_gaussian(n, p, density, rng).transpose();
        if let Ok(plant) = Plant::with_identity_weights(a, b, c) {
            return Ok(plant);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// One random plant per seed, named `random-<seed>`, each drawn from its own
/// `ChaCha8` stream seeded with `seed`.
pub fn random_suite(
    n: usize,
    m: usize,
    p: usize,
    density: f64,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<BenchmarkSystem>> {
    seeds
        .into_iter()
        .map(|seed| {
            let plant =
                generate_random_plant(n, m, p, density, &mut ChaCha8Rng::seed_from_u64(seed))?;
            Ok(BenchmarkSystem::new(
                format!("random-{seed}"),
                plant,
                format!("random ({n},{m},{p}) plant, density {density}, seed {seed}"),
            ))
        })
        .collect()
}
