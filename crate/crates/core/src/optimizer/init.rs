use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lqg::{admissible, Controller, Plant};
use crate::matlin::place_poles;

/// Attempts before [`random_minimal_init`] gives up.
pub const MAX_INIT_ATTEMPTS: usize = 20;

/// Observer-based full-order controller with a random state-feedback gain and
/// a random observer gain, all poles drawn i.i.d. uniform in `(−2, −1)`:
/// `A_K = A − B F − L C`, `B_K = L`, `C_K = −F`.
///
/// By separation the closed-loop spectrum is the union of the two placed
/// pole sets. Draws repeat until the controller is stabilizing and minimal.
pub fn random_minimal_init<R: Rng + ?Sized>(plant: &Plant, rng: &mut R) -> Result<Controller> {
    let n = plant.n();
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    let draw_poles = |rng: &mut R| -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-2.0..-1.0), 0.0))
            .collect()
    };
    for _ in 0..MAX_INIT_ATTEMPTS {
        let gain_poles = draw_poles(rng);
        let observer_poles = draw_poles(rng);
        let Ok(gain) = place_poles(a, b, &gain_poles, rng) else {
            continue;
        };
        let Ok(observer_t) = place_poles(&a.transpose(), &c.transpose(), &observer_poles, rng)
        else {
            continue;
        };
        let observer = observer_t.transpose();
        let a_k = a - b * &gain - &observer * c;
        let Ok(k) = Controller::new(a_k, observer, -gain) else {
            continue;
        };
        if admissible(plant, &k) {
            return Ok(k);
        }
    }
    Err(Error::InitFailure {
        attempts: MAX_INIT_ATTEMPTS,
    })
}
