use rand::Rng;
use rand_distr::StandardNormal;

use super::{stability_certificate, OptimizerConfig};
use crate::error::{Error, Result};
use crate::lqg::{closed_loop_abscissa, lqg_cost, Controller, Plant, TangentDirection};
use crate::matlin::{is_controllable, is_observable, DEFAULT_RANK_TOL};

/// Halvings before the search gives up.
pub const MAX_HALVINGS: usize = 100;
/// Perturbed retries after landing on a non-minimal controller.
pub const MAX_PERTURBATIONS: usize = 10;

/// Accepted step of a backtracking search.
#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub controller: Controller,
    pub cost: f64,
    /// Direction actually used; differs from the input only after a
    /// non-minimal landing forced a perturbation.
    pub direction: TangentDirection,
    pub halvings: usize,
    pub perturbations: usize,
}

enum Probe {
    Admissible(f64),
    NonMinimal,
    Rejected,
}

fn probe(plant: &Plant, k: &Controller) -> Probe {
    match closed_loop_abscissa(plant, k) {
        Ok(a) if a < 0.0 => {}
        _ => return Probe::Rejected,
    }
    if !is_controllable(k.a_k(), k.b_k(), DEFAULT_RANK_TOL)
        || !is_observable(k.a_k(), k.c_k(), DEFAULT_RANK_TOL)
    {
        return Probe::NonMinimal;
    }
    // a Lyapunov failure this close to the boundary counts as leaving the domain
    match lqg_cost(plant, k) {
        Ok(c) if c.is_finite() => Probe::Admissible(c),
        _ => Probe::Rejected,
    }
}

/// `V + η‖V‖_F · N` with `N` a standard Gaussian direction normalized to unit
/// Frobenius norm.
pub fn perturb_direction<R: Rng + ?Sized>(
    v: &TangentDirection,
    eta: f64,
    rng: &mut R,
) -> TangentDirection {
    let mut noise = v.to_vector().map(|_| rng.sample::<f64, _>(StandardNormal));
    let norm = noise.norm();
    if norm == 0.0 || eta == 0.0 {
        return v.clone();
    }
    noise /= norm;
    let (q, m, p) = (v.e.nrows(), v.g.nrows(), v.f.ncols());
    let n =
        TangentDirection::from_vector(&noise, q, m, p).expect("noise has the direction's shape");
    v.add_scaled(&n, eta * v.norm())
}

/// Backtracking search along `direction` from `k`.
///
/// Starting from `s̄`, the step shrinks by `β` until `K⁺ = K + sV` is
/// stabilizing and minimal and `J(K) − J(K⁺) ≥ γ s ‖∇J‖²`. A stabilizing but
/// non-minimal `K⁺` triggers up to ten perturbed retries at the same step
/// before shrinking.
pub fn backtracking_line_search<R: Rng + ?Sized>(
    plant: &Plant,
    k: &Controller,
    cost: f64,
    direction: &TangentDirection,
    norm_sq: f64,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<LineSearchOutcome> {
    if direction.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let mut step = config.initial_step;
    if config.use_certificate {
        let cert = stability_certificate(plant, k, direction)?;
        step = step.min(0.99 * cert);
    }
    let mut perturbations = 0;
    for halvings in 0..=MAX_HALVINGS {
        let sufficient = |c: f64| cost - c >= config.armijo * step * norm_sq;
        let candidate = k.retract(direction, step);
        match probe(plant, &candidate) {
            Probe::Admissible(c) if sufficient(c) => {
                return Ok(LineSearchOutcome {
                    step,
                    controller: candidate,
                    cost: c,
                    direction: direction.clone(),
                    halvings,
                    perturbations,
                })
            }
            Probe::NonMinimal => {
                for _ in 0..MAX_PERTURBATIONS {
                    perturbations += 1;
                    let perturbed = perturb_direction(direction, config.perturb_scale, rng);
                    let candidate = k.retract(&perturbed, step);
                    match probe(plant, &candidate) {
                        Probe::Admissible(c) if sufficient(c) => {
                            return Ok(LineSearchOutcome {
                                step,
                                controller: candidate,
                                cost: c,
                                direction: perturbed,
                                halvings,
                                perturbations,
                            })
                        }
                        Probe::NonMinimal => continue,
                        _ => break,
                    }
                }
            }
            _ => {}
        }
        step *= config.backtrack;
    }
    Err(Error::StepSizeUnderflow {
        halvings: MAX_HALVINGS,
    })
}
