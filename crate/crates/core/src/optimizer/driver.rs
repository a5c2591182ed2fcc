use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    backtracking_line_search, Algorithm, IterationRecord, OptimizerConfig, RunTrace, Termination,
};
use crate::error::{Error, Result};
use crate::geometry::RiemannianGradient;
use crate::lqg::{is_admissible, Controller, LqgEvaluation, Plant, TangentDirection};
use crate::matlin::DEFAULT_RANK_TOL;

/// Riemannian gradient descent with `config.weights`.
pub fn run_rgd(
    plant: &Plant,
    k0: &Controller,
    config: &OptimizerConfig,
    optimal_cost: Option<f64>,
) -> Result<RunTrace> {
    run(
        plant,
        k0,
        &OptimizerConfig {
            algorithm: Algorithm::Rgd,
            ..config.clone()
        },
        optimal_cost,
    )
}

/// Euclidean gradient descent.
pub fn run_gd(
    plant: &Plant,
    k0: &Controller,
    config: &OptimizerConfig,
    optimal_cost: Option<f64>,
) -> Result<RunTrace> {
    run(
        plant,
        k0,
        &OptimizerConfig {
            algorithm: Algorithm::Gd,
            ..config.clone()
        },
        optimal_cost,
    )
}

fn descent_direction(
    eval: &LqgEvaluation<'_>,
    config: &OptimizerConfig,
) -> Result<(TangentDirection, f64)> {
    match config.algorithm {
        Algorithm::Rgd => {
            let grad = RiemannianGradient::balanced(eval, config.weights)?;
            Ok((grad.direction.scale(-1.0), grad.norm_sq))
        }
        Algorithm::Gd => {
            let grad = eval.euclidean_gradient();
            let norm_sq = grad.inner(&grad);
            Ok((grad.scale(-1.0), norm_sq))
        }
    }
}

/// Descent run with the algorithm named in `config`.
///
/// With `optimal_cost` supplied every record carries its gap and the run
/// halts once the gap falls below `config.halt_gap`. Stopping tests are made
/// in the order halting gap, gradient norm, iteration budget. Failures after
/// the first iterate end the run with [`Termination::Error`] and keep the
/// trace, except a degenerate metric, which is returned as an error.
pub fn run(
    plant: &Plant,
    k0: &Controller,
    config: &OptimizerConfig,
    optimal_cost: Option<f64>,
) -> Result<RunTrace> {
    config.validate()?;
    let report = is_admissible(plant, k0, DEFAULT_RANK_TOL)
        .map_err(|e| Error::InadmissibleStart(e.to_string()))?;
    if !report.is_admissible() {
        return Err(Error::InadmissibleStart(format!(
            "stabilizing = {}, minimal = {}",
            report.stabilizing, report.minimal
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let clock = Instant::now();
    let elapsed = || {
        if config.record_wall_time {
            clock.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };

    let mut records = Vec::new();
    let mut k = k0.clone();
    let mut step = 0.0;
    let finish = |records, termination, k| {
        Ok(RunTrace {
            records,
            termination,
            final_controller: k,
        })
    };

    for iter in 0.. {
        let evaluated = LqgEvaluation::new(plant, &k).and_then(|eval| {
            let dir = descent_direction(&eval, config)?;
            Ok((eval.cost(), dir))
        });
        let (cost, (direction, norm_sq)) = match evaluated {
            Ok(v) => v,
            Err(Error::MetricDegenerate) => return Err(Error::MetricDegenerate),
            Err(e) if iter == 0 => return Err(Error::InadmissibleStart(e.to_string())),
            Err(e) => return finish(records, Termination::Error(e.to_string()), k),
        };
        let gap = optimal_cost.map(|j| cost - j);
        let grad_norm = norm_sq.sqrt();
        records.push(IterationRecord {
            iter,
            cost,
            grad_norm,
            step,
            gap,
            wall_ms: elapsed(),
        });

        if let (Some(g), Some(halt)) = (gap, config.halt_gap) {
            if g < halt {
                return finish(records, Termination::HaltGap, k);
            }
        }
        if grad_norm < config.grad_tol {
            return finish(records, Termination::GradTol, k);
        }
        if iter >= config.max_iters {
            return finish(records, Termination::MaxIters, k);
        }

        match backtracking_line_search(plant, &k, cost, &direction, norm_sq, config, &mut rng) {
            Ok(out) => {
                k = out.controller;
                step = out.step;
            }
            Err(Error::StepSizeUnderflow { .. }) => {
                return finish(records, Termination::StepUnderflow, k)
            }
            Err(e) => return finish(records, Termination::Error(e.to_string()), k),
        }
    }
    unreachable!("the iteration budget bounds the loop")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricWeights;
    use crate::lqg::fixtures::{scalar_controller, scalar_plant};
    use crate::lqg::{admissible, lqg_riccati_optimum};

    fn j_star() -> f64 {
        6.0 * 2f64.sqrt() - 8.0
    }

    #[test]
    fn rgd_converges_on_scalar_plant() {
        let plant = scalar_plant();
        let trace = run_rgd(
            &plant,
            &scalar_controller(),
            &OptimizerConfig::default(),
            Some(j_star()),
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::HaltGap);
        assert!(trace.final_gap().unwrap() < 1e-10);
        assert!(trace.final_gap().unwrap() >= -1e-12);
    }

    #[test]
    fn gd_converges_on_scalar_plant() {
        let plant = scalar_plant();
        let trace = run_gd(
            &plant,
            &scalar_controller(),
            &OptimizerConfig::default(),
            Some(j_star()),
        )
        .unwrap();
        assert!(trace.final_gap().unwrap() < 1e-8, "{:?}", trace.termination);
    }

    #[test]
    fn costs_are_monotone_and_iterates_admissible() {
        let plant = scalar_plant();
        for config in [
            OptimizerConfig::default(),
            OptimizerConfig::rgd(MetricWeights::DYNAMICS_ONLY),
            OptimizerConfig::gd(),
        ] {
            let trace = run(&plant, &scalar_controller(), &config, Some(j_star())).unwrap();
            for w in trace.records.windows(2) {
                assert!(w[1].cost <= w[0].cost);
                assert!(w[1].step > 0.0);
            }
            assert_eq!(trace.records[0].step, 0.0);
            assert!(admissible(&plant, &trace.final_controller));
        }
    }

    #[test]
    fn start_at_optimum_stops_immediately() {
        let plant = scalar_plant();
        let opt = lqg_riccati_optimum(&plant).unwrap();
        let config = OptimizerConfig {
            halt_gap: None,
            ..Default::default()
        };
        for trace in [
            run_rgd(&plant, &opt.controller, &config, None).unwrap(),
            run_gd(&plant, &opt.controller, &config, None).unwrap(),
        ] {
            assert_eq!(trace.termination, Termination::GradTol);
            assert!(trace.iterations() <= 1);
        }
    }

    #[test]
    fn zero_budget_records_the_start_only() {
        let config = OptimizerConfig {
            max_iters: 0,
            ..Default::default()
        };
        let trace = run_rgd(&scalar_plant(), &scalar_controller(), &config, None).unwrap();
        assert_eq!(trace.termination, Termination::MaxIters);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].gap, None);
    }

    #[test]
    fn inadmissible_start_is_rejected() {
        let unstable = Controller::new(
            nalgebra::dmatrix![3.0],
            nalgebra::dmatrix![0.0],
            nalgebra::dmatrix![1.0],
        )
        .unwrap();
        assert!(matches!(
            run_rgd(
                &scalar_plant(),
                &unstable,
                &OptimizerConfig::default(),
                None
            ),
            Err(Error::InadmissibleStart(_))
        ));
        let non_minimal = Controller::new(
            nalgebra::dmatrix![-1.0],
            nalgebra::dmatrix![0.0],
            nalgebra::dmatrix![1.0],
        )
        .unwrap();
        assert!(matches!(
            run_gd(
                &scalar_plant(),
                &non_minimal,
                &OptimizerConfig::default(),
                None
            ),
            Err(Error::InadmissibleStart(_))
        ));
    }

    #[test]
    fn wall_time_can_be_disabled() {
        let config = OptimizerConfig {
            record_wall_time: false,
            ..Default::default()
        };
        let trace = run_rgd(
            &scalar_plant(),
            &scalar_controller(),
            &config,
            Some(j_star()),
        )
        .unwrap();
        assert!(trace.records.iter().all(|r| r.wall_ms == 0.0));
    }
}
