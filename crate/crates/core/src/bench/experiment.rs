use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::BenchmarkSystem;
use crate::error::{Error, Result};
use crate::geometry::MetricWeights;
use crate::lqg::{lqg_riccati_optimum, Controller};
use crate::optimizer::{random_minimal_init, run, Algorithm, OptimizerConfig, RunTrace};

/// Gap used for the iterations-to-target column.
pub const TARGET_GAP: f64 = 1e-6;

/// One algorithm/metric column of the comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub algorithm: Algorithm,
    pub weights: MetricWeights,
}

impl Method {
    pub const GD: Method = Method {
        algorithm: Algorithm::Gd,
        weights: MetricWeights::UNIFORM,
    };
    pub const RGD_UNIFORM: Method = Method {
        algorithm: Algorithm::Rgd,
        weights: MetricWeights::UNIFORM,
    };
    pub const RGD_DYNAMICS: Method = Method {
        algorithm: Algorithm::Rgd,
        weights: MetricWeights::DYNAMICS_ONLY,
    };

    /// `GD`, or `RGD(w1,w2,w3)`.
    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Gd => "GD".into(),
            Algorithm::Rgd => format!(
                "RGD({},{},{})",
                self.weights.w1(),
                self.weights.w2(),
                self.weights.w3()
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Shared optimizer parameters; algorithm and weights come from `methods`.
    pub base: OptimizerConfig,
    pub methods: Vec<Method>,
    /// Seeds the initial controllers; system `i` draws from stream `i`.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            base: OptimizerConfig::default(),
            methods: vec![Method::GD, Method::RGD_UNIFORM, Method::RGD_DYNAMICS],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CellOutcome {
    Finished(RunTrace),
    Failed(Error),
}

/// One (system, method) run.
#[derive(Debug, Clone)]
pub struct ExperimentCell {
    pub system: String,
    pub method: Method,
    pub initial: Option<Controller>,
    pub optimal_cost: Option<f64>,
    pub outcome: CellOutcome,
}

impl ExperimentCell {
    pub fn trace(&self) -> Option<&RunTrace> {
        match &self.outcome {
            CellOutcome::Finished(t) => Some(t),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn summary(&self) -> SummaryRow {
        let trace = self.trace();
        SummaryRow {
            system: self.system.clone(),
            algorithm: self.method.label(),
            iters_to_target: trace.and_then(|t| t.iterations_to_gap(TARGET_GAP)),
            final_gap: trace.and_then(|t| t.final_gap()),
            wall_ms: trace.map(|t| t.last().wall_ms),
        }
    }
}

/// Row of the summary table. Missing values mean the target was never
/// reached, no oracle was available, or the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub system: String,
    pub algorithm: String,
    pub iters_to_target: Option<usize>,
    pub final_gap: Option<f64>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Ordered by system, then method.
    pub cells: Vec<ExperimentCell>,
}

impl ExperimentResult {
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.cells.iter().map(ExperimentCell::summary).collect()
    }
}

struct Prepared {
    initial: Result<Controller>,
    optimal_cost: Option<f64>,
}

fn prepare(system: &BenchmarkSystem, index: usize, seed: u64) -> Prepared {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let optimal_cost = system
        .optimal_cost
        .or_else(|| lqg_riccati_optimum(&system.plant).ok().map(|o| o.cost));
    Prepared {
        initial: random_minimal_init(&system.plant, &mut rng),
        optimal_cost,
    }
}

/// Runs every method on every system from one shared initial controller per
/// system. Cells run in parallel; a failing cell is recorded and the rest of
/// the suite continues.
pub fn run_experiment(
    suite: &[BenchmarkSystem],
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    config.base.validate()?;
    let prepared: Vec<Prepared> = suite
        .par_iter()
        .enumerate()
        .map(|(i, sys)| prepare(sys, i, config.seed))
        .collect();
    let jobs: Vec<(usize, &Method)> = (0..suite.len())
        .flat_map(|i| config.methods.iter().map(move |m| (i, m)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(i, method)| {
            let system = &suite[i];
            let prep = &prepared[i];
            let outcome = match &prep.initial {
                Ok(k0) => {
                    let run_config = OptimizerConfig {
                        algorithm: method.algorithm,
                        weights: method.weights,
                        ..config.base.clone()
                    };
                    match run(&system.plant, k0, &run_config, prep.optimal_cost) {
                        Ok(trace) => CellOutcome::Finished(trace),
                        Err(e) => CellOutcome::Failed(e),
                    }
                }
                Err(e) => CellOutcome::Failed(e.clone()),
            };
            ExperimentCell {
                system: system.name.clone(),
                method: method.clone(),
                initial: prep.initial.as_ref().ok().cloned(),
                optimal_cost: prep.optimal_cost,
                outcome,
            }
        })
        .collect();
    Ok(ExperimentResult { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::scalar_system;

    #[test]
    fn labels() {
        assert_eq!(Method::GD.label(), "GD");
        assert_eq!(Method::RGD_UNIFORM.label(), "RGD(1,1,1)");
        assert_eq!(Method::RGD_DYNAMICS.label(), "RGD(1,0,0)");
    }

    #[test]
    fn scalar_suite_converges_for_every_method() {
        let result = run_experiment(&[scalar_system()], &ExperimentConfig::default()).unwrap();
        assert_eq!(result.cells.len(), 3);
        let k0 = result.cells[0].initial.clone().unwrap();
        for cell in &result.cells {
            assert_eq!(cell.initial.as_ref(), Some(&k0));
            let gap = cell.trace().unwrap().final_gap().unwrap();
            assert!(gap < 1e-8, "{}: {gap}", cell.method.label());
        }
        let summary = result.summary();
        let algos: Vec<_> = summary.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(algos, ["GD", "RGD(1,1,1)", "RGD(1,0,0)"]);
        for row in &summary {
            let iters = row.iters_to_target.unwrap();
            assert!((1..=10_000).contains(&iters));
        }
    }
}
