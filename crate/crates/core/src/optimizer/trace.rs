use std::fmt;

use crate::lqg::Controller;

/// One iterate of a descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: f64,
    /// KM norm for RGD, Frobenius norm for GD.
    pub grad_norm: f64,
    /// Step that produced this iterate; zero for the starting point.
    pub step: f64,
    /// `cost − J*` when the optimum is known.
    pub gap: Option<f64>,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    GradTol,
    HaltGap,
    MaxIters,
    StepUnderflow,
    Error(String),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::GradTol => write!(f, "GradTol"),
            Termination::HaltGap => write!(f, "HaltGap"),
            Termination::MaxIters => write!(f, "MaxIters"),
            Termination::StepUnderflow => write!(f, "StepUnderflow"),
            Termination::Error(msg) => write!(f, "Error: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub final_controller: Controller,
}

impl RunTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records
            .last()
            .expect("a trace always holds the starting record")
    }

    pub fn final_cost(&self) -> f64 {
        self.last().cost
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.last().gap
    }

    /// Number of descent steps taken.
    pub fn iterations(&self) -> usize {
        self.last().iter
    }

    /// First iteration whose gap is at most `target`.
    pub fn iterations_to_gap(&self, target: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.gap.is_some_and(|g| g <= target))
            .map(|r| r.iter)
    }

    /// Largest successive gap ratio `gap_{t+1}/gap_t` over the last `window`
    /// steps, restricted to strictly positive gaps.
    pub fn tail_rate(&self, window: usize) -> Option<f64> {
        let gaps: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.gap)
            .filter(|g| *g > 0.0)
            .collect();
        if gaps.len() < 2 {
            return None;
        }
        let start = gaps.len().saturating_sub(window + 1);
        gaps[start..]
            .windows(2)
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }
}
