use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    NumericalFailure,
    /// Line search could not find an acceptable step.
    Stalled,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max-iters",
            SolveStatus::NumericalFailure => "numerical-failure",
            SolveStatus::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// `tr(F⁻¹)` at the new iterate.
    pub objective: f64,
    /// Dual variable of the power constraint.
    pub lambda: f64,
    /// Penalty in effect (LPM) or accepted step length (PGD).
    pub rho: f64,
    /// `‖p^{k+1} − p^k‖`.
    pub step_norm: f64,
    /// Relative violation of the linearized power constraint (LPM only).
    pub constraint_residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub initial_objective: f64,
    /// Objective of the returned beamformer (after any final rescale).
    pub final_objective: f64,
    /// `p^0, p^1, …` when the solver was asked to keep them.
    pub iterates: Vec<CVector>,
    /// Failure description when `status` is `NumericalFailure`.
    pub failure: Option<String>,
}

impl SolverTrace {
    pub(crate) fn new(initial_objective: f64) -> Self {
        Self {
            records: Vec::new(),
            status: SolveStatus::MaxIters,
            initial_objective,
            final_objective: initial_objective,
            iterates: Vec::new(),
            failure: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn total_wall_time(&self) -> f64 {
        self.records.iter().map(|r| r.wall_time).sum()
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }
}
