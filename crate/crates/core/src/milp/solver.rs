use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{reformulate_sos2_as_binary, MilpModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative optimality gap.
    pub gap_tol: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Primal feasibility tolerance used when certifying solutions.
    pub feas_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            time_limit: 60.0,
            feas_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    /// Present iff the status carries a solution.
    pub values: Option<Vec<f64>>,
    /// Relative gap reported by the backend.
    pub gap: f64,
    pub wall_time: Duration,
    pub message: Option<String>,
}

impl Solution {
    pub fn without_values(status: SolveStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: None,
            gap: f64::NAN,
            wall_time: Duration::ZERO,
            message: Some(message.into()),
        }
    }

    /// Wraps a known assignment, e.g. a candidate to be checked with `verify`.
    pub fn from_assignment(model: &MilpModel, values: Vec<f64>) -> Self {
        Self {
            status: SolveStatus::Feasible,
            objective: model.objective_value(&values),
            values: Some(values),
            gap: f64::NAN,
            wall_time: Duration::ZERO,
            message: None,
        }
    }

    pub fn value(&self, var: super::VarId) -> f64 {
        self.values.as_ref().map_or(f64::NAN, |v| v[var.index()])
    }
}

/// A MILP backend.
pub trait SolverAdapter: Sync {
    fn name(&self) -> &str;

    /// Whether SOS-2 sets are handled natively. When false, [`solve`]
    /// reformulates them with segment binaries before calling the backend.
    fn supports_sos2(&self) -> bool;

    /// Whether concurrent calls on the same adapter are safe.
    fn reentrant(&self) -> bool;

    /// Solves the model as given. Never panics on backend failure; errors
    /// are reported through [`SolveStatus::Error`].
    fn solve_model(&self, model: &MilpModel, options: &SolveOptions) -> Solution;
}

/// Solves `model`, reformulating SOS-2 sets when the adapter lacks native
/// support. The returned assignment always refers to the variables of `model`.
pub fn solve(adapter: &dyn SolverAdapter, model: &MilpModel, options: &SolveOptions) -> Solution {
    if let Err(e) = model.check() {
        return Solution::without_values(SolveStatus::Error, format!("invalid model: {e}"));
    }
    if model.sos2.is_empty() || adapter.supports_sos2() {
        return adapter.solve_model(model, options);
    }
    let reformulated = reformulate_sos2_as_binary(model);
    let mut solution = adapter.solve_model(&reformulated, options);
    // Added variables are appended, so the original ones keep their indices.
    if let Some(values) = solution.values.as_mut() {
        values.truncate(model.num_vars());
        solution.objective = model.objective_value(values);
    }
    solution
}
