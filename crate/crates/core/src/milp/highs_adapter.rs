use std::num::NonZeroU32;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, Model, RowProblem, Sense as HighsSense};

use super::{MilpModel, Sense, SolveOptions, SolveStatus, Solution, SolverAdapter, VarKind};

/// HiGHS backend. SOS-2 sets are not supported natively and go through the
/// binary reformulation.
///
/// After a MIP solve the integer variables are rounded and fixed, and the
/// remaining LP is re-solved at a tighter primal tolerance, so that returned
/// assignments are exactly integral.
#[derive(Debug, Clone, Default)]
pub struct HighsAdapter {
    /// Skips the LP polish pass after MIP solves.
    pub skip_polish: bool,
}

impl HighsAdapter {
    pub fn new() -> Self {
        Self::default()
    }
}

const POLISH_FEAS_TOL: f64 = 1e-9;

struct Outcome {
    status: HighsModelStatus,
    has_primal: bool,
    values: Vec<f64>,
    gap: f64,
}

fn run_highs(
    model: &MilpModel,
    options: &SolveOptions,
    fixed_integers: Option<&[f64]>,
) -> Result<Outcome, String> {
    let mut problem = RowProblem::default();
    let mut cols = Vec::with_capacity(model.num_vars());
    let mut cost = vec![0.0; model.num_vars()];
    for &(v, c) in &model.objective.terms {
        cost[v.index()] += c;
    }
    for (i, var) in model.variables.iter().enumerate() {
        let (lo, hi) = match fixed_integers {
            Some(vals) if var.kind == VarKind::Binary => (vals[i], vals[i]),
            _ => (var.lower, var.upper),
        };
        let integer = var.kind == VarKind::Binary && fixed_integers.is_none();
        cols.push(problem.add_column_with_integrality(cost[i], lo..=hi, integer));
    }
    for c in &model.constraints {
        let row: Vec<_> = c.terms.iter().map(|&(v, a)| (cols[v.index()], a)).collect();
        match c.sense {
            Sense::Le => problem.add_row(..=c.rhs, row),
            Sense::Ge => problem.add_row(c.rhs.., row),
            Sense::Eq => problem.add_row(c.rhs..=c.rhs, row),
        }
    }

    let mut highs = Model::try_new(problem).map_err(|e| format!("HiGHS rejected the model: {e:?}"))?;
    highs.make_quiet();
    highs.set_sense(HighsSense::Maximise);
    highs.set_threads(NonZeroU32::MIN);
    highs.set_option("random_seed", 0);
    highs.set_option("time_limit", options.time_limit);
    highs.set_option("mip_rel_gap", options.gap_tol);
    highs.set_option("mip_abs_gap", 1e-9);
    // The neighbourhood sub-MIPs dominate run time on the storage models
    // without improving incumbents.
    highs.set_option("mip_heuristic_run_rins", false);
    highs.set_option("mip_heuristic_run_rens", false);
    if fixed_integers.is_some() {
        highs.set_option("primal_feasibility_tolerance", POLISH_FEAS_TOL);
    }
    let solved = highs
        .try_solve()
        .map_err(|e| format!("HiGHS solve failed: {e:?}"))?;
    let status = solved.status();
    let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
    let gap = if model.num_binaries() > 0 && fixed_integers.is_none() {
        solved.mip_gap()
    } else {
        0.0
    };
    let values = if has_primal {
        solved.get_solution().columns().to_vec()
    } else {
        Vec::new()
    };
    Ok(Outcome {
        status,
        has_primal,
        values,
        gap,
    })
}

impl SolverAdapter for HighsAdapter {
    fn name(&self) -> &str {
        "highs"
    }

    fn supports_sos2(&self) -> bool {
        false
    }

    fn reentrant(&self) -> bool {
        true
    }

    fn solve_model(&self, model: &MilpModel, options: &SolveOptions) -> Solution {
        let started = Instant::now();
        if !model.sos2.is_empty() {
            return Solution::without_values(SolveStatus::Error, "HiGHS adapter has no native SOS-2 support");
        }
        if model.num_vars() == 0 {
            return Solution {
                status: SolveStatus::Optimal,
                objective: model.objective.constant,
                values: Some(Vec::new()),
                gap: 0.0,
                wall_time: started.elapsed(),
                message: None,
            };
        }
        let outcome = match run_highs(model, options, None) {
            Ok(o) => o,
            Err(msg) => return Solution::without_values(SolveStatus::Error, msg),
        };
        let (status, message) = match outcome.status {
            HighsModelStatus::Optimal => (SolveStatus::Optimal, None),
            HighsModelStatus::Infeasible => (SolveStatus::Infeasible, None),
            HighsModelStatus::UnboundedOrInfeasible => (
                SolveStatus::Infeasible,
                Some("backend reported unbounded or infeasible".to_string()),
            ),
            HighsModelStatus::Unbounded => (SolveStatus::Unbounded, None),
            other if outcome.has_primal => (
                SolveStatus::Feasible,
                Some(format!("stopped early: {other:?}")),
            ),
            other => (SolveStatus::Error, Some(format!("no solution: {other:?}"))),
        };
        if !status.has_solution() {
            return Solution {
                status,
                objective: f64::NAN,
                values: None,
                gap: f64::NAN,
                wall_time: started.elapsed(),
                message,
            };
        }

        let mut values = outcome.values;
        if model.num_binaries() > 0 && !self.skip_polish {
            let rounded: Vec<f64> = model
                .variables
                .iter()
                .zip(&values)
                .map(|(var, &x)| if var.kind == VarKind::Binary { x.round() } else { x })
                .collect();
            if let Ok(polished) = run_highs(model, options, Some(&rounded)) {
                if polished.status == HighsModelStatus::Optimal && polished.has_primal {
                    values = polished.values;
                }
            }
        }
        Solution {
            status,
            objective: model.objective_value(&values),
            values: Some(values),
            gap: outcome.gap,
            wall_time: started.elapsed(),
            message,
        }
    }
}
