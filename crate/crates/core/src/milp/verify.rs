use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MilpModel, Solution, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Bound,
    Integrality,
    Constraint,
    Sos2Adjacency,
    MissingAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Variable, constraint or set name.
    pub name: String,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Bound => "bound",
            ViolationKind::Integrality => "integrality",
            ViolationKind::Constraint => "constraint",
            ViolationKind::Sos2Adjacency => "sos2 adjacency",
            ViolationKind::MissingAssignment => "missing assignment",
        };
        write!(f, "{}: {what} residual {}", self.name, self.residual)
    }
}

/// Independent feasibility check of an assignment against every bound,
/// row, integrality requirement and SOS-2 set of the model.
pub fn verify(model: &MilpModel, solution: &Solution, feas_tol: f64) -> Vec<Violation> {
    let Some(values) = solution.values.as_deref() else {
        return vec![Violation {
            kind: ViolationKind::MissingAssignment,
            name: format!("{:?}", solution.status),
            residual: f64::NAN,
        }];
    };
    if values.len() != model.num_vars() {
        return vec![Violation {
            kind: ViolationKind::MissingAssignment,
            name: format!("{} values for {} variables", values.len(), model.num_vars()),
            residual: f64::NAN,
        }];
    }
    let mut out = Vec::new();
    for (var, &x) in model.variables.iter().zip(values) {
        let below = var.lower - x;
        let above = x - var.upper;
        let excess = below.max(above);
        if excess > feas_tol || x.is_nan() {
            out.push(Violation {
                kind: ViolationKind::Bound,
                name: var.name.clone(),
                residual: excess,
            });
        }
        if var.kind == VarKind::Binary {
            let frac = (x - x.round()).abs();
            if frac > feas_tol {
                out.push(Violation {
                    kind: ViolationKind::Integrality,
                    name: var.name.clone(),
                    residual: frac,
                });
            }
        }
    }
    for c in &model.constraints {
        let residual = c.violation(values);
        if residual > feas_tol || residual.is_nan() {
            out.push(Violation {
                kind: ViolationKind::Constraint,
                name: c.name.clone(),
                residual,
            });
        }
    }
    for set in &model.sos2 {
        let mags: Vec<f64> = set.members.iter().map(|m| values[m.index()].abs()).collect();
        let nonzero: Vec<usize> = (0..mags.len()).filter(|&i| mags[i] > feas_tol).collect();
        let adjacent = match nonzero.as_slice() {
            [] | [_] => true,
            [a, b] => b - a == 1,
            _ => false,
        };
        if !adjacent {
            let total: f64 = mags.iter().sum();
            let best_pair = mags.windows(2).map(|w| w[0] + w[1]).fold(0.0, f64::max);
            out.push(Violation {
                kind: ViolationKind::Sos2Adjacency,
                name: set.name.clone(),
                residual: total - best_pair,
            });
        }
    }
    out
}

/// Difference between the reported objective and the one recomputed from the
/// assignment, when it exceeds 1e-6 absolute and 1e-8 relative.
pub fn objective_mismatch(model: &MilpModel, solution: &Solution) -> Option<f64> {
    let values = solution.values.as_deref()?;
    let recomputed = model.objective_value(values);
    let diff = (recomputed - solution.objective).abs();
    let tol = f64::max(1e-6, 1e-8 * recomputed.abs());
    (diff > tol || diff.is_nan()).then_some(diff)
}
