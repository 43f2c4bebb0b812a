//! Solver-agnostic mixed-integer linear model.
//!
//! The objective is always maximized. Backends that only minimize negate
//! internally.

mod highs_adapter;
mod lp_format;
mod reformulate;
mod solver;
mod sos_branch;
mod verify;

use std::fmt;

use thiserror::Error;

pub use highs_adapter::HighsAdapter;
pub use lp_format::write_lp;
pub use reformulate::reformulate_sos2_as_binary;
pub use solver::{solve, SolveOptions, SolveStatus, Solution, SolverAdapter};
pub use sos_branch::Sos2Branching;
pub use verify::{objective_mismatch, verify, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Sparse linear expression with a constant term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, var: VarId, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn add(&mut self, var: VarId, coef: f64) {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    pub fn extend(&mut self, other: &LinExpr, scale: f64) {
        for &(v, c) in &other.terms {
            self.add(v, c * scale);
        }
        self.constant += other.constant * scale;
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(v, c)| c * values[v.index()])
                .sum::<f64>()
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::new().term(v, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.index()]).sum()
    }

    /// Amount by which the row is violated (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Ordered set in which at most two adjacent members may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos2Set {
    pub name: String,
    pub members: Vec<VarId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{context} references undeclared variable {var}")]
    UnknownVariable { context: String, var: usize },
    #[error("binary variable {0} has bounds outside [0,1]")]
    BinaryBounds(String),
    #[error("variable {0} has lower bound above upper bound")]
    CrossedBounds(String),
    #[error("SOS-2 set {0} needs at least two members")]
    ShortSos2(String),
    #[error("SOS-2 member {0} needs finite bounds")]
    UnboundedSos2Member(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub sos2: Vec<Sos2Set>,
    /// Maximized.
    pub objective: LinExpr,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr sense rhs`; the expression's constant moves to the right-hand side.
    pub fn add_constraint(&mut self, name: impl Into<String>, expr: LinExpr, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merge_terms(expr.terms),
            sense,
            rhs: rhs - expr.constant,
        });
    }

    pub fn add_sos2(&mut self, name: impl Into<String>, members: Vec<VarId>) {
        self.sos2.push(Sos2Set {
            name: name.into(),
            members,
        });
    }

    pub fn set_objective(&mut self, objective: LinExpr) {
        self.objective = LinExpr {
            terms: merge_terms(objective.terms),
            constant: objective.constant,
        };
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.index()]
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let n = self.variables.len();
        let check_ref = |context: &str, v: VarId| {
            if v.index() < n {
                Ok(())
            } else {
                Err(ModelError::UnknownVariable {
                    context: context.to_string(),
                    var: v.index(),
                })
            }
        };
        for v in &self.variables {
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BinaryBounds(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(ModelError::CrossedBounds(v.name.clone()));
            }
        }
        for c in &self.constraints {
            for &(v, _) in &c.terms {
                check_ref(&c.name, v)?;
            }
        }
        for &(v, _) in &self.objective.terms {
            check_ref("objective", v)?;
        }
        for s in &self.sos2 {
            if s.members.len() < 2 {
                return Err(ModelError::ShortSos2(s.name.clone()));
            }
            for &m in &s.members {
                check_ref(&s.name, m)?;
                let var = &self.variables[m.index()];
                if !var.lower.is_finite() || !var.upper.is_finite() {
                    return Err(ModelError::UnboundedSos2Member(var.name.clone()));
                }
            }
        }
        Ok(())
    }
}

fn merge_terms(mut terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    terms.sort_by_key(|(v, _)| *v);
    let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match merged.last_mut() {
            Some((last, acc)) if *last == v => *acc += c,
            _ => merged.push((v, c)),
        }
    }
    merged.retain(|(_, c)| *c != 0.0);
    merged
}
