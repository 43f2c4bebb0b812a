use std::time::Instant;

use super::{MilpModel, SolveOptions, SolveStatus, Solution, SolverAdapter, VarId};

/// Native SOS-2 handling by set branching on top of a backend without SOS
/// support.
///
/// Each node solves the model with SOS-2 conditions dropped and some set
/// members fixed to zero. A node whose solution has non-adjacent nonzeros in
/// a set with first and last nonzero members `a < b - 1` splits at
/// `r = (a + b) / 2` into "members after `r` are zero" and "members before
/// `r` are zero", which together cover every admissible pattern. Nodes are
/// explored depth first and pruned against the incumbent.
#[derive(Debug, Clone)]
pub struct Sos2Branching<A> {
    pub inner: A,
    pub max_nodes: usize,
}

impl<A: SolverAdapter> Sos2Branching<A> {
    pub fn new(inner: A) -> Self {
        Self {
            inner,
            max_nodes: 100_000,
        }
    }
}

fn first_violated_split(model: &MilpModel, values: &[f64], tol: f64) -> Option<(usize, usize)> {
    model.sos2.iter().enumerate().find_map(|(set_idx, set)| {
        let nonzero: Vec<usize> = set
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| values[m.index()].abs() > tol)
            .map(|(i, _)| i)
            .collect();
        match (nonzero.first(), nonzero.last()) {
            (Some(&a), Some(&b)) if b > a + 1 => Some((set_idx, (a + b) / 2)),
            _ => None,
        }
    })
}

impl<A: SolverAdapter> SolverAdapter for Sos2Branching<A> {
    fn name(&self) -> &str {
        "sos2-branching"
    }

    fn supports_sos2(&self) -> bool {
        true
    }

    fn reentrant(&self) -> bool {
        self.inner.reentrant()
    }

    fn solve_model(&self, model: &MilpModel, options: &SolveOptions) -> Solution {
        let started = Instant::now();
        let mut base = model.clone();
        base.sos2.clear();

        let mut stack: Vec<Vec<VarId>> = vec![Vec::new()];
        let mut incumbent: Option<(f64, Vec<f64>)> = None;
        let mut nodes = 0usize;
        let mut exhausted = true;

        while let Some(fixed) = stack.pop() {
            if nodes >= self.max_nodes || started.elapsed().as_secs_f64() > options.time_limit {
                exhausted = false;
                break;
            }
            nodes += 1;

            let mut node = base.clone();
            let mut impossible = false;
            for v in &fixed {
                let var = &mut node.variables[v.index()];
                if var.lower > 0.0 || var.upper < 0.0 {
                    impossible = true;
                    break;
                }
                var.lower = 0.0;
                var.upper = 0.0;
            }
            if impossible {
                continue;
            }

            let sol = self.inner.solve_model(&node, options);
            match sol.status {
                SolveStatus::Infeasible => continue,
                SolveStatus::Unbounded | SolveStatus::Error => {
                    let mut out = sol;
                    out.wall_time = started.elapsed();
                    return out;
                }
                SolveStatus::Optimal | SolveStatus::Feasible => {}
            }
            let values = sol.values.expect("solution status carries values");
            let objective = model.objective_value(&values);
            if let Some((best, _)) = &incumbent {
                let tol = f64::max(1e-9, options.gap_tol * best.abs());
                if objective <= best + tol {
                    continue;
                }
            }
            match first_violated_split(model, &values, options.feas_tol) {
                None => incumbent = Some((objective, values)),
                Some((set_idx, split)) => {
                    let members = &model.sos2[set_idx].members;
                    let mut right = fixed.clone();
                    right.extend_from_slice(&members[..split]);
                    let mut left = fixed;
                    left.extend_from_slice(&members[split + 1..]);
                    stack.push(right);
                    stack.push(left);
                }
            }
        }

        let wall_time = started.elapsed();
        match incumbent {
            Some((objective, values)) => Solution {
                status: if exhausted {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Feasible
                },
                objective,
                values: Some(values),
                gap: if exhausted { 0.0 } else { f64::NAN },
                wall_time,
                message: (!exhausted).then(|| format!("stopped after {nodes} nodes")),
            },
            None if exhausted => Solution {
                status: SolveStatus::Infeasible,
                objective: f64::NAN,
                values: None,
                gap: f64::NAN,
                wall_time,
                message: None,
            },
            None => {
                let mut s = Solution::without_values(SolveStatus::Error, format!("no incumbent after {nodes} nodes"));
                s.wall_time = wall_time;
                s
            }
        }
    }
}
