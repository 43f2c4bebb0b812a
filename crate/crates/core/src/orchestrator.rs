//! Runs the day-ahead session followed by the intraday sessions, the
//! uncoordinated baseline, and the demand-profile cost sweep.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{
    assemble_dam, assemble_idm, hold_assignment, FormulationError, LedgerState, Role, SessionModel, VarKey,
    VPP_ENTITY,
};
use crate::milp::{
    objective_mismatch, solve, verify, HighsAdapter, Solution, SolveOptions, SolveStatus, SolverAdapter, Sos2Branching,
};
use crate::scenario::{
    validate_scenario, Diagnostic, ForecastSet, ForecastWindow, MarketCalendar, Network, Scenario, SessionId,
};

/// Objective at or below this counts as "no gain" for the hold rule.
const HOLD_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vpp,
    Nocoord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    /// HiGHS with SOS-2 sets rewritten as segment binaries.
    #[default]
    Highs,
    /// SOS-2 set branching, HiGHS for every node relaxation.
    HighsSosBranching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    /// Sessions to run; must be a prefix of the calendar starting with the
    /// day-ahead session. `None` runs all of them.
    pub sessions: Option<Vec<SessionId>>,
    pub solver: SolverChoice,
    pub options: SolveOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Vpp,
            sessions: None,
            solver: SolverChoice::Highs,
            options: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("scenario is invalid ({} problems)", .0.len())]
    InvalidScenario(Vec<Diagnostic>),
    #[error("bad session list: {0}")]
    Sessions(String),
    #[error("unknown demand {0}")]
    UnknownDemand(String),
    #[error("demand {demand} has no profile {profile}")]
    UnknownProfile { demand: String, profile: String },
    #[error("profile {profile} of {demand} is the default profile")]
    DefaultProfile { demand: String, profile: String },
    #[error("day-ahead solve failed: {0}")]
    Solve(String),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
}

/// Outcome of one market session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionResult {
    pub session: SessionId,
    pub start: usize,
    pub status: SolveStatus,
    /// Objective reported by the solver (or of the held schedule).
    pub objective: f64,
    /// Profit recomputed from the schedule and prices.
    pub profit: f64,
    /// True when the previous schedule was kept unchanged.
    pub held: bool,
    /// Power traded in this session per period, 0 outside the window.
    pub trade: Vec<f64>,
    pub violations: Vec<String>,
    pub wall_time_s: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunFailure {
    pub session: SessionId,
    pub status: SolveStatus,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfitBreakdown {
    pub dam: f64,
    pub idm: BTreeMap<u32, f64>,
    pub idm_total: f64,
    pub total: f64,
}

impl ProfitBreakdown {
    fn from_sessions(sessions: &[SessionResult]) -> Self {
        let mut p = ProfitBreakdown::default();
        for r in sessions.iter().filter(|r| r.status.has_solution()) {
            match r.session {
                SessionId::Dam => p.dam += r.profit,
                SessionId::Idm(k) => *p.idm.entry(k).or_default() += r.profit,
            }
        }
        p.idm_total = p.idm.values().fold(0.0, |a, b| a + b);
        p.total = p.dam + p.idm_total;
        p
    }
}

/// Single-asset run inside the uncoordinated baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetRun {
    pub asset: String,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub mode: Mode,
    pub scenario: Scenario,
    pub sessions: Vec<SessionResult>,
    pub ledger: LedgerState,
    pub failure: Option<RunFailure>,
    pub profit: ProfitBreakdown,
    /// Per-asset runs, filled only in the uncoordinated mode.
    pub parts: Vec<AssetRun>,
}

impl RunResult {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn session(&self, id: SessionId) -> Option<&SessionResult> {
        self.sessions.iter().find(|r| r.session == id)
    }
}

fn adapter(choice: SolverChoice) -> Box<dyn SolverAdapter> {
    match choice {
        SolverChoice::Highs => Box::new(HighsAdapter::new()),
        SolverChoice::HighsSosBranching => Box::new(Sos2Branching::new(HighsAdapter::new())),
    }
}

fn planned_sessions(s: &Scenario, cfg: &RunConfig) -> Result<Vec<SessionId>, OrchestratorError> {
    let all = s.session_ids();
    let Some(wanted) = &cfg.sessions else {
        return Ok(all);
    };
    if wanted.len() > all.len() || wanted[..] != all[..wanted.len()] {
        let names: Vec<String> = all.iter().map(|x| x.to_string()).collect();
        return Err(OrchestratorError::Sessions(format!(
            "expected a prefix of [{}]",
            names.join(", ")
        )));
    }
    Ok(wanted.clone())
}

fn series(m: &SessionModel, x: &[f64], entity: &str, role: Role, periods: usize) -> Vec<f64> {
    let mut out = vec![0.0; periods];
    for (t, v) in m.series(x, entity, role) {
        out[t] = v;
    }
    out
}

/// Session profit from prices and schedules alone.
pub fn recompute_profit(s: &Scenario, m: &SessionModel, x: &[f64], before: &LedgerState) -> Result<f64, FormulationError> {
    let dt = s.dt();
    let value = |entity: &str, role: Role, t: usize| {
        m.value(x, &VarKey::at(entity, role, t))
            .ok_or_else(|| FormulationError::MissingVariable(VarKey::at(entity, role, t).to_string()))
    };
    let mut profit = 0.0;
    for t in m.start..s.periods() {
        let price = s.price(m.session, t);
        match m.session {
            SessionId::Dam => {
                profit += price * value(VPP_ENTITY, Role::DamTrade, t)? * dt;
                for a in &s.dres {
                    profit -= a.variable_cost * value(&a.id, Role::DresPower, t)? * dt;
                    profit -= a.startup_cost * value(&a.id, Role::DresStartup, t)?;
                    profit -= a.shutdown_cost * value(&a.id, Role::DresShutdown, t)?;
                }
            }
            SessionId::Idm(_) => {
                profit += price * value(VPP_ENTITY, Role::SessionTrade, t)? * dt;
                let prev = &before.schedule;
                for a in &s.dres {
                    let dp = value(&a.id, Role::DresPower, t)? - prev.require(&a.id, Role::DresPower, t)?;
                    let dv = value(&a.id, Role::DresStartup, t)? - prev.require(&a.id, Role::DresStartup, t)?;
                    let dw = value(&a.id, Role::DresShutdown, t)? - prev.require(&a.id, Role::DresShutdown, t)?;
                    profit -= a.variable_cost * dp * dt + a.startup_cost * dv + a.shutdown_cost * dw;
                }
            }
        }
    }
    if m.session == SessionId::Dam {
        for d in &s.demands {
            for (p, profile) in d.profiles.iter().enumerate() {
                let u = m
                    .value(x, &VarKey::new(&d.id, Role::DemandChoice(p as u16), None))
                    .unwrap_or(0.0);
                profit -= profile.cost * u;
            }
        }
    }
    Ok(profit)
}

fn solve_session(
    s: &Scenario,
    session: SessionId,
    ledger: &LedgerState,
    solver: &dyn SolverAdapter,
    options: &SolveOptions,
) -> Result<(SessionModel, Solution, bool), FormulationError> {
    let model = match session {
        SessionId::Dam => assemble_dam(s)?,
        SessionId::Idm(k) => assemble_idm(s, ledger, k)?,
    };
    let solution = solve(solver, &model.model, options);
    if let SessionId::Idm(_) = session {
        // Keep the previous schedule when re-optimizing gains nothing.
        let hold = Solution::from_assignment(&model.model, hold_assignment(&model, ledger)?);
        let no_gain = !solution.status.has_solution() || solution.objective <= hold.objective + HOLD_EPS;
        if no_gain && verify(&model.model, &hold, options.feas_tol).is_empty() {
            return Ok((model, hold, true));
        }
    }
    Ok((model, solution, false))
}

/// Day-ahead session, then the intraday sessions in calendar order, each
/// built on the ledger of the ones before. Stops at the first session that
/// does not yield a verified solution.
pub fn run_vpp(s: &Scenario, cfg: &RunConfig) -> Result<RunResult, OrchestratorError> {
    let diagnostics = validate_scenario(s);
    if !diagnostics.is_empty() {
        return Err(OrchestratorError::InvalidScenario(diagnostics));
    }
    let plan = planned_sessions(s, cfg)?;
    let solver = adapter(cfg.solver);
    let periods = s.periods();
    let mut ledger = LedgerState::new(periods);
    let mut sessions = Vec::new();
    let mut failure = None;

    for session in plan {
        let started = Instant::now();
        let (model, solution, held) = solve_session(s, session, &ledger, solver.as_ref(), &cfg.options)?;
        let mut result = SessionResult {
            session,
            start: model.start,
            status: solution.status,
            objective: solution.objective,
            profit: f64::NAN,
            held,
            trade: vec![0.0; periods],
            violations: Vec::new(),
            wall_time_s: 0.0,
            message: solution.message.clone(),
        };
        let Some(x) = solution.values.as_ref().filter(|_| solution.status.has_solution()) else {
            result.wall_time_s = started.elapsed().as_secs_f64();
            failure = Some(RunFailure {
                session,
                status: solution.status,
                message: solution.message.clone().unwrap_or_else(|| format!("{:?}", solution.status)),
            });
            sessions.push(result);
            break;
        };
        result.violations = verify(&model.model, &solution, cfg.options.feas_tol)
            .iter()
            .map(|v| v.to_string())
            .collect();
        if let Some(m) = objective_mismatch(&model.model, &solution) {
            result.violations.push(format!("objective: reported and recomputed differ by {m}"));
        }
        result.profit = recompute_profit(s, &model, x, &ledger)?;
        let role = if session == SessionId::Dam { Role::DamTrade } else { Role::SessionTrade };
        result.trade = series(&model, x, VPP_ENTITY, role, periods);
        ledger.record(&model, x, solution.objective);
        result.wall_time_s = started.elapsed().as_secs_f64();
        let failed = !result.violations.is_empty();
        if failed {
            failure = Some(RunFailure {
                session,
                status: SolveStatus::Error,
                message: format!("solution failed verification: {}", result.violations.join("; ")),
            });
        }
        sessions.push(result);
        if failed {
            break;
        }
    }

    Ok(RunResult {
        mode: Mode::Vpp,
        scenario: s.clone(),
        profit: ProfitBreakdown::from_sessions(&sessions),
        sessions,
        ledger,
        failure,
        parts: Vec::new(),
    })
}

fn isolated(s: &Scenario, asset: &str, bus: u32) -> Scenario {
    let window = |w: &ForecastWindow| ForecastWindow {
        ndres: w.ndres.iter().filter(|(k, _)| *k == asset).map(|(k, v)| (k.clone(), v.clone())).collect(),
        solar_field: w
            .solar_field
            .iter()
            .filter(|(k, _)| *k == asset)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    };
    let mut demands: Vec<_> = s.demands.iter().filter(|d| d.id == asset).cloned().collect();
    for d in &mut demands {
        if let Some((_, p)) = d.default_profile() {
            d.profiles = vec![p.clone()];
        }
        d.tol_lo = vec![0.0; s.periods()];
        d.tol_hi = vec![0.0; s.periods()];
    }
    Scenario {
        name: s.name.as_ref().map(|n| format!("{n}/{asset}")),
        description: None,
        network: Network {
            buses: vec![bus],
            main_grid_buses: vec![bus],
            lines: Vec::new(),
            trade_cap: BTreeMap::from([(bus, s.network.total_trade_cap())]),
        },
        dres: s.dres.iter().filter(|a| a.id == asset).cloned().collect(),
        ndres: s.ndres.iter().filter(|a| a.id == asset).cloned().collect(),
        stu: s.stu.iter().filter(|a| a.id == asset).cloned().collect(),
        demands,
        calendar: MarketCalendar { ..s.calendar.clone() },
        forecasts: ForecastSet {
            dam: window(&s.forecasts.dam),
            idm: s.forecasts.idm.iter().map(|(k, w)| (*k, window(w))).collect(),
        },
    }
}

/// Per-asset sub-scenarios of the uncoordinated baseline: each asset alone
/// on its bus with direct market access at the full trade cap, demands
/// fixed to their default profile.
pub fn isolated_scenarios(s: &Scenario) -> Vec<(String, Scenario)> {
    let mut assets: Vec<(String, u32)> = Vec::new();
    assets.extend(s.dres.iter().map(|a| (a.id.clone(), a.bus)));
    assets.extend(s.ndres.iter().map(|a| (a.id.clone(), a.bus)));
    assets.extend(s.stu.iter().map(|a| (a.id.clone(), a.bus)));
    assets.extend(s.demands.iter().map(|d| (d.id.clone(), d.bus)));
    assets
        .into_iter()
        .map(|(id, bus)| {
            let sub = isolated(s, &id, bus);
            (id, sub)
        })
        .collect()
}

/// Every asset trades on its own; the aggregate sums their sessions.
pub fn run_no_coordination(s: &Scenario, cfg: &RunConfig) -> Result<RunResult, OrchestratorError> {
    let diagnostics = validate_scenario(s);
    if !diagnostics.is_empty() {
        return Err(OrchestratorError::InvalidScenario(diagnostics));
    }
    let plan = planned_sessions(s, cfg)?;
    let sub_cfg = RunConfig {
        mode: Mode::Vpp,
        sessions: Some(plan.clone()),
        ..cfg.clone()
    };
    let mut parts = Vec::new();
    for (asset, sub) in isolated_scenarios(s) {
        let result = run_vpp(&sub, &sub_cfg)?;
        parts.push(AssetRun { asset, result });
    }

    let periods = s.periods();
    let mut ledger = LedgerState::new(periods);
    let mut sessions: Vec<SessionResult> = Vec::new();
    let mut failure = None;
    for id in &plan {
        let mut agg: Option<SessionResult> = None;
        for part in &parts {
            let Some(r) = part.result.session(*id) else { continue };
            let a = agg.get_or_insert_with(|| SessionResult {
                session: *id,
                start: r.start,
                status: SolveStatus::Optimal,
                objective: 0.0,
                profit: 0.0,
                held: true,
                trade: vec![0.0; periods],
                violations: Vec::new(),
                wall_time_s: 0.0,
                message: None,
            });
            a.objective += r.objective;
            a.profit += r.profit;
            a.held &= r.held;
            a.wall_time_s += r.wall_time_s;
            for (acc, v) in a.trade.iter_mut().zip(&r.trade) {
                *acc += v;
            }
            a.violations
                .extend(r.violations.iter().map(|v| format!("{}: {v}", part.asset)));
            if r.status != SolveStatus::Optimal {
                a.status = r.status;
            }
            if let (None, Some(f)) = (&failure, &part.result.failure) {
                if f.session == *id {
                    failure = Some(RunFailure {
                        session: *id,
                        status: f.status,
                        message: format!("{}: {}", part.asset, f.message),
                    });
                }
            }
        }
        if let Some(a) = agg {
            match id {
                SessionId::Dam => ledger.dam_trade = Some(a.trade.clone()),
                SessionId::Idm(k) => {
                    ledger.idm_trades.insert(*k, a.trade.clone());
                }
            }
            ledger.objectives.push((*id, a.objective));
            sessions.push(a);
        }
        if failure.is_some() {
            break;
        }
    }
    for part in &parts {
        let sub = &part.result.ledger;
        ledger
            .selected_profiles
            .extend(sub.selected_profiles.iter().map(|(k, v)| (k.clone(), *v)));
        for (key, v) in sub.schedule.iter() {
            if key.entity == VPP_ENTITY {
                continue;
            }
            let merged = match (key.role, ledger.schedule.get_key(key)) {
                (Role::PccTrade, Some(prev)) => prev + v,
                _ => *v,
            };
            ledger.schedule.set(key.clone(), merged);
        }
    }
    // Demands keep their default profile whatever index it has.
    for d in &s.demands {
        if let Some((i, _)) = d.default_profile() {
            ledger.selected_profiles.insert(d.id.clone(), i);
        }
    }

    Ok(RunResult {
        mode: Mode::Nocoord,
        scenario: s.clone(),
        profit: ProfitBreakdown::from_sessions(&sessions),
        sessions,
        ledger,
        failure,
        parts,
    })
}

pub fn run(s: &Scenario, cfg: &RunConfig) -> Result<RunResult, OrchestratorError> {
    match cfg.mode {
        Mode::Vpp => run_vpp(s, cfg),
        Mode::Nocoord => run_no_coordination(s, cfg),
    }
}

/// One profile cost override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSetting {
    pub demand: String,
    pub profile: String,
    pub cost: f64,
}

/// Day-ahead outcome at one point of a cost grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub costs: Vec<CostSetting>,
    pub status: SolveStatus,
    pub objective: f64,
    /// Chosen profile id per demand.
    pub chosen: BTreeMap<String, String>,
}

fn with_costs(s: &Scenario, costs: &[CostSetting]) -> Result<Scenario, OrchestratorError> {
    let mut out = s.clone();
    for c in costs {
        let d = out
            .demands
            .iter_mut()
            .find(|d| d.id == c.demand)
            .ok_or_else(|| OrchestratorError::UnknownDemand(c.demand.clone()))?;
        let p = d
            .profiles
            .iter_mut()
            .find(|p| p.id == c.profile)
            .ok_or_else(|| OrchestratorError::UnknownProfile {
                demand: c.demand.clone(),
                profile: c.profile.clone(),
            })?;
        p.cost = c.cost;
    }
    Ok(out)
}

fn chosen_profiles(s: &Scenario, m: &SessionModel, x: &[f64]) -> BTreeMap<String, String> {
    let mut chosen = BTreeMap::new();
    for d in &s.demands {
        for (p, profile) in d.profiles.iter().enumerate() {
            if m.value(x, &VarKey::new(&d.id, Role::DemandChoice(p as u16), None)).unwrap_or(0.0) > 0.5 {
                chosen.insert(d.id.clone(), profile.id.clone());
            }
        }
    }
    chosen
}

fn dam_point(s: &Scenario, costs: &[CostSetting], options: &SolveOptions) -> Result<GridPoint, OrchestratorError> {
    let scenario = with_costs(s, costs)?;
    let m = assemble_dam(&scenario)?;
    let sol = solve(&HighsAdapter::new(), &m.model, options);
    let chosen = sol
        .values
        .as_ref()
        .filter(|_| sol.status.has_solution())
        .map(|x| chosen_profiles(&scenario, &m, x))
        .unwrap_or_default();
    Ok(GridPoint {
        costs: costs.to_vec(),
        status: sol.status,
        objective: sol.objective,
        chosen,
    })
}

/// Runs the day-ahead session for every cost assignment of the grid, in
/// parallel, and records the profile each demand ends up with.
pub fn sweep_profile_costs(
    s: &Scenario,
    grid: &[Vec<CostSetting>],
    options: &SolveOptions,
) -> Result<Vec<GridPoint>, OrchestratorError> {
    grid.par_iter().map(|costs| dam_point(s, costs, options)).collect()
}

/// Largest cost at which a non-default profile is still chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Threshold {
    pub demand: String,
    pub profile: String,
    /// Largest evaluated cost at which the profile was chosen; `None` when
    /// it is not chosen even at `-max`.
    pub threshold: Option<f64>,
    /// Smallest evaluated cost at which it was not chosen; `None` when it
    /// is chosen even at `max`.
    pub rejected_at: Option<f64>,
    pub resolution: f64,
    /// Day-ahead value with the profile forced minus the value with it
    /// excluded, both at zero profile cost.
    pub exact: f64,
    /// Whether the coarse grid confirmed that selection is downward closed.
    pub downward_closed: bool,
    pub evaluations: usize,
}

fn forced_value(s: &Scenario, demand: &str, p: usize, on: bool, options: &SolveOptions) -> Result<f64, OrchestratorError> {
    let mut m = assemble_dam(s)?;
    let id = m.registry.get(&VarKey::new(demand, Role::DemandChoice(p as u16), None))?;
    let bound = if on { 1.0 } else { 0.0 };
    let var = &mut m.model.variables[id.index()];
    var.lower = bound;
    var.upper = bound;
    let sol = solve(&HighsAdapter::new(), &m.model, options);
    if sol.status != SolveStatus::Optimal {
        return Err(OrchestratorError::Solve(format!("{:?}: {}", sol.status, sol.message.unwrap_or_default())));
    }
    Ok(sol.objective)
}

/// Bisection on the cost of one profile over `[-max, max]` down to `step`,
/// cross-checked by the exact value gap and a coarse grid.
pub fn profile_threshold(
    s: &Scenario,
    demand: &str,
    profile: &str,
    max: f64,
    step: f64,
    options: &SolveOptions,
) -> Result<Threshold, OrchestratorError> {
    let d = s.demand(demand).ok_or_else(|| OrchestratorError::UnknownDemand(demand.into()))?;
    let p = d.profile_index(profile).ok_or_else(|| OrchestratorError::UnknownProfile {
        demand: demand.into(),
        profile: profile.into(),
    })?;
    if d.profiles[p].default {
        return Err(OrchestratorError::DefaultProfile {
            demand: demand.into(),
            profile: profile.into(),
        });
    }
    let setting = |cost: f64| {
        vec![CostSetting {
            demand: demand.into(),
            profile: profile.into(),
            cost,
        }]
    };
    let mut evaluations = 0;
    let mut chosen_at = |cost: f64| -> Result<bool, OrchestratorError> {
        evaluations += 1;
        let point = dam_point(s, &setting(cost), options)?;
        if !point.status.has_solution() {
            return Err(OrchestratorError::Solve(format!("{:?} at cost {cost}", point.status)));
        }
        Ok(point.chosen.get(demand).map(String::as_str) == Some(profile))
    };

    let (threshold, rejected_at) = if !chosen_at(-max)? {
        (None, Some(-max))
    } else if chosen_at(max)? {
        (Some(max), None)
    } else {
        let (mut lo, mut hi) = (-max, max);
        while hi - lo > step {
            let mid = 0.5 * (lo + hi);
            if chosen_at(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (Some(lo), Some(hi))
    };

    let mut zero_cost = s.clone();
    zero_cost
        .demands
        .iter_mut()
        .find(|x| x.id == demand)
        .expect("demand exists")
        .profiles[p]
        .cost = 0.0;
    let exact = forced_value(&zero_cost, demand, p, true, options)? - forced_value(&zero_cost, demand, p, false, options)?;

    let grid: Vec<_> = (0..=10).map(|i| setting(-max + 2.0 * max * i as f64 / 10.0)).collect();
    let points = sweep_profile_costs(s, &grid, options)?;
    evaluations += points.len();
    let picks: Vec<bool> = points
        .iter()
        .map(|g| g.chosen.get(demand).map(String::as_str) == Some(profile))
        .collect();
    let downward_closed = picks.windows(2).all(|w| w[0] || !w[1]);

    Ok(Threshold {
        demand: demand.into(),
        profile: profile.into(),
        threshold,
        rejected_at,
        resolution: step,
        exact,
        downward_closed,
        evaluations,
    })
}
