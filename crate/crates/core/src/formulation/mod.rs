//! MILP formulations of the day-ahead and intraday sessions.
//!
//! Every session model covers a delivery window `start..T` (0-based). The
//! day-ahead window is the whole horizon; an intraday window starts at the
//! session's first delivery period and takes its initial conditions from the
//! ledger of earlier sessions.

mod dam;
mod idm;
mod ledger;
mod network;
mod registry;
mod units;

use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use crate::milp::{LinExpr, MilpModel, ModelError, Sense, VarId, VarKind};
use crate::scenario::{Scenario, SessionId, WindowForecast};

pub use dam::{
    assemble_dam, build_dam_objective, build_demand_profile_constraints, build_trade_definition,
};
pub use idm::{
    assemble_idm, build_idm_demand_constraints, build_idm_objective, build_idm_trade_constraints,
    hold_assignment,
};
pub use ledger::{LedgerState, Schedule};
pub use network::{build_balance_constraints, build_dc_flow_constraints, declare_network};
pub use registry::{Role, VarKey, VariableRegistry};
pub use units::{build_dres_constraints, build_ndres_constraints, declare_dres, declare_ndres, DresCosts};

/// Entity name of VPP-level variables (total trades).
pub const VPP_ENTITY: &str = "vpp";

pub fn bus_entity(bus: u32) -> String {
    format!("bus{bus}")
}

#[derive(Debug, Error, PartialEq)]
pub enum FormulationError {
    #[error("variable {0} was not registered")]
    MissingVariable(String),
    #[error("variable {0} registered twice")]
    DuplicateVariable(String),
    #[error("scenario has no data for session {0}")]
    MissingSession(String),
    #[error("ledger is missing {0}")]
    MissingLedgerEntry(String),
    #[error("network has no main grid bus")]
    NoReferenceBus,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Conditions at the period just before a session window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialState {
    pub dres_on: BTreeMap<String, bool>,
    pub stu_energy: BTreeMap<String, f64>,
    pub stu_pb_on: BTreeMap<String, bool>,
}

impl InitialState {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            dres_on: s.dres.iter().map(|a| (a.id.clone(), a.initial_commitment)).collect(),
            stu_energy: s.stu.iter().map(|a| (a.id.clone(), a.initial_energy)).collect(),
            stu_pb_on: s.stu.iter().map(|a| (a.id.clone(), a.initial_pb_on)).collect(),
        }
    }
}

/// Model under construction for one session window.
pub struct ModelBuilder<'a> {
    pub scenario: &'a Scenario,
    pub session: SessionId,
    pub start: usize,
    pub forecast: WindowForecast<'a>,
    pub initial: InitialState,
    pub model: MilpModel,
    pub reg: VariableRegistry,
}

impl<'a> ModelBuilder<'a> {
    pub fn new(scenario: &'a Scenario, session: SessionId, initial: InitialState) -> Result<Self, FormulationError> {
        let forecast = scenario
            .forecast(session)
            .ok_or_else(|| FormulationError::MissingSession(session.to_string()))?;
        Ok(Self {
            scenario,
            session,
            start: forecast.start,
            forecast,
            initial,
            model: MilpModel::new(),
            reg: VariableRegistry::new(),
        })
    }

    pub fn periods(&self) -> Range<usize> {
        self.start..self.scenario.periods()
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt()
    }

    pub fn var(&mut self, key: VarKey, kind: VarKind, lower: f64, upper: f64) -> Result<VarId, FormulationError> {
        self.reg.declare(&mut self.model, key, kind, lower, upper)
    }

    pub fn continuous(&mut self, entity: &str, role: Role, t: usize, lower: f64, upper: f64) -> Result<VarId, FormulationError> {
        self.var(VarKey::at(entity, role, t), VarKind::Continuous, lower, upper)
    }

    pub fn free(&mut self, entity: &str, role: Role, t: usize) -> Result<VarId, FormulationError> {
        self.continuous(entity, role, t, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn binary(&mut self, entity: &str, role: Role, t: usize) -> Result<VarId, FormulationError> {
        self.var(VarKey::at(entity, role, t), VarKind::Binary, 0.0, 1.0)
    }

    pub fn get(&self, entity: &str, role: Role, t: usize) -> Result<VarId, FormulationError> {
        self.reg.lookup(entity, role, t)
    }

    pub fn row(&mut self, name: String, expr: LinExpr, sense: Sense, rhs: f64) {
        self.model.add_constraint(name, expr, sense, rhs);
    }

    pub fn finish(self) -> Result<SessionModel, FormulationError> {
        self.model.check()?;
        Ok(SessionModel {
            session: self.session,
            start: self.start,
            model: self.model,
            registry: self.reg,
        })
    }
}

/// A fully assembled session model.
#[derive(Debug, Clone)]
pub struct SessionModel {
    pub session: SessionId,
    pub start: usize,
    pub model: MilpModel,
    pub registry: VariableRegistry,
}

impl SessionModel {
    pub fn value(&self, values: &[f64], key: &VarKey) -> Option<f64> {
        self.registry.find(key).map(|id| values[id.index()])
    }

    pub fn series(&self, values: &[f64], entity: &str, role: Role) -> Vec<(usize, f64)> {
        self.registry
            .iter()
            .filter(|(_, k)| k.role == role && k.entity == entity)
            .filter_map(|(id, k)| k.period.map(|t| (t, values[id.index()])))
            .collect()
    }
}
