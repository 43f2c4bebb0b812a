use std::collections::BTreeMap;

use crate::scenario::{Scenario, SessionId};

use super::{FormulationError, InitialState, Role, SessionModel, VarKey, VPP_ENTITY};

/// Latest physical schedule of every asset and network quantity, keyed like
/// the model variables. Session adjustment variables are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedule {
    values: BTreeMap<VarKey, f64>,
}

impl Schedule {
    pub fn get(&self, entity: &str, role: Role, t: usize) -> Option<f64> {
        self.values.get(&VarKey::at(entity, role, t)).copied()
    }

    pub fn get_key(&self, key: &VarKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn require(&self, entity: &str, role: Role, t: usize) -> Result<f64, FormulationError> {
        self.get(entity, role, t)
            .ok_or_else(|| FormulationError::MissingLedgerEntry(VarKey::at(entity, role, t).to_string()))
    }

    /// Full-horizon series; periods never scheduled read as 0.
    pub fn series(&self, entity: &str, role: Role, periods: usize) -> Vec<f64> {
        (0..periods)
            .map(|t| self.get(entity, role, t).unwrap_or(0.0))
            .collect()
    }

    pub fn set(&mut self, key: VarKey, value: f64) {
        self.values.insert(key, value);
    }

    /// Overwrites entries with the solved values of a session window.
    pub fn merge(&mut self, model: &SessionModel, values: &[f64]) {
        for (id, key) in model.registry.iter() {
            if !key.role.is_adjustment() {
                self.values.insert(key.clone(), values[id.index()]);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, &f64)> {
        self.values.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fixed outcomes of the sessions solved so far.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerState {
    pub periods: usize,
    /// Day-ahead trade per period, once the DAM has been solved.
    pub dam_trade: Option<Vec<f64>>,
    /// Intraday trade per session over the full horizon (0 outside the window).
    pub idm_trades: BTreeMap<u32, Vec<f64>>,
    /// Profile index chosen per demand in the day-ahead session.
    pub selected_profiles: BTreeMap<String, usize>,
    pub schedule: Schedule,
    /// Solver objective per completed session, in solve order.
    pub objectives: Vec<(SessionId, f64)>,
}

impl LedgerState {
    pub fn new(periods: usize) -> Self {
        Self {
            periods,
            dam_trade: None,
            idm_trades: BTreeMap::new(),
            selected_profiles: BTreeMap::new(),
            schedule: Schedule::default(),
            objectives: Vec::new(),
        }
    }

    /// Day-ahead trade plus every intraday session before `k`.
    pub fn prior_trade(&self, k: u32, t: usize) -> Result<f64, FormulationError> {
        let dam = self
            .dam_trade
            .as_ref()
            .ok_or_else(|| FormulationError::MissingLedgerEntry("day-ahead trade".into()))?;
        let idm: f64 = self.idm_trades.range(..k).map(|(_, v)| v[t]).sum();
        Ok(dam[t] + idm)
    }

    /// Day-ahead trade plus every recorded intraday session.
    pub fn cumulative_trade(&self, t: usize) -> f64 {
        self.dam_trade.as_ref().map_or(0.0, |d| d[t]) + self.idm_trades.values().map(|v| v[t]).sum::<f64>()
    }

    pub fn selected_profile(&self, demand: &str) -> Result<usize, FormulationError> {
        self.selected_profiles
            .get(demand)
            .copied()
            .ok_or_else(|| FormulationError::MissingLedgerEntry(format!("selected profile of {demand}")))
    }

    /// Commitments and storage levels at the period before `start`.
    pub fn initial_state(&self, s: &Scenario, start: usize) -> Result<InitialState, FormulationError> {
        if start == 0 {
            return Ok(InitialState::from_scenario(s));
        }
        let t = start - 1;
        let mut init = InitialState::default();
        for a in &s.dres {
            let on = self.schedule.require(&a.id, Role::DresOn, t)?;
            init.dres_on.insert(a.id.clone(), on > 0.5);
        }
        for a in &s.stu {
            init.stu_energy
                .insert(a.id.clone(), self.schedule.require(&a.id, Role::StuEnergy, t)?);
            let on = self.schedule.require(&a.id, Role::StuPbOn, t)?;
            init.stu_pb_on.insert(a.id.clone(), on > 0.5);
        }
        Ok(init)
    }

    /// Records a solved session: trades, profile choices and the schedule
    /// for its window.
    pub fn record(&mut self, model: &SessionModel, values: &[f64], objective: f64) {
        match model.session {
            SessionId::Dam => {
                let mut trade = vec![0.0; self.periods];
                for (t, v) in model.series(values, VPP_ENTITY, Role::DamTrade) {
                    trade[t] = v;
                }
                self.dam_trade = Some(trade);
                self.selected_profiles.clear();
                for (id, key) in model.registry.iter() {
                    if let Role::DemandChoice(p) = key.role {
                        if values[id.index()] > 0.5 {
                            self.selected_profiles.insert(key.entity.clone(), p as usize);
                        }
                    }
                }
            }
            SessionId::Idm(k) => {
                let mut trade = vec![0.0; self.periods];
                for (t, v) in model.series(values, VPP_ENTITY, Role::SessionTrade) {
                    trade[t] = v;
                }
                self.idm_trades.insert(k, trade);
            }
        }
        self.schedule.merge(model, values);
        self.objectives.push((model.session, objective));
    }
}
