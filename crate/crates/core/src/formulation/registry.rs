use std::collections::HashMap;
use std::fmt;

use crate::milp::{MilpModel, VarId, VarKind};

use super::FormulationError;

/// What a decision variable represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    LineFlow,
    BusAngle,
    /// Exchange with the main grid at a PCC bus.
    PccTrade,
    /// Total day-ahead trade.
    DamTrade,
    /// Intraday session trade (adjustment on top of earlier sessions).
    SessionTrade,
    DresPower,
    DresOn,
    DresStartup,
    DresShutdown,
    DresStartupCost,
    DresShutdownCost,
    DresDelta,
    DresStartupCostChange,
    DresShutdownCostChange,
    NdresPower,
    StuSolarField,
    StuCharge,
    StuDischarge,
    StuChargeMode,
    StuEnergy,
    StuPbInput,
    StuPbOn,
    StuPbStartup,
    StuPower,
    StuWeight(u8),
    DemandPower,
    DemandChoice(u16),
}

impl Role {
    /// Session-local adjustment quantities. They are zero when a session keeps
    /// the previous schedule and are never carried between sessions.
    pub fn is_adjustment(self) -> bool {
        matches!(
            self,
            Role::SessionTrade | Role::DresDelta | Role::DresStartupCostChange | Role::DresShutdownCostChange
        )
    }

    fn label(self) -> String {
        match self {
            Role::StuWeight(i) => format!("stu_w{i}"),
            Role::DemandChoice(p) => format!("demand_choice{p}"),
            other => {
                let dbg = format!("{other:?}");
                let mut out = String::new();
                for (i, ch) in dbg.chars().enumerate() {
                    if ch.is_ascii_uppercase() && i > 0 {
                        out.push('_');
                    }
                    out.push(ch.to_ascii_lowercase());
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub entity: String,
    pub role: Role,
    /// 0-based absolute period.
    pub period: Option<usize>,
}

impl VarKey {
    pub fn new(entity: impl Into<String>, role: Role, period: Option<usize>) -> Self {
        Self {
            entity: entity.into(),
            role,
            period,
        }
    }

    pub fn at(entity: impl Into<String>, role: Role, period: usize) -> Self {
        Self::new(entity, role, Some(period))
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.period {
            Some(t) => write!(f, "{}[{},{}]", self.role.label(), self.entity, t + 1),
            None => write!(f, "{}[{}]", self.role.label(), self.entity),
        }
    }
}

/// Bijection between variable keys and model variables.
#[derive(Debug, Clone, Default)]
pub struct VariableRegistry {
    keys: Vec<VarKey>,
    ids: HashMap<VarKey, VarId>,
}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(
        &mut self,
        model: &mut MilpModel,
        key: VarKey,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, FormulationError> {
        if self.ids.contains_key(&key) {
            return Err(FormulationError::DuplicateVariable(key.to_string()));
        }
        let id = model.add_var(key.to_string(), kind, lower, upper);
        debug_assert_eq!(id.index(), self.keys.len());
        self.keys.push(key.clone());
        self.ids.insert(key, id);
        Ok(id)
    }

    pub fn get(&self, key: &VarKey) -> Result<VarId, FormulationError> {
        self.ids
            .get(key)
            .copied()
            .ok_or_else(|| FormulationError::MissingVariable(key.to_string()))
    }

    pub fn lookup(&self, entity: &str, role: Role, period: usize) -> Result<VarId, FormulationError> {
        self.get(&VarKey::at(entity, role, period))
    }

    pub fn find(&self, key: &VarKey) -> Option<VarId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: VarId) -> &VarKey {
        &self.keys[id.index()]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarKey)> {
        self.keys.iter().enumerate().map(|(i, k)| (VarId(i), k))
    }

    pub fn count_role(&self, pred: impl Fn(Role) -> bool) -> usize {
        self.keys.iter().filter(|k| pred(k.role)).count()
    }
}
