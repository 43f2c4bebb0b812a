use crate::milp::{LinExpr, Sense};
use crate::scenario::{Scenario, SessionId, WindowForecast};
use crate::stu::{build_pb_conversion, build_stu_constraints, declare_stu};

use super::{
    build_balance_constraints, build_dc_flow_constraints, build_dres_constraints, build_ndres_constraints,
    bus_entity, declare_dres, declare_ndres, declare_network, DresCosts, FormulationError, InitialState,
    ModelBuilder, Role, SessionModel, VarKey, VPP_ENTITY,
};

/// Upper bound on total VPP export at `t`: every plant at its ceiling.
pub(crate) fn export_ceiling(s: &Scenario, forecast: &WindowForecast, t: usize) -> f64 {
    s.dres.iter().map(|a| a.p_max).sum::<f64>()
        + s.ndres.iter().map(|a| forecast.ndres(&a.id, t)).sum::<f64>()
        + s.stu.iter().map(|a| a.electrical_max).sum::<f64>()
}

pub(crate) fn stu_charge_ceiling(s: &Scenario) -> f64 {
    s.stu.iter().map(|a| a.charge_max).sum()
}

fn declare_demands(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for d in &s.demands {
        for p in 0..d.profiles.len() {
            b.var(VarKey::new(&d.id, Role::DemandChoice(p as u16), None), crate::milp::VarKind::Binary, 0.0, 1.0)?;
        }
    }
    for t in b.periods() {
        for d in &s.demands {
            b.continuous(&d.id, Role::DemandPower, t, 0.0, f64::INFINITY)?;
        }
    }
    Ok(())
}

/// `p_DA_t = sum of PCC trades`, bounded above by total generation capacity
/// and below, once per profile index, by total profile demand plus storage
/// charging capacity. A demand with fewer profiles contributes its default
/// profile to the rows of indices it lacks.
pub fn build_trade_definition(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    let profile_rows = s.demands.iter().map(|d| d.profiles.len()).max().unwrap_or(0).max(1);
    for t in b.periods() {
        let trade = b.get(VPP_ENTITY, Role::DamTrade, t)?;
        let mut def = LinExpr::from(trade);
        for &bus in &s.network.main_grid_buses {
            def.add(b.get(&bus_entity(bus), Role::PccTrade, t)?, -1.0);
        }
        b.row(format!("trade_def[{}]", t + 1), def, Sense::Eq, 0.0);

        let upper = export_ceiling(s, &b.forecast, t);
        b.row(format!("trade_upper[{}]", t + 1), trade.into(), Sense::Le, upper);
        for q in 0..profile_rows {
            let load: f64 = s
                .demands
                .iter()
                .map(|d| {
                    d.profiles
                        .get(q)
                        .or_else(|| d.default_profile().map(|(_, p)| p))
                        .map_or(0.0, |p| p.power[t])
                })
                .sum();
            let lower = -(load + stu_charge_ceiling(s));
            b.row(format!("trade_lower[p{},{}]", q + 1, t + 1), trade.into(), Sense::Ge, lower);
        }
    }
    Ok(())
}

/// Each demand follows exactly one of its profiles.
pub fn build_demand_profile_constraints(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for d in &s.demands {
        let choices = (0..d.profiles.len())
            .map(|p| b.reg.get(&VarKey::new(&d.id, Role::DemandChoice(p as u16), None)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut one = LinExpr::new();
        for &u in &choices {
            one.add(u, 1.0);
        }
        b.row(format!("demand_one[{}]", d.id), one, Sense::Eq, 1.0);
        for t in b.periods() {
            let mut follow = LinExpr::from(b.get(&d.id, Role::DemandPower, t)?);
            for (p, &u) in choices.iter().enumerate() {
                follow.add(u, -d.profiles[p].power[t]);
            }
            b.row(format!("demand_profile[{},{}]", d.id, t + 1), follow, Sense::Eq, 0.0);
        }
    }
    Ok(())
}

/// Day-ahead profit: trade revenue minus DRES energy and start/stop costs
/// minus the cost of the chosen demand profiles.
pub fn build_dam_objective(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    let dt = b.dt();
    let mut obj = LinExpr::new();
    for t in b.periods() {
        obj.add(b.get(VPP_ENTITY, Role::DamTrade, t)?, s.price(SessionId::Dam, t) * dt);
        for a in &s.dres {
            obj.add(b.get(&a.id, Role::DresPower, t)?, -a.variable_cost * dt);
            obj.add(b.get(&a.id, Role::DresStartupCost, t)?, -1.0);
            obj.add(b.get(&a.id, Role::DresShutdownCost, t)?, -1.0);
        }
    }
    for d in &s.demands {
        for (p, profile) in d.profiles.iter().enumerate() {
            let u = b.reg.get(&VarKey::new(&d.id, Role::DemandChoice(p as u16), None))?;
            obj.add(u, -profile.cost);
        }
    }
    b.model.set_objective(obj);
    Ok(())
}

/// The complete day-ahead model over the whole horizon.
pub fn assemble_dam(s: &Scenario) -> Result<SessionModel, FormulationError> {
    let mut b = ModelBuilder::new(s, SessionId::Dam, InitialState::from_scenario(s))?;
    declare_network(&mut b)?;
    declare_dres(&mut b, DresCosts::Absolute)?;
    declare_ndres(&mut b)?;
    declare_stu(&mut b)?;
    declare_demands(&mut b)?;
    for t in b.periods() {
        b.free(VPP_ENTITY, Role::DamTrade, t)?;
    }

    build_balance_constraints(&mut b)?;
    build_dc_flow_constraints(&mut b)?;
    build_trade_definition(&mut b)?;
    build_dres_constraints(&mut b, DresCosts::Absolute)?;
    build_ndres_constraints(&mut b)?;
    build_stu_constraints(&mut b)?;
    build_pb_conversion(&mut b)?;
    build_demand_profile_constraints(&mut b)?;
    build_dam_objective(&mut b)?;
    b.finish()
}
