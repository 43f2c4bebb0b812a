use crate::milp::{LinExpr, Sense, VarKind};

use super::{bus_entity, FormulationError, ModelBuilder, Role, VarKey};

/// Declares line flows, bus angles and PCC trades over the window. The
/// angle of the lowest-id PCC bus is fixed to zero.
pub fn declare_network(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let net = &b.scenario.network;
    let reference = net.reference_bus().ok_or(FormulationError::NoReferenceBus)?;
    for t in b.periods() {
        for line in &net.lines {
            b.free(&line.id, Role::LineFlow, t)?;
        }
        for &bus in &net.buses {
            let entity = bus_entity(bus);
            if bus == reference {
                b.var(VarKey::at(&entity, Role::BusAngle, t), VarKind::Continuous, 0.0, 0.0)?;
            } else {
                b.free(&entity, Role::BusAngle, t)?;
            }
        }
        for &bus in &net.main_grid_buses {
            b.free(&bus_entity(bus), Role::PccTrade, t)?;
        }
    }
    Ok(())
}

/// Nodal power balance at every bus plus the PCC trade bounds.
///
/// Generation (DRES, NDRES, STU electrical output) minus flows leaving the
/// bus plus flows entering it equals local demand, plus the main-grid
/// exchange at PCC buses. `-cap <= p_m <= cap` at each PCC.
pub fn build_balance_constraints(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    let net = &s.network;
    for t in b.periods() {
        for &bus in &net.buses {
            let mut expr = LinExpr::new();
            for a in s.dres.iter().filter(|a| a.bus == bus) {
                expr.add(b.get(&a.id, Role::DresPower, t)?, 1.0);
            }
            for a in s.ndres.iter().filter(|a| a.bus == bus) {
                expr.add(b.get(&a.id, Role::NdresPower, t)?, 1.0);
            }
            for a in s.stu.iter().filter(|a| a.bus == bus) {
                expr.add(b.get(&a.id, Role::StuPower, t)?, 1.0);
            }
            for line in &net.lines {
                if line.from == bus {
                    expr.add(b.get(&line.id, Role::LineFlow, t)?, -1.0);
                }
                if line.to == bus {
                    expr.add(b.get(&line.id, Role::LineFlow, t)?, 1.0);
                }
            }
            if net.is_main_grid(bus) {
                expr.add(b.get(&bus_entity(bus), Role::PccTrade, t)?, -1.0);
            }
            for d in s.demands.iter().filter(|d| d.bus == bus) {
                expr.add(b.get(&d.id, Role::DemandPower, t)?, -1.0);
            }
            b.row(format!("balance[bus{bus},{}]", t + 1), expr, Sense::Eq, 0.0);
        }
        for &bus in &net.main_grid_buses {
            let cap = net.trade_cap.get(&bus).copied().unwrap_or(0.0);
            let trade = b.get(&bus_entity(bus), Role::PccTrade, t)?;
            b.row(format!("trade_max[bus{bus},{}]", t + 1), trade.into(), Sense::Le, cap);
            b.row(format!("trade_min[bus{bus},{}]", t + 1), trade.into(), Sense::Ge, -cap);
        }
    }
    Ok(())
}

/// DC power flow: `flow = susceptance * (angle_from - angle_to)` and
/// `|flow| <= limit` on every line.
pub fn build_dc_flow_constraints(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let net = &b.scenario.network;
    for t in b.periods() {
        for line in &net.lines {
            let flow = b.get(&line.id, Role::LineFlow, t)?;
            let from = b.get(&bus_entity(line.from), Role::BusAngle, t)?;
            let to = b.get(&bus_entity(line.to), Role::BusAngle, t)?;
            let def = LinExpr::from(flow)
                .term(from, -line.susceptance)
                .term(to, line.susceptance);
            b.row(format!("dcflow[{},{}]", line.id, t + 1), def, Sense::Eq, 0.0);
            b.row(format!("flow_max[{},{}]", line.id, t + 1), flow.into(), Sense::Le, line.flow_limit);
            b.row(format!("flow_min[{},{}]", line.id, t + 1), flow.into(), Sense::Ge, -line.flow_limit);
        }
    }
    Ok(())
}
