use crate::milp::{LinExpr, Sense};

use super::{FormulationError, ModelBuilder, Role, Schedule};

/// How DRES start/stop costs and output changes are carried.
#[derive(Debug, Clone, Copy)]
pub enum DresCosts<'a> {
    /// Day-ahead: carriers equal the full start/stop cost.
    Absolute,
    /// Intraday: carriers and output deltas are taken against the previous
    /// session's schedule, so an unchanged schedule costs nothing.
    ChangeFrom(&'a Schedule),
}

pub fn declare_dres(b: &mut ModelBuilder, costs: DresCosts) -> Result<(), FormulationError> {
    let s = b.scenario;
    for t in b.periods() {
        for a in &s.dres {
            b.continuous(&a.id, Role::DresPower, t, 0.0, f64::INFINITY)?;
            b.binary(&a.id, Role::DresOn, t)?;
            b.binary(&a.id, Role::DresStartup, t)?;
            b.binary(&a.id, Role::DresShutdown, t)?;
            match costs {
                DresCosts::Absolute => {
                    b.continuous(&a.id, Role::DresStartupCost, t, 0.0, f64::INFINITY)?;
                    b.continuous(&a.id, Role::DresShutdownCost, t, 0.0, f64::INFINITY)?;
                }
                DresCosts::ChangeFrom(_) => {
                    b.free(&a.id, Role::DresDelta, t)?;
                    b.free(&a.id, Role::DresStartupCostChange, t)?;
                    b.free(&a.id, Role::DresShutdownCostChange, t)?;
                }
            }
        }
    }
    Ok(())
}

/// Unit commitment rows for dispatchable plants:
/// `pMin u <= p <= pMax u`, `v - w = u_t - u_{t-1}`, `v + w <= 1`, and the
/// start/stop cost carriers.
pub fn build_dres_constraints(b: &mut ModelBuilder, costs: DresCosts) -> Result<(), FormulationError> {
    let s = b.scenario;
    let start = b.start;
    for a in &s.dres {
        let initially_on = *b
            .initial
            .dres_on
            .get(&a.id)
            .ok_or_else(|| FormulationError::MissingLedgerEntry(format!("commitment of {} before the window", a.id)))?;
        for t in b.periods() {
            let tag = format!("{},{}", a.id, t + 1);
            let p = b.get(&a.id, Role::DresPower, t)?;
            let u = b.get(&a.id, Role::DresOn, t)?;
            let v = b.get(&a.id, Role::DresStartup, t)?;
            let w = b.get(&a.id, Role::DresShutdown, t)?;
            b.row(format!("dres_min[{tag}]"), LinExpr::from(p).term(u, -a.p_min), Sense::Ge, 0.0);
            b.row(format!("dres_max[{tag}]"), LinExpr::from(p).term(u, -a.p_max), Sense::Le, 0.0);

            let mut transition = LinExpr::from(v).term(w, -1.0).term(u, -1.0);
            if t == start {
                transition.add_constant(if initially_on { 1.0 } else { 0.0 });
            } else {
                transition.add(b.get(&a.id, Role::DresOn, t - 1)?, 1.0);
            }
            b.row(format!("dres_transition[{tag}]"), transition, Sense::Eq, 0.0);
            b.row(format!("dres_onoff[{tag}]"), LinExpr::from(v).term(w, 1.0), Sense::Le, 1.0);

            match costs {
                DresCosts::Absolute => {
                    let c1 = b.get(&a.id, Role::DresStartupCost, t)?;
                    let c0 = b.get(&a.id, Role::DresShutdownCost, t)?;
                    b.row(format!("dres_startup_cost[{tag}]"), LinExpr::from(c1).term(v, -a.startup_cost), Sense::Eq, 0.0);
                    b.row(format!("dres_shutdown_cost[{tag}]"), LinExpr::from(c0).term(w, -a.shutdown_cost), Sense::Eq, 0.0);
                }
                DresCosts::ChangeFrom(prev) => {
                    let prev_p = prev.require(&a.id, Role::DresPower, t)?;
                    let prev_v = prev.require(&a.id, Role::DresStartup, t)?;
                    let prev_w = prev.require(&a.id, Role::DresShutdown, t)?;
                    let dp = b.get(&a.id, Role::DresDelta, t)?;
                    let c1 = b.get(&a.id, Role::DresStartupCostChange, t)?;
                    let c0 = b.get(&a.id, Role::DresShutdownCostChange, t)?;
                    b.row(format!("dres_delta[{tag}]"), LinExpr::from(dp).term(p, -1.0), Sense::Eq, -prev_p);
                    b.row(
                        format!("dres_startup_cost_change[{tag}]"),
                        LinExpr::from(c1).term(v, -a.startup_cost),
                        Sense::Eq,
                        -a.startup_cost * prev_v,
                    );
                    b.row(
                        format!("dres_shutdown_cost_change[{tag}]"),
                        LinExpr::from(c0).term(w, -a.shutdown_cost),
                        Sense::Eq,
                        -a.shutdown_cost * prev_w,
                    );
                }
            }
        }
    }
    Ok(())
}

pub fn declare_ndres(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for t in b.periods() {
        for a in &s.ndres {
            b.continuous(&a.id, Role::NdresPower, t, 0.0, f64::INFINITY)?;
        }
    }
    Ok(())
}

/// `pMin_t <= p_t <= forecast_t` for every non-dispatchable plant.
pub fn build_ndres_constraints(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for a in &s.ndres {
        for t in b.periods() {
            let p = b.get(&a.id, Role::NdresPower, t)?;
            let avail = b.forecast.ndres(&a.id, t);
            b.row(format!("ndres_min[{},{}]", a.id, t + 1), p.into(), Sense::Ge, a.p_min_series[t]);
            b.row(format!("ndres_avail[{},{}]", a.id, t + 1), p.into(), Sense::Le, avail);
        }
    }
    Ok(())
}
