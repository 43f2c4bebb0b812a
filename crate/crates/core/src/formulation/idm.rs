use crate::milp::{LinExpr, Sense};
use crate::scenario::{Scenario, SessionId};
use crate::stu::{build_pb_conversion, build_stu_constraints, declare_stu};

use super::dam::{export_ceiling, stu_charge_ceiling};
use super::{
    build_balance_constraints, build_dc_flow_constraints, build_dres_constraints, build_ndres_constraints,
    bus_entity, declare_dres, declare_ndres, declare_network, DresCosts, FormulationError, LedgerState,
    ModelBuilder, Role, SessionModel, VPP_ENTITY,
};

fn selected_power(s: &Scenario, ledger: &LedgerState, demand: &str, t: usize) -> Result<f64, FormulationError> {
    let d = s
        .demand(demand)
        .ok_or_else(|| FormulationError::MissingVariable(demand.to_string()))?;
    let p = ledger.selected_profile(demand)?;
    Ok(d.profiles[p].power[t])
}

/// Cumulative trade `dam + earlier sessions + this session` equals the sum of
/// PCC trades and stays within the export ceiling and the import floor set
/// by the selected profiles at their upper tolerance plus storage charging.
pub fn build_idm_trade_constraints(b: &mut ModelBuilder, ledger: &LedgerState, k: u32) -> Result<(), FormulationError> {
    let s = b.scenario;
    for t in b.periods() {
        let prior = ledger.prior_trade(k, t)?;
        let trade = b.get(VPP_ENTITY, Role::SessionTrade, t)?;
        let mut def = LinExpr::from(trade);
        for &bus in &s.network.main_grid_buses {
            def.add(b.get(&bus_entity(bus), Role::PccTrade, t)?, -1.0);
        }
        b.row(format!("trade_def[{}]", t + 1), def, Sense::Eq, -prior);

        let upper = export_ceiling(s, &b.forecast, t);
        let mut load = 0.0;
        for d in &s.demands {
            load += (1.0 + d.tol_hi[t]) * selected_power(s, ledger, &d.id, t)?;
        }
        let lower = -(load + stu_charge_ceiling(s));
        b.row(format!("trade_upper[{}]", t + 1), trade.into(), Sense::Le, upper - prior);
        b.row(format!("trade_lower[{}]", t + 1), trade.into(), Sense::Ge, lower - prior);
    }
    Ok(())
}

/// Tolerance band around the selected profile, ramp limits (linked to the
/// settled consumption before the window) and minimum daily energy net of
/// what was already consumed.
pub fn build_idm_demand_constraints(b: &mut ModelBuilder, ledger: &LedgerState) -> Result<(), FormulationError> {
    let s = b.scenario;
    let dt = b.dt();
    let start = b.start;
    for d in &s.demands {
        let mut energy = LinExpr::new();
        for t in b.periods() {
            let tag = format!("{},{}", d.id, t + 1);
            let p = b.get(&d.id, Role::DemandPower, t)?;
            let reference = selected_power(s, ledger, &d.id, t)?;
            b.row(format!("demand_band_lo[{tag}]"), p.into(), Sense::Ge, (1.0 - d.tol_lo[t]) * reference);
            b.row(format!("demand_band_hi[{tag}]"), p.into(), Sense::Le, (1.0 + d.tol_hi[t]) * reference);

            let mut step = LinExpr::from(p);
            if t == start {
                if t == 0 {
                    energy.add(p, dt);
                    continue;
                }
                step.add_constant(-ledger.schedule.require(&d.id, Role::DemandPower, t - 1)?);
            } else {
                step.add(b.get(&d.id, Role::DemandPower, t - 1)?, -1.0);
            }
            b.row(format!("demand_ramp_up[{tag}]"), step.clone(), Sense::Le, d.ramp_up * dt);
            b.row(format!("demand_ramp_down[{tag}]"), step, Sense::Ge, -d.ramp_down * dt);
            energy.add(p, dt);
        }
        let mut settled = 0.0;
        for t in 0..start {
            settled += ledger.schedule.require(&d.id, Role::DemandPower, t)? * dt;
        }
        b.row(format!("demand_energy[{}]", d.id), energy, Sense::Ge, d.min_energy - settled);
    }
    Ok(())
}

/// Intraday profit: revenue of this session's trade minus the cost of the
/// DRES output and commitment changes it causes.
pub fn build_idm_objective(b: &mut ModelBuilder, k: u32) -> Result<(), FormulationError> {
    let s = b.scenario;
    let dt = b.dt();
    let mut obj = LinExpr::new();
    for t in b.periods() {
        obj.add(b.get(VPP_ENTITY, Role::SessionTrade, t)?, s.price(SessionId::Idm(k), t) * dt);
        for a in &s.dres {
            obj.add(b.get(&a.id, Role::DresDelta, t)?, -a.variable_cost * dt);
            obj.add(b.get(&a.id, Role::DresStartupCostChange, t)?, -1.0);
            obj.add(b.get(&a.id, Role::DresShutdownCostChange, t)?, -1.0);
        }
    }
    b.model.set_objective(obj);
    Ok(())
}

/// The model of intraday session `k` over its delivery window, with every
/// earlier decision taken from the ledger.
pub fn assemble_idm(s: &Scenario, ledger: &LedgerState, k: u32) -> Result<SessionModel, FormulationError> {
    let session = SessionId::Idm(k);
    let start = s
        .window_start(session)
        .ok_or_else(|| FormulationError::MissingSession(session.to_string()))?;
    let initial = ledger.initial_state(s, start)?;
    let mut b = ModelBuilder::new(s, session, initial)?;
    let prev = &ledger.schedule;

    declare_network(&mut b)?;
    declare_dres(&mut b, DresCosts::ChangeFrom(prev))?;
    declare_ndres(&mut b)?;
    declare_stu(&mut b)?;
    for t in b.periods() {
        for d in &s.demands {
            b.continuous(&d.id, Role::DemandPower, t, 0.0, f64::INFINITY)?;
        }
        b.free(VPP_ENTITY, Role::SessionTrade, t)?;
    }

    build_balance_constraints(&mut b)?;
    build_dc_flow_constraints(&mut b)?;
    build_idm_trade_constraints(&mut b, ledger, k)?;
    build_dres_constraints(&mut b, DresCosts::ChangeFrom(prev))?;
    build_ndres_constraints(&mut b)?;
    build_stu_constraints(&mut b)?;
    build_pb_conversion(&mut b)?;
    build_idm_demand_constraints(&mut b, ledger)?;
    build_idm_objective(&mut b, k)?;
    b.finish()
}

/// Assignment that keeps the previous schedule with no adjustments. It is
/// feasible whenever the session's forecasts still admit that schedule.
pub fn hold_assignment(model: &SessionModel, ledger: &LedgerState) -> Result<Vec<f64>, FormulationError> {
    let mut x = vec![0.0; model.model.num_vars()];
    for (id, key) in model.registry.iter() {
        if key.role.is_adjustment() {
            continue;
        }
        x[id.index()] = ledger
            .schedule
            .get_key(key)
            .ok_or_else(|| FormulationError::MissingLedgerEntry(key.to_string()))?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{assemble_dam, VarKey};
    use crate::milp::{solve, verify, HighsAdapter, SolveOptions, SolveStatus};
    use crate::scenario::fixtures::small;

    fn after_dam(s: &Scenario) -> LedgerState {
        let m = assemble_dam(s).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        let mut ledger = LedgerState::new(s.periods());
        ledger.record(&m, sol.values.as_ref().unwrap(), sol.objective);
        ledger
    }

    fn same_as_dam(mut s: Scenario) -> Scenario {
        for sess in &mut s.calendar.sessions {
            sess.prices = s.calendar.dam_prices[sess.window_start()..].to_vec();
        }
        let dam = s.forecasts.dam.clone();
        for sess in &s.calendar.sessions {
            let start = sess.window_start();
            let w = s.forecasts.idm.get_mut(&sess.k).unwrap();
            for (id, series) in &dam.ndres {
                w.ndres.insert(id.clone(), series[start..].to_vec());
            }
        }
        s
    }

    #[test]
    fn window_covers_periods_from_tau() {
        let s = small();
        let ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 2).unwrap();
        assert_eq!(m.start, 2);
        assert_eq!(m.registry.count_role(|r| r == Role::DresPower), 2);
        assert!(m.registry.find(&VarKey::at("hydro", Role::DresPower, 1)).is_none());
    }

    #[test]
    fn no_adjustment_earns_nothing() {
        let s = small();
        let ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 1).unwrap();
        let x = hold_assignment(&m, &ledger).unwrap();
        assert!(m.model.objective_value(&x).abs() < 1e-9);
    }

    #[test]
    fn extra_sale_priced_at_session_price() {
        let s = small();
        let ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 2).unwrap();
        let mut x = hold_assignment(&m, &ledger).unwrap();
        let trade = m.registry.lookup(VPP_ENTITY, Role::SessionTrade, 2).unwrap();
        x[trade.index()] = 5.0;
        // Session 2 price at period 3 is 58.
        assert!((m.model.objective_value(&x) - 290.0).abs() < 1e-9);
    }

    #[test]
    fn band_bounds_follow_selected_profile() {
        let s = small();
        let ledger = after_dam(&s);
        let p = ledger.selected_profile("load").unwrap();
        let m = assemble_idm(&s, &ledger, 1).unwrap();
        for t in 0..4 {
            let reference = s.demands[0].profiles[p].power[t];
            let lo = m.model.constraints.iter().find(|c| c.name == format!("demand_band_lo[load,{}]", t + 1)).unwrap();
            let hi = m.model.constraints.iter().find(|c| c.name == format!("demand_band_hi[load,{}]", t + 1)).unwrap();
            assert!((lo.rhs - 0.9 * reference).abs() < 1e-12);
            assert!((hi.rhs - 1.1 * reference).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tolerance_pins_demand() {
        let mut s = small();
        s.demands[0].tol_lo = vec![0.0; 4];
        s.demands[0].tol_hi = vec![0.0; 4];
        let ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 1).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        let x = sol.values.unwrap();
        let p = ledger.selected_profile("load").unwrap();
        for t in 0..4 {
            let v = m.value(&x, &VarKey::at("load", Role::DemandPower, t)).unwrap();
            assert!((v - s.demands[0].profiles[p].power[t]).abs() < 1e-6);
        }
    }

    #[test]
    fn min_energy_net_of_settled() {
        let s = small();
        let mut ledger = after_dam(&s);
        for t in 0..2 {
            ledger.schedule.set(VarKey::at("load", Role::DemandPower, t), 15.0);
        }
        let m = assemble_idm(&s, &ledger, 2).unwrap();
        let row = m.model.constraints.iter().find(|c| c.name == "demand_energy[load]").unwrap();
        assert!((row.rhs - 30.0).abs() < 1e-12);
    }

    #[test]
    fn unchanged_market_leaves_no_gain() {
        let s = same_as_dam(small());
        let ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 1).unwrap();
        let hold = hold_assignment(&m, &ledger).unwrap();
        let held = crate::milp::Solution::from_assignment(&m.model, hold);
        assert!(verify(&m.model, &held, 1e-6).is_empty());
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective >= -1e-6);
    }

    #[test]
    fn cumulative_trade_matches_pcc() {
        let s = small();
        let mut ledger = after_dam(&s);
        let m = assemble_idm(&s, &ledger, 1).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        let x = sol.values.unwrap();
        ledger.record(&m, &x, sol.objective);
        for t in 0..4 {
            let pcc = m.value(&x, &VarKey::at("bus1", Role::PccTrade, t)).unwrap();
            assert!((ledger.cumulative_trade(t) - pcc).abs() < 1e-6);
        }
    }

    #[test]
    fn missing_ledger_is_an_error() {
        let s = small();
        let ledger = LedgerState::new(4);
        assert!(matches!(assemble_idm(&s, &ledger, 1), Err(FormulationError::MissingLedgerEntry(_))));
    }
}
