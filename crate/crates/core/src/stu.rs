//! Solar thermal unit: solar field, two-way thermal storage and a power
//! block whose thermal-to-electric conversion improves with load.
//!
//! The conversion curve is the continuous interpolant through five points
//! `0, pbMin, break1, break2, pbMax`; the value at each breakpoint is the
//! breakpoint times the efficiency of the segment ending there. In the MILP
//! the curve is encoded with an SOS-2 weight vector whose sum equals the
//! power-block commitment, so an idle block produces nothing.

use thiserror::Error;

use crate::formulation::{FormulationError, ModelBuilder, Role};
use crate::milp::{LinExpr, Sense};
use crate::scenario::StuAsset;

pub const CURVE_POINTS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum StuError {
    #[error("thermal input {input} MW-th outside [0, {max}]")]
    OutOfRange { input: f64, max: f64 },
}

/// Piecewise-linear power-block map from thermal input [MW-th] to electrical
/// output [MW].
#[derive(Debug, Clone, PartialEq)]
pub struct PbCurve {
    pub breakpoints: [f64; CURVE_POINTS],
    pub values: [f64; CURVE_POINTS],
}

impl PbCurve {
    pub fn new(pb_min: f64, break1: f64, break2: f64, pb_max: f64, eta: [f64; 4]) -> Self {
        let breakpoints = [0.0, pb_min, break1, break2, pb_max];
        let mut values = [0.0; CURVE_POINTS];
        for i in 1..CURVE_POINTS {
            values[i] = eta[i - 1] * breakpoints[i];
        }
        Self { breakpoints, values }
    }

    pub fn from_asset(a: &StuAsset) -> Self {
        Self::new(a.pb_min, a.pb_break1, a.pb_break2, a.pb_max, a.efficiencies())
    }

    pub fn max_input(&self) -> f64 {
        self.breakpoints[CURVE_POINTS - 1]
    }
}

/// Electrical output for a thermal input by linear interpolation on the
/// curve's breakpoint table.
pub fn eval_pb_oracle(curve: &PbCurve, thermal_input: f64) -> Result<f64, StuError> {
    let max = curve.max_input();
    if !(0.0..=max).contains(&thermal_input) {
        return Err(StuError::OutOfRange {
            input: thermal_input,
            max,
        });
    }
    let b = &curve.breakpoints;
    let v = &curve.values;
    for i in 1..CURVE_POINTS {
        if thermal_input <= b[i] {
            let width = b[i] - b[i - 1];
            if width <= 0.0 {
                return Ok(v[i]);
            }
            let frac = (thermal_input - b[i - 1]) / width;
            return Ok(v[i - 1] + frac * (v[i] - v[i - 1]));
        }
    }
    Ok(v[CURVE_POINTS - 1])
}

pub fn declare_stu(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for t in b.periods() {
        for a in &s.stu {
            let id = a.id.as_str();
            b.continuous(id, Role::StuSolarField, t, 0.0, f64::INFINITY)?;
            b.continuous(id, Role::StuCharge, t, 0.0, f64::INFINITY)?;
            b.continuous(id, Role::StuDischarge, t, 0.0, f64::INFINITY)?;
            b.binary(id, Role::StuChargeMode, t)?;
            b.free(id, Role::StuEnergy, t)?;
            b.continuous(id, Role::StuPbInput, t, 0.0, f64::INFINITY)?;
            b.binary(id, Role::StuPbOn, t)?;
            b.binary(id, Role::StuPbStartup, t)?;
            b.continuous(id, Role::StuPower, t, 0.0, f64::INFINITY)?;
            for i in 0..CURVE_POINTS as u8 {
                b.continuous(id, Role::StuWeight(i), t, 0.0, 1.0)?;
            }
        }
    }
    Ok(())
}

/// Solar field, storage and power-block rows for every STU over the window.
pub fn build_stu_constraints(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    let dt = b.dt();
    let start = b.start;
    let last = s.periods() - 1;
    for a in &s.stu {
        let id = a.id.as_str();
        let e_before = *b
            .initial
            .stu_energy
            .get(id)
            .ok_or_else(|| FormulationError::MissingLedgerEntry(format!("storage level of {id} before the window")))?;
        let on_before = *b
            .initial
            .stu_pb_on
            .get(id)
            .ok_or_else(|| FormulationError::MissingLedgerEntry(format!("power block status of {id} before the window")))?;
        for t in b.periods() {
            let tag = format!("{id},{}", t + 1);
            let avail = b.forecast.solar_field(id, t);
            let psf = b.get(id, Role::StuSolarField, t)?;
            let pch = b.get(id, Role::StuCharge, t)?;
            let pdis = b.get(id, Role::StuDischarge, t)?;
            let uch = b.get(id, Role::StuChargeMode, t)?;
            let e = b.get(id, Role::StuEnergy, t)?;
            let ppb = b.get(id, Role::StuPbInput, t)?;
            let u = b.get(id, Role::StuPbOn, t)?;
            let v1 = b.get(id, Role::StuPbStartup, t)?;
            let p = b.get(id, Role::StuPower, t)?;

            b.row(format!("stu_sf_avail[{tag}]"), psf.into(), Sense::Le, avail);

            // Charging only from the solar field, mutually exclusive with discharge.
            b.row(format!("stu_charge_min[{tag}]"), LinExpr::from(pch).term(uch, -a.charge_min), Sense::Ge, 0.0);
            b.row(format!("stu_charge_avail[{tag}]"), LinExpr::from(pch).term(uch, -avail), Sense::Le, 0.0);
            b.row(format!("stu_charge_max[{tag}]"), LinExpr::from(pch).term(uch, -a.charge_max), Sense::Le, 0.0);
            b.row(
                format!("stu_discharge_min[{tag}]"),
                LinExpr::from(pdis).term(uch, a.discharge_min),
                Sense::Ge,
                a.discharge_min,
            );
            b.row(
                format!("stu_discharge_max[{tag}]"),
                LinExpr::from(pdis).term(uch, a.discharge_max),
                Sense::Le,
                a.discharge_max,
            );

            // Power-block input net of storage and startup losses.
            let pb_def = LinExpr::from(ppb)
                .term(psf, -1.0)
                .term(pdis, -1.0)
                .term(pch, 1.0)
                .term(v1, a.startup_loss_factor * a.pb_max);
            b.row(format!("stu_pb_input[{tag}]"), pb_def, Sense::Eq, 0.0);
            b.row(format!("stu_pb_min[{tag}]"), LinExpr::from(ppb).term(u, -a.pb_min), Sense::Ge, 0.0);
            b.row(format!("stu_pb_max[{tag}]"), LinExpr::from(ppb).term(u, -a.pb_max), Sense::Le, 0.0);
            b.row(format!("stu_p_min[{tag}]"), LinExpr::from(p).term(u, -a.electrical_min), Sense::Ge, 0.0);
            b.row(format!("stu_p_max[{tag}]"), LinExpr::from(p).term(u, -a.electrical_max), Sense::Le, 0.0);

            // Storage balance.
            let mut energy = LinExpr::from(e)
                .term(pch, -a.charge_eff * dt)
                .term(pdis, dt / a.discharge_eff);
            if t == start {
                energy.add_constant(-e_before);
            } else {
                energy.add(b.get(id, Role::StuEnergy, t - 1)?, -1.0);
            }
            b.row(format!("stu_energy[{tag}]"), energy, Sense::Eq, 0.0);
            b.row(format!("stu_energy_min[{tag}]"), e.into(), Sense::Ge, a.storage_floor[t]);
            b.row(format!("stu_energy_max[{tag}]"), e.into(), Sense::Le, a.storage_cap[t]);
            if t == last {
                b.row(format!("stu_end_min[{tag}]"), e.into(), Sense::Ge, a.end_alpha_lo * a.storage_cap[t]);
                b.row(format!("stu_end_max[{tag}]"), e.into(), Sense::Le, a.end_alpha_hi * a.storage_cap[t]);
            }

            // Power-block startup indicator.
            let (prev_on, prev_const) = if t == start {
                (None, if on_before { 1.0 } else { 0.0 })
            } else {
                (Some(b.get(id, Role::StuPbOn, t - 1)?), 0.0)
            };
            let mut rise = LinExpr::from(v1).term(u, -1.0).constant(prev_const);
            let mut was_off = LinExpr::from(v1).constant(prev_const);
            if let Some(prev) = prev_on {
                rise.add(prev, 1.0);
                was_off.add(prev, 1.0);
            }
            b.row(format!("stu_startup_rise[{tag}]"), rise, Sense::Ge, 0.0);
            b.row(format!("stu_startup_on[{tag}]"), LinExpr::from(v1).term(u, -1.0), Sense::Le, 0.0);
            b.row(format!("stu_startup_was_off[{tag}]"), was_off, Sense::Le, 1.0);
        }
    }
    Ok(())
}

/// Thermal-to-electric conversion through SOS-2 weights on the curve
/// breakpoints; the weights sum to the power-block commitment.
pub fn build_pb_conversion(b: &mut ModelBuilder) -> Result<(), FormulationError> {
    let s = b.scenario;
    for a in &s.stu {
        let id = a.id.as_str();
        let curve = PbCurve::from_asset(a);
        for t in b.periods() {
            let tag = format!("{id},{}", t + 1);
            let u = b.get(id, Role::StuPbOn, t)?;
            let ppb = b.get(id, Role::StuPbInput, t)?;
            let p = b.get(id, Role::StuPower, t)?;
            let weights = (0..CURVE_POINTS as u8)
                .map(|i| b.get(id, Role::StuWeight(i), t))
                .collect::<Result<Vec<_>, _>>()?;

            let mut sum = LinExpr::from(u).constant(0.0);
            sum.terms[0].1 = -1.0;
            let mut input = LinExpr::from(ppb);
            let mut output = LinExpr::from(p);
            for (i, &w) in weights.iter().enumerate() {
                sum.add(w, 1.0);
                input.add(w, -curve.breakpoints[i]);
                output.add(w, -curve.values[i]);
            }
            b.row(format!("stu_weights[{tag}]"), sum, Sense::Eq, 0.0);
            b.row(format!("stu_pb_interp[{tag}]"), input, Sense::Eq, 0.0);
            b.row(format!("stu_power_interp[{tag}]"), output, Sense::Eq, 0.0);
            b.model.add_sos2(format!("stu_curve[{tag}]"), weights);
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::formulation::{assemble_dam, InitialState, VarKey};
    use crate::milp::{solve, verify, HighsAdapter, SolveOptions};
    use crate::scenario::{validate_scenario, SessionId};

    fn curve() -> PbCurve {
        PbCurve::from_asset(&stu_asset(1))
    }

    #[test]
    fn curve_values_at_breakpoints() {
        let c = curve();
        assert_eq!(c.breakpoints, [0.0, 30.0, 60.0, 95.0, 130.0]);
        assert_eq!(eval_pb_oracle(&c, 0.0).unwrap(), 0.0);
        assert!((eval_pb_oracle(&c, 60.0).unwrap() - 0.33 * 60.0).abs() < 1e-12);
        assert!((eval_pb_oracle(&c, 130.0).unwrap() - 50.0).abs() < 1e-12);
        assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn oracle_interpolates_segment_midpoint() {
        let c = curve();
        // Segment 3 spans 60..95: values 19.8 and 34.2.
        let mid = eval_pb_oracle(&c, 77.5).unwrap();
        assert!((mid - (19.8 + 34.2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_out_of_range() {
        assert!(matches!(eval_pb_oracle(&curve(), 131.0), Err(StuError::OutOfRange { .. })));
        assert!(eval_pb_oracle(&curve(), -0.1).is_err());
    }

    #[test]
    fn efficiency_rises_with_load() {
        let c = curve();
        let eff: Vec<f64> = (1..CURVE_POINTS).map(|i| c.values[i] / c.breakpoints[i]).collect();
        assert!(eff.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn storage_balance_row() {
        let mut s = stu_only(vec![40.0], vec![50.0]);
        s.stu[0].charge_eff = 0.9;
        let m = assemble_dam(&s).unwrap();
        let row = m
            .model
            .constraints
            .iter()
            .find(|c| c.name == "stu_energy[csp,1]")
            .unwrap();
        let mut x = vec![0.0; m.model.num_vars()];
        let set = |x: &mut Vec<f64>, role, v| {
            let id = m.registry.get(&VarKey::at("csp", role, 0)).unwrap();
            x[id.index()] = v;
        };
        set(&mut x, Role::StuCharge, 10.0);
        set(&mut x, Role::StuEnergy, 109.0);
        assert!(row.violation(&x) < 1e-12);
        set(&mut x, Role::StuEnergy, 110.0);
        assert!((row.violation(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_sun_no_storage_keeps_block_off() {
        let mut s = stu_only(vec![80.0; 4], vec![0.0; 4]);
        s.stu[0].initial_energy = 0.0;
        assert!(validate_scenario(&s).is_empty());
        let m = assemble_dam(&s).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        let x = sol.values.as_ref().unwrap();
        for t in 0..4 {
            assert_eq!(m.value(x, &VarKey::at("csp", Role::StuPbInput, t)), Some(0.0));
            assert_eq!(m.value(x, &VarKey::at("csp", Role::StuPbOn, t)), Some(0.0));
        }
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn startup_loss_charged_on_rising_edge() {
        // Enough sun for the block from period 2; prices make running worthwhile.
        let s = stu_only(vec![10.0, 90.0, 90.0], vec![0.0, 140.0, 140.0]);
        let m = assemble_dam(&s).unwrap();
        let sol = solve(&HighsAdapter::new(), &m.model, &SolveOptions::default());
        assert!(verify(&m.model, &sol, 1e-6).is_empty());
        let x = sol.values.as_ref().unwrap();
        let get = |role, t| m.value(x, &VarKey::at("csp", role, t)).unwrap();
        let a = &s.stu[0];
        for t in 0..3 {
            let gross = get(Role::StuSolarField, t) + get(Role::StuDischarge, t) - get(Role::StuCharge, t);
            let loss = gross - get(Role::StuPbInput, t);
            let rising = get(Role::StuPbOn, t) > 0.5 && (t == 0 || get(Role::StuPbOn, t - 1) < 0.5);
            let expected = if rising { a.startup_loss_factor * a.pb_max } else { 0.0 };
            assert!((loss - expected).abs() < 1e-6, "period {t}: loss {loss}");
        }
        assert!(get(Role::StuPbOn, 1) > 0.5);
        let _ = InitialState::default();
        let _ = SessionId::Dam;
    }
}
