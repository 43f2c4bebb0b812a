//! Independent oracles shared by the integration tests. Nothing here calls
//! the formulation code; results are derived from the scenario data alone.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpp_core::milp::{LinExpr, MilpModel, Sense};
use vpp_core::scenario::{
    DemandAsset, DresAsset, ForecastSet, ForecastWindow, MarketCalendar, Network, Profile, Scenario,
};
use vpp_core::stu::{PbCurve, CURVE_POINTS};

pub const TOL: f64 = 1e-6;

/// One bus, one dispatchable unit, one demand with three profiles, three
/// periods.
pub fn tiny_instance(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = 3;
    let profile = |id: &str, default: bool, rng: &mut ChaCha8Rng| Profile {
        id: id.into(),
        power: (0..t).map(|_| rng.gen_range(2.0..30.0f64).round()).collect(),
        cost: if default { 0.0 } else { rng.gen_range(0.0..150.0f64).round() },
        default,
    };
    let profiles = vec![
        profile("base", true, &mut rng),
        profile("alt1", false, &mut rng),
        profile("alt2", false, &mut rng),
    ];
    let min_energy = profiles
        .iter()
        .map(|p| p.power.iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let steepest = profiles
        .iter()
        .flat_map(|p| p.power.windows(2).map(|w| (w[1] - w[0]).abs()))
        .fold(0.0, f64::max);
    let p_min = rng.gen_range(1.0..10.0f64).round();
    Scenario {
        name: Some(format!("tiny-{seed}")),
        description: None,
        network: Network {
            buses: vec![1],
            main_grid_buses: vec![1],
            lines: vec![],
            trade_cap: BTreeMap::from([(1, rng.gen_range(10.0..60.0f64).round())]),
        },
        dres: vec![DresAsset {
            id: "gen".into(),
            bus: 1,
            p_min,
            p_max: p_min + rng.gen_range(5.0..50.0f64).round(),
            variable_cost: rng.gen_range(5.0..70.0f64).round(),
            startup_cost: rng.gen_range(0.0..400.0f64).round(),
            shutdown_cost: rng.gen_range(0.0..100.0f64).round(),
            initial_commitment: rng.gen_bool(0.5),
        }],
        ndres: vec![],
        stu: vec![],
        demands: vec![DemandAsset {
            id: "load".into(),
            bus: 1,
            profiles,
            min_energy,
            tol_lo: vec![0.1; t],
            tol_hi: vec![0.1; t],
            ramp_down: steepest + 1.0,
            ramp_up: steepest + 1.0,
        }],
        calendar: MarketCalendar {
            periods: t,
            dt_hours: 1.0,
            dam_prices: (0..t).map(|_| rng.gen_range(10.0..90.0f64).round()).collect(),
            sessions: vec![],
        },
        forecasts: ForecastSet {
            dam: ForecastWindow::default(),
            idm: BTreeMap::new(),
        },
    }
}

/// Best day-ahead value of a [`tiny_instance`] by enumerating every
/// commitment pattern and profile. For a fixed pattern and profile the
/// residual problem separates by period into a one-dimensional LP whose
/// optimum sits at an end of the feasible interval.
pub fn brute_force_dam(s: &Scenario) -> Option<f64> {
    let g = &s.dres[0];
    let d = &s.demands[0];
    let cap = s.network.trade_cap.values().sum::<f64>();
    let dt = s.calendar.dt_hours;
    let t_max = s.calendar.periods;
    let mut best: Option<f64> = None;
    for pattern in 0..(1u32 << t_max) {
        let on = |t: usize| pattern >> t & 1 == 1;
        for profile in &d.profiles {
            let mut value = -profile.cost;
            let mut feasible = true;
            let mut prev = g.initial_commitment;
            for t in 0..t_max {
                let u = on(t);
                if u && !prev {
                    value -= g.startup_cost;
                }
                if !u && prev {
                    value -= g.shutdown_cost;
                }
                prev = u;
                let load = profile.power[t];
                let (lo_unit, hi_unit) = if u { (g.p_min, g.p_max) } else { (0.0, 0.0) };
                // Net export p - load must stay inside the trade cap, and
                // purchases are bounded by every profile's load, not only
                // the chosen one.
                let floor = d.profiles.iter().map(|q| q.power[t]).fold(f64::INFINITY, f64::min);
                let lo = lo_unit.max(load - cap).max(load - floor);
                let hi = hi_unit.min(load + cap);
                if lo > hi + 1e-12 {
                    feasible = false;
                    break;
                }
                let price = s.calendar.dam_prices[t];
                let margin = price - g.variable_cost;
                let p = if margin > 0.0 { hi } else { lo };
                value += (price * (p - load) - g.variable_cost * p) * dt;
            }
            if feasible && best.is_none_or(|b| value > b) {
                best = Some(value);
            }
        }
    }
    best
}

/// Random power-block curve with unsorted efficiencies, so the map is in
/// general neither convex nor concave.
pub fn random_curve(rng: &mut ChaCha8Rng) -> PbCurve {
    let pb_min = rng.gen_range(10.0..60.0);
    let b1 = pb_min + rng.gen_range(10.0..60.0);
    let b2 = b1 + rng.gen_range(10.0..60.0);
    let pb_max = b2 + rng.gen_range(10.0..60.0);
    let eta = [0; 4].map(|_| rng.gen_range(0.2..0.45));
    PbCurve::new(pb_min, b1, b2, pb_max, eta)
}

/// Small model buying thermal input at `costs` and selling the converted
/// output at `prices`, with a shared input budget and a fixed running cost.
/// Conversion uses one SOS-2 set per period.
pub fn curve_model(curve: &PbCurve, prices: &[f64], costs: &[f64], budget: f64) -> MilpModel {
    let mut m = MilpModel::new();
    let mut obj = LinExpr::new();
    let mut total_input = LinExpr::new();
    for t in 0..prices.len() {
        let on = m.binary(format!("on_{t}"));
        let x = m.continuous(format!("x_{t}"), 0.0, curve.max_input());
        let y = m.continuous(format!("y_{t}"), 0.0, f64::INFINITY);
        let w: Vec<_> = (0..CURVE_POINTS)
            .map(|i| m.continuous(format!("w_{t}_{i}"), 0.0, 1.0))
            .collect();
        let mut sum = LinExpr::new().term(on, -1.0);
        let mut input = LinExpr::new().term(x, -1.0);
        let mut output = LinExpr::new().term(y, -1.0);
        for (i, &wi) in w.iter().enumerate() {
            sum.add(wi, 1.0);
            input.add(wi, curve.breakpoints[i]);
            output.add(wi, curve.values[i]);
        }
        m.add_constraint(format!("weights_{t}"), sum, Sense::Eq, 0.0);
        m.add_constraint(format!("input_{t}"), input, Sense::Eq, 0.0);
        m.add_constraint(format!("output_{t}"), output, Sense::Eq, 0.0);
        // Running below the minimum stable input is not allowed.
        m.add_constraint(
            format!("min_{t}"),
            LinExpr::new().term(x, 1.0).term(on, -curve.breakpoints[1]),
            Sense::Ge,
            0.0,
        );
        m.add_sos2(format!("curve_{t}"), w);
        obj.add(y, prices[t]);
        obj.add(x, -costs[t]);
        obj.add(on, -5.0);
        total_input.add(x, 1.0);
    }
    m.add_constraint("budget", total_input, Sense::Le, budget);
    m.set_objective(obj);
    m
}

/// Storage residuals: per-period balance, telescoped sum and end window.
pub fn storage_findings(s: &Scenario, energy: &[f64], charge: &[f64], discharge: &[f64], stu: usize) -> Vec<String> {
    let a = &s.stu[stu];
    let dt = s.calendar.dt_hours;
    let mut out = Vec::new();
    let mut level = a.initial_energy;
    let mut telescoped = a.initial_energy;
    for t in 0..energy.len() {
        let net = (a.charge_eff * charge[t] - discharge[t] / a.discharge_eff) * dt;
        level += net;
        telescoped += net;
        if (energy[t] - level).abs() > TOL {
            out.push(format!("{} t={t}: level {} expected {level}", a.id, energy[t]));
        }
        level = energy[t];
    }
    let last = energy.len() - 1;
    if (telescoped - energy[last]).abs() > TOL {
        out.push(format!("{}: telescoped {telescoped} vs final {}", a.id, energy[last]));
    }
    let cap = a.storage_cap[last];
    if energy[last] < a.end_alpha_lo * cap - TOL || energy[last] > a.end_alpha_hi * cap + TOL {
        out.push(format!("{}: final level {} outside end window", a.id, energy[last]));
    }
    out
}

/// Band, ramp and minimum-energy findings for one demand's consumption.
pub fn demand_findings(s: &Scenario, demand: usize, profile: &str, series: &[f64]) -> Vec<String> {
    let d = &s.demands[demand];
    let dt = s.calendar.dt_hours;
    let mut out = Vec::new();
    let Some(p) = d.profiles.iter().find(|p| p.id == profile) else {
        return vec![format!("{}: unknown profile {profile}", d.id)];
    };
    for t in 0..series.len() {
        let lo = (1.0 - d.tol_lo[t]) * p.power[t];
        let hi = (1.0 + d.tol_hi[t]) * p.power[t];
        if series[t] < lo - TOL || series[t] > hi + TOL {
            out.push(format!("{} t={t}: {} outside [{lo}, {hi}]", d.id, series[t]));
        }
        if t > 0 {
            let step = series[t] - series[t - 1];
            if step > d.ramp_up * dt + TOL || -step > d.ramp_down * dt + TOL {
                out.push(format!("{} t={t}: ramp {step}", d.id));
            }
        }
    }
    let energy = series.iter().sum::<f64>() * dt;
    if energy < d.min_energy - TOL {
        out.push(format!("{}: energy {energy} below {}", d.id, d.min_energy));
    }
    out
}
