//! Synthetic scenarios: the 12-bus clear and cloudy days shipped with the
//! crate, and small seeded random instances for property tests.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::*;

pub const PERIODS: usize = 24;
/// First delivery period (1-based) of each intraday session.
pub const SESSION_TAUS: [usize; 7] = [1, 1, 5, 8, 12, 16, 21];
/// Share of the day-ahead forecast error removed by each session.
const ERROR_SHRINK: [f64; 7] = [0.5, 0.7, 0.8, 0.9, 1.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Day {
    Clear,
    Cloudy,
}

struct DayData {
    name: &'static str,
    description: &'static str,
    seed: u64,
    prices: [f64; PERIODS],
    wind: Vec<f64>,
    cloud: Vec<f64>,
}

const CLEAR_PRICES: [f64; PERIODS] = [
    48.0, 45.0, 43.0, 42.0, 42.0, 44.0, 50.0, 58.0, 62.0, 57.0, 50.0, 44.0, 40.0, 38.0, 37.0, 38.0, 42.0, 49.0, 57.0,
    64.0, 66.0, 60.0, 55.0, 50.0,
];
const CLOUDY_PRICES: [f64; PERIODS] = [
    55.0, 52.0, 50.0, 49.0, 49.0, 51.0, 58.0, 66.0, 70.0, 66.0, 60.0, 56.0, 54.0, 53.0, 54.0, 57.0, 62.0, 68.0, 74.0,
    79.0, 80.0, 73.0, 66.0, 60.0,
];

fn hour(t: usize) -> f64 {
    t as f64 + 0.5
}

/// Clear-sky shape: 0 at night, 1 at solar noon.
fn daylight(t: usize) -> f64 {
    let h = hour(t);
    if (6.5..19.5).contains(&h) {
        (PI * (h - 6.5) / 13.0).sin()
    } else {
        0.0
    }
}

fn day_data(day: Day) -> DayData {
    match day {
        Day::Clear => DayData {
            name: "clear",
            description: "Synthetic clear day: strong wind, full irradiance",
            seed: 2014,
            prices: CLEAR_PRICES,
            wind: (0..PERIODS).map(|t| 38.0 + 8.0 * (2.0 * PI * hour(t) / 24.0).cos()).collect(),
            cloud: vec![1.0; PERIODS],
        },
        Day::Cloudy => DayData {
            name: "cloudy",
            description: "Synthetic cloudy day: weak wind, intermittent afternoon clouds",
            seed: 2018,
            prices: CLOUDY_PRICES,
            wind: (0..PERIODS).map(|t| 12.0 + 6.0 * (2.0 * PI * (hour(t) - 4.0) / 24.0).cos()).collect(),
            cloud: (0..PERIODS)
                .map(|t| if t < 12 { 0.9 } else { 0.45 + 0.15 * (1.7 * hour(t)).sin() })
                .collect(),
        },
    }
}

fn round_to(x: f64, q: f64) -> f64 {
    (x / q).round() * q
}

/// Smooth forecast error: two random harmonics scaled by `amplitude`.
fn smooth_error(rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<f64> {
    let (a1, p1) = (rng.gen_range(0.4..1.0), rng.gen_range(0.0..2.0 * PI));
    let (a2, p2) = (rng.gen_range(0.2..0.6), rng.gen_range(0.0..2.0 * PI));
    (0..PERIODS)
        .map(|t| {
            let x = 2.0 * PI * hour(t) / 24.0;
            amplitude * (a1 * (x + p1).sin() + a2 * (3.0 * x + p2).sin()) / (a1 + a2)
        })
        .collect()
}

/// Three equal-energy profiles: a base shape and copies shifted three hours
/// earlier and later. Values are multiples of 0.25 MW so totals are exact.
fn profiles(shape: &[f64; PERIODS], energy: f64) -> Vec<Profile> {
    let total: f64 = shape.iter().sum();
    let mut base: Vec<f64> = shape.iter().map(|v| round_to(v * energy / total, 0.25)).collect();
    let mut diff = energy - base.iter().sum::<f64>();
    let mut i = 0;
    while diff.abs() > 1e-9 {
        let step = 0.25f64.copysign(diff);
        base[i % PERIODS] += step;
        diff -= step;
        i += 1;
    }
    let shifted = |by: isize| -> Vec<f64> {
        (0..PERIODS)
            .map(|t| base[(t as isize + by).rem_euclid(PERIODS as isize) as usize])
            .collect()
    };
    vec![
        Profile {
            id: "default".into(),
            power: base.clone(),
            cost: 0.0,
            default: true,
        },
        Profile {
            id: "early_peak".into(),
            power: shifted(3),
            cost: 0.0,
            default: false,
        },
        Profile {
            id: "late_peak".into(),
            power: shifted(-3),
            cost: 0.0,
            default: false,
        },
    ]
}

fn demand(id: &str, bus: BusId, shape: &[f64; PERIODS], energy: f64) -> DemandAsset {
    let profiles = profiles(shape, energy);
    let steepest = profiles
        .iter()
        .flat_map(|p| p.power.windows(2).map(|w| (w[1] - w[0]).abs()))
        .fold(0.0, f64::max);
    let ramp = round_to(steepest * 1.5 + 1.0, 0.5);
    DemandAsset {
        id: id.into(),
        bus,
        profiles,
        min_energy: energy,
        tol_lo: vec![0.1; PERIODS],
        tol_hi: vec![0.1; PERIODS],
        ramp_down: ramp,
        ramp_up: ramp,
    }
}

const INDUSTRIAL: [f64; PERIODS] = [
    0.7, 0.7, 0.7, 0.7, 0.7, 0.8, 1.0, 1.2, 1.3, 1.3, 1.3, 1.3, 1.2, 1.2, 1.3, 1.3, 1.3, 1.2, 1.0, 0.9, 0.8, 0.8,
    0.7, 0.7,
];
const AIRPORT: [f64; PERIODS] = [
    0.5, 0.4, 0.4, 0.4, 0.5, 0.7, 1.1, 1.4, 1.5, 1.3, 1.1, 1.0, 1.0, 1.0, 1.0, 1.1, 1.3, 1.5, 1.5, 1.4, 1.2, 1.0,
    0.8, 0.6,
];
const RESIDENTIAL: [f64; PERIODS] = [
    0.6, 0.5, 0.5, 0.5, 0.5, 0.6, 0.9, 1.2, 1.1, 0.9, 0.8, 0.8, 0.9, 0.9, 0.8, 0.8, 0.9, 1.1, 1.4, 1.6, 1.6, 1.4,
    1.1, 0.8,
];

/// The 12-bus VPP: hydro, biomass, wind, PV, a 50 MW solar thermal unit and
/// three flexible demands behind one point of common coupling.
pub fn vpp_day(day: Day) -> Scenario {
    let d = day_data(day);
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);

    let ring: Vec<(BusId, BusId)> = (1..=12).map(|b| (b, b % 12 + 1)).chain([(2, 7)]).collect();
    let lines = ring
        .iter()
        .map(|&(from, to)| Line {
            id: format!("l{from}_{to}"),
            from,
            to,
            susceptance: 10.0,
            flow_limit: 500.0,
        })
        .collect();
    let network = Network {
        buses: (1..=12).collect(),
        main_grid_buses: vec![7],
        lines,
        trade_cap: BTreeMap::from([(7, 300.0)]),
    };

    let dres = vec![
        DresAsset {
            id: "hydro".into(),
            bus: 6,
            p_min: 10.0,
            p_max: 111.0,
            variable_cost: 8.0,
            startup_cost: 500.0,
            shutdown_cost: 100.0,
            initial_commitment: false,
        },
        DresAsset {
            id: "biomass".into(),
            bus: 9,
            p_min: 1.0,
            p_max: 5.0,
            variable_cost: 45.0,
            startup_cost: 50.0,
            shutdown_cost: 10.0,
            initial_commitment: false,
        },
    ];
    let ndres = vec![
        NdresAsset {
            id: "wind".into(),
            bus: 4,
            p_min_series: vec![0.0; PERIODS],
        },
        NdresAsset {
            id: "pv".into(),
            bus: 8,
            p_min_series: vec![0.0; PERIODS],
        },
    ];
    let stu = vec![StuAsset {
        id: "stu".into(),
        bus: 1,
        pb_min: 30.0,
        pb_break1: 60.0,
        pb_break2: 95.0,
        pb_max: 130.0,
        eta1: 0.28,
        eta2: 0.33,
        eta3: 0.36,
        eta4: 50.0 / 130.0,
        startup_loss_factor: 0.1,
        charge_min: 0.0,
        charge_max: 150.0,
        discharge_min: 0.0,
        discharge_max: 130.0,
        charge_eff: 0.97,
        discharge_eff: 0.97,
        storage_cap: vec![1100.0; PERIODS],
        storage_floor: vec![0.0; PERIODS],
        end_alpha_lo: 0.1,
        end_alpha_hi: 0.3,
        initial_energy: 200.0,
        electrical_min: 0.0,
        electrical_max: 50.0,
        initial_pb_on: false,
    }];
    let demands = vec![
        demand("industrial", 3, &INDUSTRIAL, 800.0),
        demand("airport", 9, &AIRPORT, 580.0),
        demand("residential", 12, &RESIDENTIAL, 600.0),
    ];

    // Actual availability; forecasts approach it session by session.
    let clamp = |v: f64, hi: f64| round_to(v.clamp(0.0, hi), 0.01);
    let wind_actual = d.wind.clone();
    let pv_actual: Vec<f64> = (0..PERIODS).map(|t| 48.0 * daylight(t) * d.cloud[t]).collect();
    let sf_actual: Vec<f64> = (0..PERIODS).map(|t| 270.0 * daylight(t) * d.cloud[t]).collect();
    let wind_err = smooth_error(&mut rng, 8.0);
    let pv_err = smooth_error(&mut rng, 6.0);
    let sf_err = smooth_error(&mut rng, 35.0);
    let forecast = |shrink: f64, start: usize| {
        let keep = 1.0 - shrink;
        let window = |actual: &[f64], err: &[f64], hi: f64, sunlit: bool| -> Vec<f64> {
            (start..PERIODS)
                .map(|t| {
                    let e = if sunlit && daylight(t) == 0.0 { 0.0 } else { keep * err[t] };
                    clamp(actual[t] + e, hi)
                })
                .collect()
        };
        ForecastWindow {
            ndres: BTreeMap::from([
                ("wind".into(), window(&wind_actual, &wind_err, 50.0, false)),
                ("pv".into(), window(&pv_actual, &pv_err, 50.0, true)),
            ]),
            solar_field: BTreeMap::from([("stu".into(), window(&sf_actual, &sf_err, 300.0, true))]),
        }
    };

    let mut sessions = Vec::new();
    let mut idm = BTreeMap::new();
    for (i, &tau) in SESSION_TAUS.iter().enumerate() {
        let k = i as u32 + 1;
        let spread = 2.0 + i as f64 * 0.5;
        let prices = (tau - 1..PERIODS)
            .map(|t| round_to(d.prices[t] + rng.gen_range(-spread..spread), 0.01))
            .collect();
        sessions.push(IntradaySession { k, tau, prices });
        idm.insert(k, forecast(ERROR_SHRINK[i], tau - 1));
    }

    Scenario {
        name: Some(d.name.into()),
        description: Some(d.description.into()),
        network,
        dres,
        ndres,
        stu,
        demands,
        calendar: MarketCalendar {
            periods: PERIODS,
            dt_hours: 1.0,
            dam_prices: d.prices.to_vec(),
            sessions,
        },
        forecasts: ForecastSet {
            dam: forecast(0.0, 0),
            idm,
        },
    }
}

/// Copy of `s` in which every intraday session sees the day-ahead prices
/// and forecasts.
pub fn with_unchanged_intraday(s: &Scenario) -> Scenario {
    let mut out = s.clone();
    for sess in &mut out.calendar.sessions {
        let start = sess.window_start();
        sess.prices = s.calendar.dam_prices[start..].to_vec();
        let window = ForecastWindow {
            ndres: s.forecasts.dam.ndres.iter().map(|(k, v)| (k.clone(), v[start..].to_vec())).collect(),
            solar_field: s
                .forecasts
                .dam
                .solar_field
                .iter()
                .map(|(k, v)| (k.clone(), v[start..].to_vec()))
                .collect(),
        };
        out.forecasts.idm.insert(sess.k, window);
    }
    out
}

/// Small random VPP on a three-bus line with one of each asset class.
/// Always passes validation.
pub fn random_scenario(seed: u64, periods: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = |lo: f64, hi: f64| -> Vec<f64> { (0..periods).map(|_| round_to(rng.gen_range(lo..hi), 0.01)).collect() };
    let prices = series(10.0, 90.0);
    let wind = series(0.0, 40.0);
    let sun: Vec<f64> = series(0.0, 200.0);
    let base = series(5.0, 25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let shift = rng.gen_range(1..periods.max(2));
    let alt: Vec<f64> = (0..periods).map(|t| base[(t + shift) % periods]).collect();
    let energy = base.iter().sum::<f64>().min(alt.iter().sum::<f64>());
    let steepest = [&base, &alt]
        .iter()
        .flat_map(|p| p.windows(2).map(|w| (w[1] - w[0]).abs()))
        .fold(0.0, f64::max);

    let mut stu = vpp_day(Day::Clear).stu.remove(0);
    stu.bus = 3;
    stu.storage_cap = vec![400.0; periods];
    stu.storage_floor = vec![0.0; periods];
    stu.initial_energy = rng.gen_range(0.0..200.0);
    stu.end_alpha_lo = 0.0;
    stu.end_alpha_hi = 1.0;

    Scenario {
        name: Some(format!("random-{seed}")),
        description: None,
        network: Network {
            buses: vec![1, 2, 3],
            main_grid_buses: vec![1],
            lines: vec![
                Line { id: "l12".into(), from: 1, to: 2, susceptance: 10.0, flow_limit: 500.0 },
                Line { id: "l23".into(), from: 2, to: 3, susceptance: 10.0, flow_limit: 500.0 },
            ],
            trade_cap: BTreeMap::from([(1, 300.0)]),
        },
        dres: vec![DresAsset {
            id: "hydro".into(),
            bus: 2,
            p_min: rng.gen_range(1.0..10.0),
            p_max: rng.gen_range(20.0..60.0),
            variable_cost: rng.gen_range(5.0..60.0),
            startup_cost: rng.gen_range(0.0..300.0),
            shutdown_cost: rng.gen_range(0.0..50.0),
            initial_commitment: rng.gen_bool(0.5),
        }],
        ndres: vec![NdresAsset { id: "wind".into(), bus: 1, p_min_series: vec![0.0; periods] }],
        stu: vec![stu],
        demands: vec![DemandAsset {
            id: "load".into(),
            bus: 2,
            profiles: vec![
                Profile { id: "default".into(), power: base, cost: 0.0, default: true },
                Profile { id: "shifted".into(), power: alt, cost: rng.gen_range(0.0..100.0), default: false },
            ],
            min_energy: energy,
            tol_lo: vec![0.1; periods],
            tol_hi: vec![0.1; periods],
            ramp_down: steepest + 5.0,
            ramp_up: steepest + 5.0,
        }],
        calendar: MarketCalendar { periods, dt_hours: 1.0, dam_prices: prices, sessions: vec![] },
        forecasts: ForecastSet {
            dam: ForecastWindow {
                ndres: BTreeMap::from([("wind".into(), wind)]),
                solar_field: BTreeMap::from([("stu".into(), sun)]),
            },
            idm: BTreeMap::new(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_days_are_valid() {
        for day in [Day::Clear, Day::Cloudy] {
            let s = vpp_day(day);
            assert_eq!(validate_scenario(&s), vec![], "{day:?}");
            assert_eq!(s.calendar.sessions.len(), 7);
            assert_eq!(s.network.lines.len(), 13);
        }
    }

    #[test]
    fn profiles_share_exact_energy() {
        let s = vpp_day(Day::Clear);
        for (d, target) in s.demands.iter().zip([800.0, 580.0, 600.0]) {
            for p in &d.profiles {
                assert_eq!(p.energy(1.0), target, "{}/{}", d.id, p.id);
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(vpp_day(Day::Cloudy), vpp_day(Day::Cloudy));
        assert_eq!(random_scenario(7, 4), random_scenario(7, 4));
    }

    #[test]
    fn last_sessions_see_actual_output() {
        let s = vpp_day(Day::Clear);
        let last = &s.forecasts.idm[&7];
        let k5 = &s.forecasts.idm[&5];
        let start5 = s.calendar.sessions[4].window_start();
        let start7 = s.calendar.sessions[6].window_start();
        for t in start7..PERIODS {
            assert_eq!(last.ndres["wind"][t - start7], k5.ndres["wind"][t - start5]);
        }
    }

    #[test]
    fn cloudy_day_is_darker() {
        let energy = |s: &Scenario| s.forecasts.dam.solar_field["stu"].iter().sum::<f64>();
        assert!(energy(&vpp_day(Day::Cloudy)) < energy(&vpp_day(Day::Clear)));
    }

    #[test]
    fn unchanged_intraday_copies_day_ahead() {
        let s = with_unchanged_intraday(&vpp_day(Day::Clear));
        let sess = &s.calendar.sessions[3];
        let start = sess.window_start();
        assert_eq!(sess.prices, s.calendar.dam_prices[start..]);
        assert_eq!(s.forecasts.idm[&sess.k].ndres["pv"], s.forecasts.dam.ndres["pv"][start..]);
    }

    #[test]
    fn random_scenarios_are_valid() {
        for seed in 0..20 {
            let s = random_scenario(seed, 4);
            assert_eq!(validate_scenario(&s), vec![], "seed {seed}");
        }
    }
}
