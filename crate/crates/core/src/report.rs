//! Run reports: CSV and JSON files per run directory, a loader for them,
//! and post-hoc checks that re-derive contract compliance from the emitted
//! series without looking at the solver.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::Role;
use crate::orchestrator::{Mode, ProfitBreakdown, RunFailure, RunResult};
use crate::scenario::{Scenario, SessionId};

/// Absolute tolerance of the post-hoc checks.
pub const CHECK_TOL: f64 = 1e-6;

pub const NOCOORD_NOTE: &str = "No coordination: every asset trades alone at its own bus with the full trade cap, \
    network limits are ignored, and demands buy their default profile with no tolerance band.";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("CSV error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("JSON error in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {detail}")]
    Format { path: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TradeSeries {
    pub traded: Vec<f64>,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StorageSeries {
    pub energy: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionCheck {
    pub session: SessionId,
    pub status: crate::milp::SolveStatus,
    /// Absent when the session produced no solution.
    pub objective: Option<f64>,
    pub profit: Option<f64>,
    pub held: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifySummary {
    pub sessions: Vec<SessionCheck>,
    pub failure: Option<RunFailure>,
    /// Findings of the post-hoc checks.
    pub checks: Vec<String>,
}

impl VerifySummary {
    pub fn is_clean(&self) -> bool {
        self.failure.is_none() && self.checks.is_empty() && self.sessions.iter().all(|s| s.violations.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfitFile {
    pub mode: Mode,
    pub scenario: Option<String>,
    pub note: Option<String>,
    pub dam: f64,
    pub idm: BTreeMap<u32, f64>,
    pub idm_total: f64,
    pub total: f64,
}

impl ProfitFile {
    fn breakdown(&self) -> ProfitBreakdown {
        ProfitBreakdown {
            dam: self.dam,
            idm: self.idm.clone(),
            idm_total: self.idm_total,
            total: self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: Mode,
    pub scenario: Option<String>,
    pub periods: usize,
    pub dam: TradeSeries,
    pub idm: BTreeMap<u32, TradeSeries>,
    /// Electrical output per generating asset [MW].
    pub dispatch: BTreeMap<String, Vec<f64>>,
    pub storage: BTreeMap<String, StorageSeries>,
    pub demand: BTreeMap<String, Vec<f64>>,
    pub profit: ProfitBreakdown,
    /// Profile id per demand.
    pub profiles: BTreeMap<String, String>,
    pub verify: VerifySummary,
}

impl Report {
    pub fn from_run(r: &RunResult) -> Self {
        let s = &r.scenario;
        let periods = s.periods();
        let schedule = &r.ledger.schedule;
        let mut cumulative = r.ledger.dam_trade.clone().unwrap_or_else(|| vec![0.0; periods]);
        let dam = TradeSeries {
            traded: cumulative.clone(),
            cumulative: cumulative.clone(),
        };
        let mut idm = BTreeMap::new();
        for (k, trade) in &r.ledger.idm_trades {
            for (c, v) in cumulative.iter_mut().zip(trade) {
                *c += v;
            }
            idm.insert(
                *k,
                TradeSeries {
                    traded: trade.clone(),
                    cumulative: cumulative.clone(),
                },
            );
        }
        let mut dispatch = BTreeMap::new();
        for a in &s.dres {
            dispatch.insert(a.id.clone(), schedule.series(&a.id, Role::DresPower, periods));
        }
        for a in &s.ndres {
            dispatch.insert(a.id.clone(), schedule.series(&a.id, Role::NdresPower, periods));
        }
        for a in &s.stu {
            dispatch.insert(a.id.clone(), schedule.series(&a.id, Role::StuPower, periods));
        }
        let storage = s
            .stu
            .iter()
            .map(|a| {
                (
                    a.id.clone(),
                    StorageSeries {
                        energy: schedule.series(&a.id, Role::StuEnergy, periods),
                        charge: schedule.series(&a.id, Role::StuCharge, periods),
                        discharge: schedule.series(&a.id, Role::StuDischarge, periods),
                    },
                )
            })
            .collect();
        let demand = s
            .demands
            .iter()
            .map(|d| (d.id.clone(), schedule.series(&d.id, Role::DemandPower, periods)))
            .collect();
        let profiles = r
            .ledger
            .selected_profiles
            .iter()
            .filter_map(|(d, &p)| {
                let demand = s.demand(d)?;
                Some((d.clone(), demand.profiles.get(p)?.id.clone()))
            })
            .collect();
        let mut report = Report {
            mode: r.mode,
            scenario: s.name.clone(),
            periods,
            dam,
            idm,
            dispatch,
            storage,
            demand,
            profit: r.profit.clone(),
            profiles,
            verify: VerifySummary {
                sessions: r
                    .sessions
                    .iter()
                    .map(|x| SessionCheck {
                        session: x.session,
                        status: x.status,
                        objective: x.objective.is_finite().then_some(x.objective),
                        profit: x.profit.is_finite().then_some(x.profit),
                        held: x.held,
                        violations: x.violations.clone(),
                    })
                    .collect(),
                failure: r.failure.clone(),
                checks: Vec::new(),
            },
        };
        if r.is_complete() {
            let mut checks = check_demand_contracts(s, &report);
            checks.extend(check_storage(s, &report));
            checks.extend(check_nodal_balance(&report));
            report.verify.checks = checks;
        }
        report
    }

    /// Cumulative trade after the last session.
    pub fn final_trade(&self) -> &[f64] {
        self.idm.values().last().map_or(&self.dam.cumulative, |x| &x.cumulative)
    }
}

/// Tolerance band, ramps and minimum energy of every demand, checked on the
/// final consumption series against the selected profile.
pub fn check_demand_contracts(s: &Scenario, r: &Report) -> Vec<String> {
    let mut out = Vec::new();
    let dt = s.dt();
    for d in &s.demands {
        let Some(series) = r.demand.get(&d.id) else {
            out.push(format!("{}: no consumption series", d.id));
            continue;
        };
        let Some(profile) = r.profiles.get(&d.id).and_then(|p| d.profiles.iter().find(|x| &x.id == p)) else {
            out.push(format!("{}: no selected profile", d.id));
            continue;
        };
        for (t, &p) in series.iter().enumerate() {
            let lo = (1.0 - d.tol_lo[t]) * profile.power[t];
            let hi = (1.0 + d.tol_hi[t]) * profile.power[t];
            if p < lo - CHECK_TOL || p > hi + CHECK_TOL {
                out.push(format!("{} period {}: {p} outside [{lo}, {hi}]", d.id, t + 1));
            }
        }
        // The day-ahead profile itself is not ramp-limited; ramps apply to
        // intraday re-dispatch, so only check when a session re-optimized.
        if !r.idm.is_empty() {
            for t in 1..series.len() {
                let step = series[t] - series[t - 1];
                if step > d.ramp_up * dt + CHECK_TOL || -step > d.ramp_down * dt + CHECK_TOL {
                    out.push(format!("{} period {}: ramp {step} exceeds limits", d.id, t + 1));
                }
            }
        }
        let energy: f64 = series.iter().sum::<f64>() * dt;
        if energy < d.min_energy - CHECK_TOL {
            out.push(format!("{}: consumed {energy} MWh < minimum {}", d.id, d.min_energy));
        }
    }
    out
}

/// Storage level equals the initial level plus net charging, period by
/// period and telescoped over the day; the final level lies in the end
/// window.
pub fn check_storage(s: &Scenario, r: &Report) -> Vec<String> {
    let mut out = Vec::new();
    let dt = s.dt();
    for a in &s.stu {
        let Some(st) = r.storage.get(&a.id) else {
            out.push(format!("{}: no storage series", a.id));
            continue;
        };
        let net = |t: usize| (a.charge_eff * st.charge[t] - st.discharge[t] / a.discharge_eff) * dt;
        let mut prev = a.initial_energy;
        for t in 0..st.energy.len() {
            let residual = st.energy[t] - prev - net(t);
            if residual.abs() > CHECK_TOL {
                out.push(format!("{} period {}: storage balance residual {residual}", a.id, t + 1));
            }
            prev = st.energy[t];
        }
        let last = st.energy.len() - 1;
        let telescoped = a.initial_energy + (0..=last).map(net).sum::<f64>();
        if (telescoped - st.energy[last]).abs() > CHECK_TOL {
            out.push(format!("{}: telescoped level {telescoped} != final {}", a.id, st.energy[last]));
        }
        let (lo, hi) = (a.end_alpha_lo * a.storage_cap[last], a.end_alpha_hi * a.storage_cap[last]);
        if st.energy[last] < lo - CHECK_TOL || st.energy[last] > hi + CHECK_TOL {
            out.push(format!("{}: final level {} outside [{lo}, {hi}]", a.id, st.energy[last]));
        }
    }
    out
}

/// Generation minus consumption equals the net traded power every period.
pub fn check_nodal_balance(r: &Report) -> Vec<String> {
    let trade = r.final_trade();
    (0..r.periods)
        .filter_map(|t| {
            let gen: f64 = r.dispatch.values().map(|v| v[t]).sum();
            let load: f64 = r.demand.values().map(|v| v[t]).sum();
            let residual = gen - load - trade[t];
            (residual.abs() > CHECK_TOL).then(|| format!("period {}: balance residual {residual}", t + 1))
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn fmt6(x: f64) -> String {
    let text = format!("{x:.6}");
    match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => text,
    }
}

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| ReportError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn trade_rows(x: &TradeSeries) -> Vec<Vec<String>> {
    (0..x.traded.len())
        .map(|t| vec![(t + 1).to_string(), fmt6(x.traded[t]), fmt6(x.cumulative[t])])
        .collect()
}

fn long_rows(series: &BTreeMap<String, Vec<f64>>, periods: usize) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in 0..periods {
        for (id, v) in series {
            rows.push(vec![(t + 1).to_string(), id.clone(), fmt6(v[t])]);
        }
    }
    rows
}

/// Writes the report files into `dir`, overwriting earlier ones. Intraday
/// files are written only for sessions that ran.
pub fn emit_report(r: &Report, dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let trade_header = ["period", "tradedMW", "cumulativeMW"];
    write_rows(&dir.join("dam.csv"), &trade_header, trade_rows(&r.dam))?;
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().to_string();
            if name.starts_with("idm_") && name.ends_with(".csv") {
                fs::remove_file(e.path()).map_err(io_err(&e.path()))?;
            }
        }
    }
    for (k, x) in &r.idm {
        write_rows(&dir.join(format!("idm_{k}.csv")), &trade_header, trade_rows(x))?;
    }
    write_rows(&dir.join("dispatch.csv"), &["period", "assetId", "MW"], long_rows(&r.dispatch, r.periods))?;
    let mut storage_rows = Vec::new();
    for t in 0..r.periods {
        for (id, st) in &r.storage {
            storage_rows.push(vec![
                (t + 1).to_string(),
                id.clone(),
                fmt6(st.energy[t]),
                fmt6(st.charge[t]),
                fmt6(st.discharge[t]),
            ]);
        }
    }
    write_rows(
        &dir.join("storage.csv"),
        &["period", "stuId", "MWh_th", "chargeMW_th", "dischargeMW_th"],
        storage_rows,
    )?;
    write_rows(&dir.join("demand.csv"), &["period", "demandId", "MW"], long_rows(&r.demand, r.periods))?;
    let profit = ProfitFile {
        mode: r.mode,
        scenario: r.scenario.clone(),
        note: (r.mode == Mode::Nocoord).then(|| NOCOORD_NOTE.to_string()),
        dam: r.profit.dam,
        idm: r.profit.idm.clone(),
        idm_total: r.profit.idm_total,
        total: r.profit.total,
    };
    write_json(&dir.join("profit.json"), &profit)?;
    write_json(&dir.join("profiles.json"), &r.profiles)?;
    write_json(&dir.join("verify.json"), &r.verify)?;
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>, ReportError> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rd.records().collect::<Result<Vec<_>, _>>().map_err(csv_err(path))
}

fn num(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<f64, ReportError> {
    rec.get(i)
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| ReportError::Format {
            path: path.display().to_string(),
            detail: format!("bad number in column {} of {:?}", i + 1, rec),
        })
}

fn period(path: &Path, rec: &csv::StringRecord, periods: usize) -> Result<usize, ReportError> {
    let p = num(path, rec, 0)? as usize;
    if p == 0 || p > periods {
        return Err(ReportError::Format {
            path: path.display().to_string(),
            detail: format!("period {p} out of range"),
        });
    }
    Ok(p - 1)
}

fn read_trade(path: &Path) -> Result<TradeSeries, ReportError> {
    let rows = read_rows(path)?;
    let mut x = TradeSeries {
        traded: Vec::new(),
        cumulative: Vec::new(),
    };
    for rec in &rows {
        x.traded.push(num(path, rec, 1)?);
        x.cumulative.push(num(path, rec, 2)?);
    }
    Ok(x)
}

fn read_long(path: &Path, periods: usize) -> Result<BTreeMap<String, Vec<f64>>, ReportError> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in &read_rows(path)? {
        let t = period(path, rec, periods)?;
        let id = rec.get(1).unwrap_or_default().to_string();
        out.entry(id).or_insert_with(|| vec![0.0; periods])[t] = num(path, rec, 2)?;
    }
    Ok(out)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a report directory written by [`emit_report`]. CSV series carry
/// six decimals; JSON values are exact.
pub fn load_report(dir: &Path) -> Result<Report, ReportError> {
    let dam = read_trade(&dir.join("dam.csv"))?;
    let periods = dam.traded.len();
    let mut idm = BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(dir).map_err(io_err(dir))?.flatten().collect();
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let name = e.file_name().to_string_lossy().to_string();
        if let Some(k) = name.strip_prefix("idm_").and_then(|x| x.strip_suffix(".csv")) {
            if let Ok(k) = k.parse::<u32>() {
                idm.insert(k, read_trade(&e.path())?);
            }
        }
    }
    let storage_path = dir.join("storage.csv");
    let mut storage: BTreeMap<String, StorageSeries> = BTreeMap::new();
    for rec in &read_rows(&storage_path)? {
        let t = period(&storage_path, rec, periods)?;
        let id = rec.get(1).unwrap_or_default().to_string();
        let st = storage.entry(id).or_insert_with(|| StorageSeries {
            energy: vec![0.0; periods],
            charge: vec![0.0; periods],
            discharge: vec![0.0; periods],
        });
        st.energy[t] = num(&storage_path, rec, 2)?;
        st.charge[t] = num(&storage_path, rec, 3)?;
        st.discharge[t] = num(&storage_path, rec, 4)?;
    }
    let profit: ProfitFile = read_json(&dir.join("profit.json"))?;
    Ok(Report {
        mode: profit.mode,
        scenario: profit.scenario.clone(),
        periods,
        dam,
        idm,
        dispatch: read_long(&dir.join("dispatch.csv"), periods)?,
        storage,
        demand: read_long(&dir.join("demand.csv"), periods)?,
        profit: profit.breakdown(),
        profiles: read_json(&dir.join("profiles.json"))?,
        verify: read_json(&dir.join("verify.json"))?,
    })
}
