//! Scenario data: network, assets, market calendar and forecasts.
//!
//! A scenario is a single JSON document. Periods are 1-based in the file
//! (`tau` of the first intraday session is 1) and 0-based everywhere in code.
//! Session series (intraday prices and forecasts) cover the delivery window
//! `tau..=T` only and are indexed relative to the window start.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of intraday sessions in the calendar.
pub const MAX_INTRADAY_SESSIONS: usize = 7;

pub type BusId = u32;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Line {
    pub id: String,
    pub from: BusId,
    pub to: BusId,
    /// Per-unit susceptance; flow = susceptance * angle difference.
    pub susceptance: f64,
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Network {
    pub buses: Vec<BusId>,
    pub main_grid_buses: Vec<BusId>,
    pub lines: Vec<Line>,
    /// Maximum exchange with the main grid per PCC bus [MW].
    pub trade_cap: BTreeMap<BusId, f64>,
}

impl Network {
    pub fn is_main_grid(&self, bus: BusId) -> bool {
        self.main_grid_buses.contains(&bus)
    }

    /// Lowest-id PCC bus; its voltage angle is the reference.
    pub fn reference_bus(&self) -> Option<BusId> {
        self.main_grid_buses.iter().copied().min()
    }

    pub fn total_trade_cap(&self) -> f64 {
        self.main_grid_buses
            .iter()
            .filter_map(|b| self.trade_cap.get(b))
            .sum()
    }
}

/// Dispatchable renewable plant (hydro, biomass).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DresAsset {
    pub id: String,
    pub bus: BusId,
    pub p_min: f64,
    pub p_max: f64,
    /// [€/MWh]
    pub variable_cost: f64,
    /// [€]
    pub startup_cost: f64,
    /// [€]
    pub shutdown_cost: f64,
    #[serde(default)]
    pub initial_commitment: bool,
}

/// Non-dispatchable renewable plant (wind, PV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NdresAsset {
    pub id: String,
    pub bus: BusId,
    pub p_min_series: Vec<f64>,
}

/// Solar thermal unit: solar field, thermal storage and power block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StuAsset {
    pub id: String,
    pub bus: BusId,
    #[serde(rename = "pbMin_th")]
    pub pb_min: f64,
    #[serde(rename = "pbBreak1_th")]
    pub pb_break1: f64,
    #[serde(rename = "pbBreak2_th")]
    pub pb_break2: f64,
    #[serde(rename = "pbMax_th")]
    pub pb_max: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub startup_loss_factor: f64,
    #[serde(rename = "chargeMin_th")]
    pub charge_min: f64,
    #[serde(rename = "chargeMax_th")]
    pub charge_max: f64,
    #[serde(rename = "dischargeMin_th")]
    pub discharge_min: f64,
    #[serde(rename = "dischargeMax_th")]
    pub discharge_max: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    #[serde(rename = "storageCap_th")]
    pub storage_cap: Vec<f64>,
    #[serde(rename = "storageFloor_th")]
    pub storage_floor: Vec<f64>,
    pub end_alpha_lo: f64,
    pub end_alpha_hi: f64,
    #[serde(rename = "initialEnergy_th")]
    pub initial_energy: f64,
    pub electrical_min: f64,
    pub electrical_max: f64,
    #[serde(default)]
    pub initial_pb_on: bool,
}

impl StuAsset {
    pub fn efficiencies(&self) -> [f64; 4] {
        [self.eta1, self.eta2, self.eta3, self.eta4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub id: String,
    pub power: Vec<f64>,
    /// Compensation paid to the demand owner when selected [€].
    pub cost: f64,
    #[serde(default)]
    pub default: bool,
}

impl Profile {
    pub fn energy(&self, dt_hours: f64) -> f64 {
        self.power.iter().sum::<f64>() * dt_hours
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DemandAsset {
    pub id: String,
    pub bus: BusId,
    pub profiles: Vec<Profile>,
    /// [MWh]
    pub min_energy: f64,
    pub tol_lo: Vec<f64>,
    pub tol_hi: Vec<f64>,
    /// [MW/h]
    pub ramp_down: f64,
    /// [MW/h]
    pub ramp_up: f64,
}

impl DemandAsset {
    pub fn default_profile(&self) -> Option<(usize, &Profile)> {
        self.profiles.iter().enumerate().find(|(_, p)| p.default)
    }

    pub fn profile_index(&self, id: &str) -> Option<usize> {
        self.profiles.iter().position(|p| p.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradaySession {
    pub k: u32,
    /// First delivery period, 1-based.
    pub tau: usize,
    /// Prices for periods `tau..=T`.
    pub prices: Vec<f64>,
}

impl IntradaySession {
    pub fn window_start(&self) -> usize {
        self.tau.saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MarketCalendar {
    #[serde(rename = "T")]
    pub periods: usize,
    pub dt_hours: f64,
    pub dam_prices: Vec<f64>,
    #[serde(default)]
    pub sessions: Vec<IntradaySession>,
}

impl MarketCalendar {
    pub fn session(&self, k: u32) -> Option<&IntradaySession> {
        self.sessions.iter().find(|s| s.k == k)
    }
}

/// Stochastic availability over one session's delivery window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecastWindow {
    /// NDRES availability per asset [MW].
    #[serde(default)]
    pub ndres: BTreeMap<String, Vec<f64>>,
    /// STU solar-field availability per asset [MW-th].
    #[serde(default, rename = "solarField_th")]
    pub solar_field: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub dam: ForecastWindow,
    #[serde(default)]
    pub idm: BTreeMap<u32, ForecastWindow>,
}

/// Market session identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SessionId {
    Dam,
    Idm(u32),
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionId::Dam => f.write_str("dam"),
            SessionId::Idm(k) => write!(f, "idm{k}"),
        }
    }
}

impl std::str::FromStr for SessionId {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("dam") {
            return Ok(SessionId::Dam);
        }
        text.strip_prefix("idm")
            .and_then(|k| k.parse::<u32>().ok())
            .filter(|&k| k > 0)
            .map(SessionId::Idm)
            .ok_or_else(|| format!("unknown session {text:?}; expected dam or idm<k>"))
    }
}

/// Forecast view anchored at absolute period indices.
#[derive(Debug, Clone, Copy)]
pub struct WindowForecast<'a> {
    pub start: usize,
    pub window: &'a ForecastWindow,
}

impl WindowForecast<'_> {
    pub fn ndres(&self, asset: &str, t: usize) -> f64 {
        lookup(&self.window.ndres, asset, t - self.start)
    }

    pub fn solar_field(&self, asset: &str, t: usize) -> f64 {
        lookup(&self.window.solar_field, asset, t - self.start)
    }
}

fn lookup(map: &BTreeMap<String, Vec<f64>>, asset: &str, i: usize) -> f64 {
    map.get(asset)
        .and_then(|s| s.get(i))
        .copied()
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub network: Network,
    #[serde(default)]
    pub dres: Vec<DresAsset>,
    #[serde(default)]
    pub ndres: Vec<NdresAsset>,
    #[serde(default)]
    pub stu: Vec<StuAsset>,
    #[serde(default)]
    pub demands: Vec<DemandAsset>,
    pub calendar: MarketCalendar,
    pub forecasts: ForecastSet,
}

impl Scenario {
    pub fn periods(&self) -> usize {
        self.calendar.periods
    }

    pub fn dt(&self) -> f64 {
        self.calendar.dt_hours
    }

    /// First delivery period (0-based) of a session.
    pub fn window_start(&self, session: SessionId) -> Option<usize> {
        match session {
            SessionId::Dam => Some(0),
            SessionId::Idm(k) => self.calendar.session(k).map(IntradaySession::window_start),
        }
    }

    pub fn forecast(&self, session: SessionId) -> Option<WindowForecast<'_>> {
        let start = self.window_start(session)?;
        let window = match session {
            SessionId::Dam => &self.forecasts.dam,
            SessionId::Idm(k) => self.forecasts.idm.get(&k)?,
        };
        Some(WindowForecast { start, window })
    }

    /// Price at absolute period `t` for the given session.
    pub fn price(&self, session: SessionId, t: usize) -> f64 {
        match session {
            SessionId::Dam => self.calendar.dam_prices[t],
            SessionId::Idm(k) => {
                let s = self.calendar.session(k).expect("session exists");
                s.prices[t - s.window_start()]
            }
        }
    }

    pub fn session_ids(&self) -> Vec<SessionId> {
        std::iter::once(SessionId::Dam)
            .chain(self.calendar.sessions.iter().map(|s| SessionId::Idm(s.k)))
            .collect()
    }

    pub fn demand(&self, id: &str) -> Option<&DemandAsset> {
        self.demands.iter().find(|d| d.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        let diags = validate_scenario(&scenario);
        if diags.is_empty() {
            Ok(scenario)
        } else {
            Err(ScenarioError::Invalid(diags))
        }
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json(&text)
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub entity: String,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

pub mod rule {
    pub const DUPLICATE_ID: &str = "duplicate id";
    pub const UNKNOWN_BUS: &str = "unknown bus";
    pub const DISCONNECTED: &str = "network disconnected";
    pub const NO_MAIN_GRID: &str = "no main grid bus";
    pub const TRADE_CAP: &str = "invalid trade cap";
    pub const SELF_LOOP: &str = "line endpoints coincide";
    pub const SUSCEPTANCE: &str = "non-positive susceptance";
    pub const FLOW_LIMIT: &str = "non-positive flow limit";
    pub const DRES_LIMITS: &str = "power limits out of order";
    pub const NEGATIVE_COST: &str = "negative cost";
    pub const SERIES_LENGTH: &str = "series length mismatch";
    pub const NEGATIVE_VALUE: &str = "negative value";
    pub const BREAKPOINTS: &str = "power block breakpoints out of order";
    pub const EFFICIENCY: &str = "efficiency out of (0,1]";
    pub const EFFICIENCY_ORDER: &str = "power block efficiencies decreasing";
    pub const END_ALPHA: &str = "end-of-horizon multipliers out of order";
    pub const STORAGE_BOUNDS: &str = "storage floor above capacity";
    pub const INITIAL_ENERGY: &str = "initial energy out of range";
    pub const STU_LIMITS: &str = "storage or electrical limits out of order";
    pub const STARTUP_LOSS: &str = "startup loss factor out of [0,1]";
    pub const DEFAULT_PROFILE: &str = "exactly one default profile required";
    pub const DEFAULT_COST: &str = "default profile must cost 0";
    pub const NO_PROFILES: &str = "no profiles";
    pub const MIN_ENERGY: &str = "minEnergy unreachable";
    pub const TOLERANCE: &str = "tolerance out of [0,1)";
    pub const RAMP: &str = "negative ramp";
    pub const PERIODS: &str = "invalid period count or length";
    pub const TOO_MANY_SESSIONS: &str = "more than seven intraday sessions";
    pub const SESSION_ORDER: &str = "session order";
    pub const FIRST_TAU: &str = "first intraday session must start at period 1";
    pub const FORECAST_MISSING: &str = "forecast missing";
    pub const NDRES_CROSSED: &str = "minimum output above forecast";
}

struct Checker {
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, entity: impl Into<String>, rule: &'static str, detail: impl Into<String>) {
        self.diags.push(Diagnostic {
            entity: entity.into(),
            rule,
            detail: detail.into(),
        });
    }

    fn check(&mut self, ok: bool, entity: &str, rule: &'static str, detail: impl FnOnce() -> String) {
        if !ok {
            self.push(entity, rule, detail());
        }
    }

    fn series(&mut self, entity: &str, name: &str, series: &[f64], len: usize) {
        if series.len() != len {
            self.push(
                entity,
                rule::SERIES_LENGTH,
                format!("{name} has {} values, expected {len}", series.len()),
            );
        }
    }

    fn non_negative(&mut self, entity: &str, name: &str, series: &[f64]) {
        if let Some((t, v)) = series.iter().enumerate().find(|(_, v)| **v < 0.0 || v.is_nan()) {
            self.push(entity, rule::NEGATIVE_VALUE, format!("{name}[{}] = {v}", t + 1));
        }
    }
}

/// Checks every scenario invariant; an empty list means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Diagnostic> {
    let mut c = Checker { diags: Vec::new() };
    let periods = s.calendar.periods;
    let dt = s.calendar.dt_hours;
    let buses: BTreeSet<BusId> = s.network.buses.iter().copied().collect();

    check_network(&mut c, &s.network, &buses);

    let mut ids = BTreeSet::new();
    let asset_ids = s
        .dres
        .iter()
        .map(|a| (&a.id, a.bus))
        .chain(s.ndres.iter().map(|a| (&a.id, a.bus)))
        .chain(s.stu.iter().map(|a| (&a.id, a.bus)))
        .chain(s.demands.iter().map(|a| (&a.id, a.bus)));
    for (id, bus) in asset_ids {
        c.check(ids.insert(id.clone()), id, rule::DUPLICATE_ID, || "asset id reused".into());
        c.check(buses.contains(&bus), id, rule::UNKNOWN_BUS, || format!("bus {bus}"));
    }

    for a in &s.dres {
        c.check(
            0.0 <= a.p_min && a.p_min <= a.p_max,
            &a.id,
            rule::DRES_LIMITS,
            || format!("pMin {} pMax {}", a.p_min, a.p_max),
        );
        c.check(
            a.variable_cost >= 0.0 && a.startup_cost >= 0.0 && a.shutdown_cost >= 0.0,
            &a.id,
            rule::NEGATIVE_COST,
            || "variable, startup and shutdown costs must be >= 0".into(),
        );
    }

    for a in &s.ndres {
        c.series(&a.id, "pMinSeries", &a.p_min_series, periods);
        c.non_negative(&a.id, "pMinSeries", &a.p_min_series);
    }

    for a in &s.stu {
        check_stu(&mut c, a, periods);
    }

    for d in &s.demands {
        check_demand(&mut c, d, periods, dt);
    }

    check_calendar(&mut c, &s.calendar);
    check_forecasts(&mut c, s);
    c.diags
}

fn check_network(c: &mut Checker, n: &Network, buses: &BTreeSet<BusId>) {
    if buses.len() != n.buses.len() {
        c.push("network", rule::DUPLICATE_ID, "bus listed twice");
    }
    if n.main_grid_buses.is_empty() {
        c.push("network", rule::NO_MAIN_GRID, "at least one PCC bus is required");
    }
    for b in &n.main_grid_buses {
        let entity = format!("bus {b}");
        c.check(buses.contains(b), &entity, rule::UNKNOWN_BUS, || "PCC bus not in network".into());
        match n.trade_cap.get(b) {
            Some(cap) => c.check(*cap >= 0.0, &entity, rule::TRADE_CAP, || format!("trade cap {cap}")),
            None => c.push(entity, rule::TRADE_CAP, "missing trade cap"),
        }
    }
    for b in n.trade_cap.keys() {
        if !n.main_grid_buses.contains(b) {
            c.push(format!("bus {b}"), rule::TRADE_CAP, "trade cap given for a non-PCC bus");
        }
    }
    let mut line_ids = BTreeSet::new();
    for l in &n.lines {
        c.check(line_ids.insert(&l.id), &l.id, rule::DUPLICATE_ID, || "line id reused".into());
        for end in [l.from, l.to] {
            c.check(buses.contains(&end), &l.id, rule::UNKNOWN_BUS, || format!("bus {end}"));
        }
        c.check(l.from != l.to, &l.id, rule::SELF_LOOP, || format!("bus {}", l.from));
        c.check(l.susceptance > 0.0, &l.id, rule::SUSCEPTANCE, || l.susceptance.to_string());
        c.check(l.flow_limit > 0.0, &l.id, rule::FLOW_LIMIT, || l.flow_limit.to_string());
    }

    // Breadth-first reachability from an arbitrary bus.
    if let Some(&root) = buses.iter().next() {
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(b) = queue.pop_front() {
            for l in &n.lines {
                let next = if l.from == b {
                    l.to
                } else if l.to == b {
                    l.from
                } else {
                    continue;
                };
                if buses.contains(&next) && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        if seen.len() != buses.len() {
            let missing: Vec<_> = buses.difference(&seen).map(ToString::to_string).collect();
            c.push("network", rule::DISCONNECTED, format!("unreachable buses {}", missing.join(",")));
        }
    }
}

fn check_stu(c: &mut Checker, a: &StuAsset, periods: usize) {
    let id = a.id.as_str();
    c.check(
        0.0 < a.pb_min && a.pb_min <= a.pb_break1 && a.pb_break1 <= a.pb_break2 && a.pb_break2 <= a.pb_max,
        id,
        rule::BREAKPOINTS,
        || format!("{} {} {} {}", a.pb_min, a.pb_break1, a.pb_break2, a.pb_max),
    );
    let etas = a.efficiencies();
    for (name, eta) in [
        ("eta1", a.eta1),
        ("eta2", a.eta2),
        ("eta3", a.eta3),
        ("eta4", a.eta4),
        ("chargeEff", a.charge_eff),
        ("dischargeEff", a.discharge_eff),
    ] {
        c.check(eta > 0.0 && eta <= 1.0, id, rule::EFFICIENCY, || format!("{name} = {eta}"));
    }
    c.check(etas.windows(2).all(|w| w[0] <= w[1]), id, rule::EFFICIENCY_ORDER, || {
        format!("{etas:?}")
    });
    c.check(
        (0.0..=1.0).contains(&a.startup_loss_factor),
        id,
        rule::STARTUP_LOSS,
        || a.startup_loss_factor.to_string(),
    );
    c.check(
        0.0 <= a.end_alpha_lo && a.end_alpha_lo <= a.end_alpha_hi && a.end_alpha_hi <= 1.0,
        id,
        rule::END_ALPHA,
        || format!("endAlphaLo {} endAlphaHi {}", a.end_alpha_lo, a.end_alpha_hi),
    );
    c.check(
        0.0 <= a.charge_min
            && a.charge_min <= a.charge_max
            && 0.0 <= a.discharge_min
            && a.discharge_min <= a.discharge_max
            && 0.0 <= a.electrical_min
            && a.electrical_min <= a.electrical_max,
        id,
        rule::STU_LIMITS,
        || "charge, discharge and electrical limits need 0 <= min <= max".into(),
    );
    c.series(id, "storageCap_th", &a.storage_cap, periods);
    c.series(id, "storageFloor_th", &a.storage_floor, periods);
    c.non_negative(id, "storageFloor_th", &a.storage_floor);
    if let Some(t) = a
        .storage_floor
        .iter()
        .zip(&a.storage_cap)
        .position(|(lo, hi)| lo > hi)
    {
        c.push(id, rule::STORAGE_BOUNDS, format!("period {}", t + 1));
    }
    if let (Some(lo), Some(hi)) = (a.storage_floor.first(), a.storage_cap.first()) {
        c.check(
            *lo <= a.initial_energy && a.initial_energy <= *hi,
            id,
            rule::INITIAL_ENERGY,
            || format!("{} not in [{lo}, {hi}]", a.initial_energy),
        );
    }
}

fn check_demand(c: &mut Checker, d: &DemandAsset, periods: usize, dt: f64) {
    let id = d.id.as_str();
    if d.profiles.is_empty() {
        c.push(id, rule::NO_PROFILES, "at least one profile is required");
    }
    let defaults: Vec<_> = d.profiles.iter().filter(|p| p.default).collect();
    c.check(defaults.len() == 1, id, rule::DEFAULT_PROFILE, || {
        format!("{} profiles flagged default", defaults.len())
    });
    for p in &defaults {
        c.check(p.cost == 0.0, id, rule::DEFAULT_COST, || format!("{} costs {}", p.id, p.cost));
    }
    let mut profile_ids = BTreeSet::new();
    for p in &d.profiles {
        let entity = format!("{id}/{}", p.id);
        c.check(profile_ids.insert(&p.id), &entity, rule::DUPLICATE_ID, || "profile id reused".into());
        c.series(&entity, "power", &p.power, periods);
        c.non_negative(&entity, "power", &p.power);
        let energy = p.energy(dt);
        c.check(d.min_energy <= energy + 1e-9, &entity, rule::MIN_ENERGY, || {
            format!("minEnergy {} MWh exceeds profile total {energy} MWh", d.min_energy)
        });
    }
    for (name, tol) in [("tolLo", &d.tol_lo), ("tolHi", &d.tol_hi)] {
        c.series(id, name, tol, periods);
        if let Some((t, v)) = tol.iter().enumerate().find(|(_, v)| !(0.0..1.0).contains(*v)) {
            c.push(id, rule::TOLERANCE, format!("{name}[{}] = {v}", t + 1));
        }
    }
    c.check(d.ramp_down >= 0.0 && d.ramp_up >= 0.0, id, rule::RAMP, || {
        format!("rampDown {} rampUp {}", d.ramp_down, d.ramp_up)
    });
}

fn check_calendar(c: &mut Checker, cal: &MarketCalendar) {
    let periods = cal.periods;
    c.check(periods > 0 && cal.dt_hours > 0.0, "calendar", rule::PERIODS, || {
        format!("T = {periods}, dtHours = {}", cal.dt_hours)
    });
    c.series("calendar", "damPrices", &cal.dam_prices, periods);
    c.check(
        cal.sessions.len() <= MAX_INTRADAY_SESSIONS,
        "calendar",
        rule::TOO_MANY_SESSIONS,
        || format!("{} sessions", cal.sessions.len()),
    );
    if let Some(first) = cal.sessions.first() {
        c.check(first.tau == 1, &format!("idm{}", first.k), rule::FIRST_TAU, || {
            format!("tau = {}", first.tau)
        });
    }
    for pair in cal.sessions.windows(2) {
        c.check(
            pair[0].k < pair[1].k && pair[0].tau <= pair[1].tau,
            &format!("idm{}", pair[1].k),
            rule::SESSION_ORDER,
            || "session ids must increase and tau must not decrease".into(),
        );
    }
    for s in &cal.sessions {
        let entity = format!("idm{}", s.k);
        if s.tau == 0 || s.tau > periods {
            c.push(entity, rule::SESSION_ORDER, format!("tau {} outside 1..={periods}", s.tau));
            continue;
        }
        c.series(&entity, "prices", &s.prices, periods - s.tau + 1);
    }
}

fn check_forecasts(c: &mut Checker, s: &Scenario) {
    let periods = s.calendar.periods;
    let mut windows = vec![("dam".to_string(), 0usize, Some(&s.forecasts.dam))];
    for session in &s.calendar.sessions {
        if session.tau == 0 || session.tau > periods {
            continue;
        }
        windows.push((
            format!("idm{}", session.k),
            session.tau - 1,
            s.forecasts.idm.get(&session.k),
        ));
    }
    for (name, start, window) in windows {
        let Some(window) = window else {
            c.push(name, rule::FORECAST_MISSING, "no forecast for session");
            continue;
        };
        let len = periods - start;
        let groups = [
            (&window.ndres, s.ndres.iter().map(|a| a.id.as_str()).collect::<Vec<_>>()),
            (&window.solar_field, s.stu.iter().map(|a| a.id.as_str()).collect()),
        ];
        for (map, assets) in groups {
            for asset in assets {
                let entity = format!("{name}/{asset}");
                match map.get(asset) {
                    Some(series) => {
                        c.series(&entity, "availability", series, len);
                        c.non_negative(&entity, "availability", series);
                    }
                    None => c.push(entity, rule::FORECAST_MISSING, "no availability series"),
                }
            }
        }
        for a in &s.ndres {
            let Some(series) = window.ndres.get(&a.id) else { continue };
            let crossed = series
                .iter()
                .enumerate()
                .find(|(i, avail)| a.p_min_series.get(start + i).is_some_and(|lo| lo > avail));
            if let Some((i, avail)) = crossed {
                c.push(
                    format!("{name}/{}", a.id),
                    rule::NDRES_CROSSED,
                    format!("period {}: minimum {} > forecast {avail}", start + i + 1, a.p_min_series[start + i]),
                );
            }
        }
    }
}
