use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use vpp_core::formulation::assemble_dam;
use vpp_core::milp::{write_lp, SolveOptions, SolveStatus};
use vpp_core::orchestrator::{profile_threshold, run, Mode, OrchestratorError, RunConfig, Threshold};
use vpp_core::report::{emit_report, Report};
use vpp_core::scenario::{load_scenario, ScenarioError, SessionId};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "vpp", version, about = "Market scheduling for renewable virtual power plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Vpp,
    Nocoord,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the day-ahead session and the intraday sessions in order.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "vpp")]
        mode: ModeArg,
        /// Comma separated prefix of the calendar, e.g. dam,idm1,idm2.
        #[arg(long, value_delimiter = ',')]
        sessions: Option<Vec<SessionId>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Relative MIP gap.
        #[arg(long)]
        gap: Option<f64>,
        /// Time limit per session in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Write the day-ahead model in LP format.
        #[arg(long)]
        dump_model: Option<PathBuf>,
    },
    /// Find the largest cost at which a profile is still chosen day-ahead.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        demand: String,
        #[arg(long)]
        profile: String,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario file without solving.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: EXIT_INVALID,
            error: e.into(),
        }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn load(path: &Path) -> Result<vpp_core::scenario::Scenario, Failure> {
    load_scenario(path).map_err(|e| {
        let text = match &e {
            ScenarioError::Invalid(diags) => {
                let lines: String = diags.iter().map(|d| format!("\n  {d}")).collect();
                format!("{} problems found{lines}", diags.len())
            }
            _ => e.to_string(),
        };
        fail(EXIT_INVALID, anyhow::anyhow!("{}: {text}", path.display()))
    })
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        _ => EXIT_SOLVER,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    scenario: &Path,
    mode: ModeArg,
    sessions: Option<Vec<SessionId>>,
    out: &Path,
    gap: Option<f64>,
    time_limit: Option<f64>,
    dump_model: Option<&Path>,
) -> Result<(), Failure> {
    let s = load(scenario)?;
    let mut options = SolveOptions::default();
    if let Some(g) = gap {
        options.gap_tol = g;
    }
    if let Some(t) = time_limit {
        options.time_limit = t;
    }
    if let Some(path) = dump_model {
        let m = assemble_dam(&s).context("building the day-ahead model")?;
        std::fs::write(path, write_lp(&m.model)).with_context(|| format!("writing {}", path.display()))?;
    }
    let cfg = RunConfig {
        mode: match mode {
            ModeArg::Vpp => Mode::Vpp,
            ModeArg::Nocoord => Mode::Nocoord,
        },
        sessions,
        options,
        ..RunConfig::default()
    };
    let result = run(&s, &cfg).map_err(|e| {
        let code = match e {
            OrchestratorError::Sessions(_) => EXIT_USAGE,
            OrchestratorError::InvalidScenario(_) => EXIT_INVALID,
            _ => EXIT_SOLVER,
        };
        fail(code, e.into())
    })?;
    let report = Report::from_run(&result);
    emit_report(&report, out).with_context(|| format!("writing report to {}", out.display()))?;

    for r in &result.sessions {
        println!(
            "{:<5} {:<10} objective {:>14.2}  profit {:>14.2}{}",
            r.session.to_string(),
            format!("{:?}", r.status).to_lowercase(),
            r.objective,
            r.profit,
            if r.held { "  (held)" } else { "" }
        );
    }
    println!("total profit {:.2}", result.profit.total);
    println!("report written to {}", out.display());

    if let Some(f) = &result.failure {
        return Err(fail(
            status_code(f.status),
            anyhow::anyhow!("session {} failed: {}", f.session, f.message),
        ));
    }
    if !report.verify.checks.is_empty() {
        return Err(fail(
            EXIT_SOLVER,
            anyhow::anyhow!("post-hoc checks failed:\n  {}", report.verify.checks.join("\n  ")),
        ));
    }
    Ok(())
}

fn write_thresholds(path: &Path, t: &Threshold) -> anyhow::Result<()> {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    let text = format!(
        "demandId,profileId,threshold,rejectedAt,resolution,exactValueGap,downwardClosed,evaluations\n{},{},{},{},{:.6},{:.6},{},{}\n",
        t.demand,
        t.profile,
        opt(t.threshold),
        opt(t.rejected_at),
        t.resolution,
        t.exact,
        t.downward_closed,
        t.evaluations
    );
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_sweep(scenario: &Path, demand: &str, profile: &str, max: f64, step: f64, out: &Path) -> Result<(), Failure> {
    if !(max > 0.0 && step > 0.0 && max.is_finite()) {
        return Err(fail(EXIT_USAGE, anyhow::anyhow!("--max and --step must be positive")));
    }
    let s = load(scenario)?;
    let t = profile_threshold(&s, demand, profile, max, step, &SolveOptions::default()).map_err(|e| {
        let code = match e {
            OrchestratorError::Solve(_) | OrchestratorError::Formulation(_) => EXIT_SOLVER,
            _ => EXIT_INVALID,
        };
        fail(code, e.into())
    })?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_thresholds(&out.join("thresholds.csv"), &t)?;
    match t.threshold {
        Some(v) => println!("{demand}/{profile}: chosen up to {v:.3} (resolution {step})"),
        None => println!("{demand}/{profile}: never chosen in [-{max}, {max}]"),
    }
    println!("value of the profile at zero cost: {:.6}", t.exact);
    if !t.downward_closed {
        eprintln!("warning: selection is not downward closed on the check grid");
    }
    Ok(())
}

fn cmd_validate(scenario: &Path) -> Result<(), Failure> {
    let s = load(scenario)?;
    println!(
        "{}: ok ({} periods, {} buses, {} intraday sessions)",
        scenario.display(),
        s.periods(),
        s.network.buses.len(),
        s.calendar.sessions.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            mode,
            sessions,
            out,
            gap,
            time_limit,
            dump_model,
        } => cmd_run(&scenario, mode, sessions, &out, gap, time_limit, dump_model.as_deref()),
        Command::Sweep {
            scenario,
            demand,
            profile,
            max,
            step,
            out,
        } => cmd_sweep(&scenario, &demand, &profile, max, step, &out),
        Command::Validate { scenario } => cmd_validate(&scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
