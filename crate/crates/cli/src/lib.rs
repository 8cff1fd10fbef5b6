//! Command-line harness for compwave: every subcommand resolves a
//! configuration, writes its artifacts to `runs/<run_id>/` and prints a
//! one-line JSON verdict.
//!
//! Exit codes: 0 success, 1 failed check or internal error (a diagnostic
//! `error.txt` is written to the run directory), 2 usage error.

pub mod commands;
pub mod config;
pub mod rundir;
pub mod svg;
pub mod sweep;

use clap::{Args, Parser, Subcommand};
use config::{Config, ScenarioName, SweepKind};
use rundir::{runs_root, RunDir, Verdict};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "compwave", version, arg_required_else_help = true)]
#[command(about = "Traveling waves and spreading fronts of strong-weak Lotka-Volterra competition")]
pub struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root directory for run outputs [env: COMPWAVE_RUNS_DIR, default: runs].
    #[arg(long, global = true)]
    pub runs_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the sufficient conditions for linear / nonlinear selection.
    Classify(ParamArgs),
    /// Minimal wave speed and profile (or the wave at a given speed).
    Wave(WaveArgs),
    /// Integrate the PDE from smoothed-indicator initial data.
    Simulate(SimArgs),
    /// Simulate, then measure front speeds and check the spreading regime.
    Track(TrackArgs),
    /// Numerical checks of sub/super-solutions and the comparison principle.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run a command over a parameter grid in parallel.
    Sweep(SweepArgs),
    /// Render the summary of an existing run.
    Report {
        /// Run id (or a unique prefix of one).
        run_id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Choose sub/super-solution parameters and check the residual signs.
    Residuals(ResidualArgs),
    /// Find time shifts placing a simulation between the sub- and super-solution.
    Sandwich(SandwichArgs),
    /// Check that ordered initial data stay ordered.
    Cp(CpArgs),
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Bracket tolerance of the minimal-speed search.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solve at this speed instead of the minimal one.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Half-width of the initial supports.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Level set tracked as the front.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Speed-fit window start, as a fraction of t_end.
    #[arg(long)]
    pub window_from: Option<f64>,
    /// Start of the logarithmic-drift window.
    #[arg(long)]
    pub drift_from: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Multiplier in (0, 1] of the perturbation decay rate.
    #[arg(long)]
    pub mu_factor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SandwichArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Ignore snapshots before this time.
    #[arg(long)]
    pub t_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CpArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Lift of u0 in the upper configuration.
    #[arg(long)]
    pub lift: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated values of a.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ParamArgs {
    fn apply(self, c: &mut Config) {
        set(&mut c.params.a, self.a);
        set(&mut c.params.b, self.b);
        set(&mut c.params.d, self.d);
        set(&mut c.params.r, self.r);
    }
}

impl SimArgs {
    fn apply(self, c: &mut Config) {
        self.params.apply(c);
        set(&mut c.sim.scenario, self.scenario);
        set(&mut c.sim.t_end, self.t_end);
        set(&mut c.sim.h, self.h);
        if self.dt.is_some() {
            c.sim.dt = self.dt;
        }
        set(&mut c.sim.half_width, self.half_width);
        set(&mut c.sim.level, self.level);
    }
}

/// Folds the flags of a subcommand into the configuration; returns the
/// command name used for the run id.
fn resolve(cmd: Command, c: &mut Config) -> (&'static str, Option<String>) {
    match cmd {
        Command::Classify(p) => {
            p.apply(c);
            ("classify", None)
        }
        Command::Wave(w) => {
            w.params.apply(c);
            set(&mut c.wave.tol, w.tol);
            if w.c.is_some() {
                c.wave.c = w.c;
            }
            set(&mut c.wave.half_length, w.half_length);
            set(&mut c.wave.n, w.n);
            ("wave", None)
        }
        Command::Simulate(s) => {
            s.apply(c);
            ("simulate", None)
        }
        Command::Track(t) => {
            t.sim.apply(c);
            set(&mut c.track.window.0, t.window_from);
            set(&mut c.track.drift_from, t.drift_from);
            ("track", None)
        }
        Command::Verify(VerifyCommand::Residuals(v)) => {
            v.params.apply(c);
            set(&mut c.wave.tol, v.tol);
            set(&mut c.verify.mu_factor, v.mu_factor);
            ("verify-residuals", None)
        }
        Command::Verify(VerifyCommand::Sandwich(v)) => {
            v.sim.apply(c);
            set(&mut c.verify.t_min, v.t_min);
            ("verify-sandwich", None)
        }
        Command::Verify(VerifyCommand::Cp(v)) => {
            v.sim.apply(c);
            set(&mut c.verify.lift, v.lift);
            ("verify-cp", None)
        }
        Command::Sweep(s) => {
            set(&mut c.sweep.a, s.a);
            set(&mut c.sweep.b, s.b);
            set(&mut c.sweep.d, s.d);
            set(&mut c.sweep.r, s.r);
            set(&mut c.sweep.kind, s.kind);
            set(&mut c.sweep.jobs, s.jobs);
            set(&mut c.wave.tol, s.tol);
            set(&mut c.sim.t_end, s.t_end);
            set(&mut c.sim.scenario, s.scenario);
            ("sweep", None)
        }
        Command::Report { run_id } => ("report", Some(run_id)),
    }
}

/// Result of a subcommand body.
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

/// Marks errors that should exit with the usage code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let root = runs_root(cli.runs_dir.as_deref());
    let mut config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return 2;
            }
        },
        None => Config::default(),
    };
    let (name, run_id) = resolve(cli.command, &mut config);
    if let Some(id) = run_id {
        return match commands::report(&root, &id) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                2
            }
        };
    }
    if let Err(e) = commands::precheck(name, &config) {
        eprintln!("error: {e}");
        return 2;
    }
    execute(name, &config, &root)
}

fn execute(name: &str, config: &Config, root: &std::path::Path) -> i32 {
    let hash = config.hash(name);
    let mut dir = match RunDir::create(root, name, &hash) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let params = config.params().expect("checked by precheck");
    let result = dir
        .write("config.toml", &config.to_toml())
        .and_then(|_| commands::dispatch(name, config, &mut dir));
    let (verdicts, mut summary) = match result {
        Ok(o) => (o.verdicts, o.summary),
        Err(e) => {
            let text = format!("{e:?}\n");
            let _ = dir.write("error.txt", &text);
            eprintln!("error: {e:#}");
            let mut s = serde_json::Map::new();
            s.insert("error".into(), e.to_string().into());
            (vec![Verdict::new("execution", false, format!("{e:#}"))], s)
        }
    };
    let pass = verdicts.iter().all(|v| v.pass);
    let mut line = serde_json::Map::new();
    line.insert("run_id".into(), dir.id.clone().into());
    line.insert("status".into(), if pass { "pass" } else { "fail" }.into());
    line.append(&mut summary);
    let line = serde_json::Value::Object(line);
    let run_path = dir.path.clone();
    if let Err(e) = dir.finish(params, verdicts, line.clone()) {
        eprintln!("error: writing manifest in {}: {e:#}", run_path.display());
        return 1;
    }
    println!("{line}");
    if pass {
        0
    } else {
        1
    }
}
