//! `repeater` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_count, parse_engine, resolve_config_path, ConfigError, Engine, ExperimentConfig,
};
use crate::experiments::{
    run_distance_optimization, run_hardware_heatmap, run_lambda_sweep, run_one_shot, run_stream,
    ExperimentError,
};
use crate::output::{format_sig, SweepResult, COLUMNS};
use crate::validation::{run_validation, ValidationPlan};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "repeater",
    version,
    about = "Fidelity and secret-key-rate studies of quantum repeater chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single request through an idle chain
    OneShot(Common),
    /// Poisson request stream at `workload.lambda`
    Stream(Common),
    /// Fidelity and key rate over the arrival-rate grid
    SweepLambda(Common),
    /// Best repeater count and key rate versus distance
    OptimizeDistance(Common),
    /// Best key rate over coherence time and gate fidelity
    Heatmap(Common),
    /// Cross-check closed forms against simulation
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file (`key = value` lines); relative paths also looked up in $REPEATER_CONFIG_DIR
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_parser = parse_trials)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = |s: &str| parse_engine("--engine", s).map_err(|e| e.message))]
    pub engine: Option<Engine>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// CSV output path; without it the table goes to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also emit JSON (next to `--out`, or instead of CSV on stdout)
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Smaller sample sizes; relative-error tolerances are reported, not enforced
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the report and YQF findings here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_trials(s: &str) -> Result<u64, String> {
    match parse_count("--trials", s) {
        Ok(0) => Err("must be >= 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.message),
    }
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(c) => Failure::Usage(c),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn load_config(c: &Common) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match resolve_config_path(c.config.as_deref()) {
        Some(p) => ExperimentConfig::load(&p)?,
        None => ExperimentConfig::default(),
    };
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::new("--set", format!("expected KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(n) = c.trials {
        cfg.sim.trials = n;
        cfg.sim.requests = n;
    }
    if let Some(s) = c.seed {
        cfg.sim.seed = s;
    }
    if let Some(e) = c.engine {
        cfg.engine = e;
    }
    if let Some(l) = c.lambda {
        cfg.set("workload.lambda", &l.to_string())?;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Aligned table of the columns that carry a value in some row.
pub fn render_table(result: &SweepResult) -> String {
    let csv = result.to_csv_string();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| {
            r.expect("own output parses")
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .map(|x| format_sig(x, 6))
                        .unwrap_or_else(|_| c.to_string())
                })
                .collect()
        })
        .collect();
    let used: Vec<usize> = (0..COLUMNS.len())
        .filter(|&i| rows.iter().any(|r| !r[i].is_empty()))
        .collect();
    let width = |i: usize| {
        rows.iter()
            .map(|r| r[i].len())
            .chain([COLUMNS[i].len()])
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = used.iter().map(|&i| width(i)).collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&line(used.iter().map(|&i| COLUMNS[i]).collect()));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(used.iter().map(|&i| r[i].as_str()).collect()));
        out.push('\n');
    }
    out
}

fn emit(
    result: &SweepResult,
    cfg: &ExperimentConfig,
    json: bool,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let write = |path: &Path, text: &str| std::fs::write(path, text).map_err(|e| io_err(path, e));
    match &cfg.output {
        Some(path) => {
            write(path, &result.to_csv_string())?;
            if json {
                write(&path.with_extension("json"), &result.to_json())?;
            }
            let _ = write!(stdout, "{}", render_table(result));
            let _ = writeln!(
                stdout,
                "wrote {} rows to {}",
                result.rows.len(),
                path.display()
            );
        }
        None if json => {
            let _ = writeln!(stdout, "{}", result.to_json());
        }
        None => {
            let _ = write!(stdout, "{}", result.to_csv_string());
        }
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (common, run): (
        Common,
        fn(&ExperimentConfig) -> crate::experiments::Result<SweepResult>,
    ) = match cli.command {
        Command::OneShot(c) => (c, run_one_shot),
        Command::Stream(c) => (c, run_stream),
        Command::SweepLambda(c) => (c, run_lambda_sweep),
        Command::OptimizeDistance(c) => (c, run_distance_optimization),
        Command::Heatmap(c) => (c, run_hardware_heatmap),
        Command::Validate(v) => return validate(v, stdout),
    };
    let cfg = load_config(&common)?;
    let result = run(&cfg)?;
    emit(&result, &cfg, common.json, stdout)?;
    Ok(0)
}

fn validate(args: ValidateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let plan = if args.quick {
        ValidationPlan::quick(args.seed)
    } else {
        ValidationPlan::full(args.seed)
    };
    let report = run_validation(&plan)?;
    let text = format!("{}\n{}", report.render(), report.findings());
    if let Some(path) = &args.out {
        std::fs::write(path, &text).map_err(|e| io_err(path, e))?;
    }
    let _ = write!(stdout, "{text}");
    Ok(if report.passed() { 0 } else { EXIT_RUNTIME })
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => {
            if code != 0 {
                let _ = writeln!(stderr, "error: validation failed");
            }
            code
        }
        Err(Failure::Usage(e)) => {
            let _ = writeln!(stderr, "error: {e}\n\nRun `repeater --help` for usage.");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}
