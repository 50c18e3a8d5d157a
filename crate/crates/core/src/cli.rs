// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! The `qslkit` command line.
//!
//! Every subcommand produces one table written in a single pass, as CSV or
//! as JSON with the same field names. Parameters can also come from a
//! `key=value` file given with `--config`; flags on the command line win.
//! Failures print one JSON error record on stderr and exit nonzero.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::QslEstimator;
use crate::error::QslError;
use crate::model::{oracle_amplitude, ModelParams, DEFAULT_LAMBDA};
use crate::quad::QuadratureSpec;
use crate::scan::{
    linear_axis, log_axis, sweep_decay_rate, Cell, Scanner, DEFAULT_CLIP, DEFAULT_TAU_D,
};
use crate::smatrix::DensityMatrix2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QSLKIT_THREADS";

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_ORACLE_MISMATCH: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qslkit", version, about = "Quantum speed limits for the damped two-level atom")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// τ_QSL/τ_D and the Λ-integrals at one parameter point.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Ratio(RatioArgs),
    /// Ratio surface over a (γ₀, Δ) grid.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Scan(GridArgs),
    /// Speed-up boundary along each detuning row of a grid.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Boundary(GridArgs),
    /// Evolved-state ratio as a function of the start time τ.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    SweepTau(SweepTauArgs),
    /// Time-dependent decay rate γ(t)/γ₀.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    DecayRate(DecayRateArgs),
    /// Trace-distance and Bures-angle ratios over a γ₀ sweep.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    CompareBounds(CompareArgs),
    /// Closed-form amplitude against direct integration of the memory equation.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuresNorm {
    /// sin²B over the operator-norm speed.
    Operator,
    /// sin²B over the trace-norm speed.
    Trace,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 40)]
    pub max_depth: u32,
}

impl QuadArgs {
    fn estimator(&self) -> Result<QslEstimator, QslError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(QslError::InvalidInput(format!("rel-tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(QslError::InvalidInput(format!("abs-tol must be non-negative, got {}", self.abs_tol)));
        }
        Ok(QslEstimator::new(QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            breakpoints: Vec::new(),
        }))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub gamma0: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, QslError> {
        ModelParams::new(self.gamma0, self.lambda, self.delta)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_TAU_D)]
    pub tau_d: f64,
    /// Start of the window; the reference state is the state at this time.
    #[arg(long, default_value_t = 0.0)]
    pub tau_start: f64,
    /// Initial pure state cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_D)]
    pub tau_d: f64,
    /// Smallest coupling (default 0.02λ); the axis is log-spaced.
    #[arg(long)]
    pub gamma0_min: Option<f64>,
    /// Largest coupling (default 20λ).
    #[arg(long)]
    pub gamma0_max: Option<f64>,
    #[arg(long, default_value_t = 60)]
    pub gamma0_points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub delta_min: f64,
    /// Largest detuning (default 10λ); the axis is linear.
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub delta_points: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl GridArgs {
    fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let l = self.lambda;
        let g = log_axis(
            self.gamma0_min.unwrap_or(0.02 * l),
            self.gamma0_max.unwrap_or(20.0 * l),
            self.gamma0_points,
        );
        let d = linear_axis(self.delta_min, self.delta_max.unwrap_or(10.0 * l), self.delta_points);
        (g, d)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepTauArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_TAU_D)]
    pub tau_d: f64,
    #[arg(long, default_value_t = 2.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecayRateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Bound on |γ/γ₀|; larger values and zeros of C are clipped and flagged.
    #[arg(long, default_value_t = DEFAULT_CLIP)]
    pub clip: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_D)]
    pub tau_d: f64,
    #[arg(long)]
    pub gamma0_min: Option<f64>,
    #[arg(long)]
    pub gamma0_max: Option<f64>,
    #[arg(long, default_value_t = 120)]
    pub gamma0_points: usize,
    /// Generator norm used in the Bures-angle column.
    #[arg(long, value_enum, default_value_t = BuresNorm::Operator)]
    pub bures_norm: BuresNorm,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    /// Largest accepted |ΔC|.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Ratio(a) => &a.out,
            Command::Scan(a) | Command::Boundary(a) => &a.out,
            Command::SweepTau(a) => &a.out,
            Command::DecayRate(a) => &a.out,
            Command::CompareBounds(a) => &a.out,
            Command::OracleCheck(a) => &a.out,
        }
    }
}

/// A failure with its exit status and machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit_code: i32,
    pub code: String,
    pub message: String,
}

impl CliError {
    fn new(exit_code: i32, code: &str, message: impl Into<String>) -> Self {
        Self { exit_code, code: code.to_string(), message: message.into() }
    }

    pub fn record(&self) -> String {
        json!({"error": {"code": self.code, "message": self.message, "exit_code": self.exit_code}}).to_string()
    }
}

impl From<QslError> for CliError {
    fn from(e: QslError) -> Self {
        let exit = match e.root() {
            QslError::InvalidInput(_) | QslError::InvalidState(_) | QslError::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CliError::new(exit, e.code(), e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Field {
    Num(f64),
    OptNum(Option<f64>),
    Int(usize),
    Text(&'static str),
    Flag(bool),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) | Field::OptNum(Some(x)) => format_float(*x),
            Field::OptNum(None) => String::new(),
            Field::Int(n) => n.to_string(),
            Field::Text(s) => s.to_string(),
            Field::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(x) | Field::OptNum(Some(x)) => json!(x),
            Field::OptNum(None) => Value::Null,
            Field::Int(n) => json!(n),
            Field::Text(s) => json!(s),
            Field::Flag(b) => json!(b),
        }
    }
}

/// Fixed 17-significant-digit rendering used for every float in CSV output.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<Field>>,
    /// Set when some rows could not be computed.
    incomplete: Option<Incomplete>,
}

#[derive(Debug, Clone, PartialEq)]
struct Incomplete {
    failed: Vec<usize>,
    total: usize,
    first_error: String,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new(), incomplete: None }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Field::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        if let Some(inc) = &self.incomplete {
            let _ = writeln!(
                s,
                "# incomplete: {} of {} rows failed; rerun rows {}",
                inc.failed.len(),
                inc.total,
                join_indices(&inc.failed)
            );
        }
        s
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.header.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("rows".into(), Value::Array(rows));
        if let Some(inc) = &self.incomplete {
            doc.insert(
                "incomplete".into(),
                json!({"failed_rows": inc.failed, "total_rows": inc.total, "first_error": inc.first_error}),
            );
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values are finite or null");
        s.push('\n');
        s
    }
}

fn join_indices(indices: &[usize]) -> String {
    indices.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn scanner(quad: &QuadArgs, threads: Option<usize>) -> Result<Scanner, CliError> {
    Ok(Scanner { estimator: quad.estimator()?, threads })
}

fn run_ratio(a: &RatioArgs) -> Result<Table, CliError> {
    let p = a.model.params()?;
    let rho0 = DensityMatrix2::pure(a.theta, a.phi)?;
    let r = a.quad.estimator()?.qsl_ratio_from(&p, &rho0, a.tau_start, a.tau_d)?;
    let mut t = Table::new(&[
        "gamma0",
        "lambda",
        "delta",
        "tau_d",
        "tau_start",
        "lambda1",
        "lambda2",
        "lambda_inf",
        "d_measure",
        "tau_qsl",
        "ratio",
        "classification",
        "ratio_bures",
        "quad_err",
        "stationary",
    ]);
    t.rows.push(vec![
        Field::Num(p.gamma0()),
        Field::Num(p.lambda()),
        Field::Num(p.delta()),
        Field::Num(r.tau_d),
        Field::Num(r.tau_start),
        Field::Num(r.lambda1),
        Field::Num(r.lambda2),
        Field::Num(r.lambda_inf),
        Field::Num(r.d_measure),
        Field::Num(r.tau_qsl),
        Field::Num(r.ratio),
        Field::Text(r.classification().as_str()),
        Field::OptNum(r.comparator_ratio),
        Field::Num(r.quadrature_err),
        Field::Flag(r.stationary),
    ]);
    Ok(t)
}

fn run_scan(a: &GridArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let (g, d) = a.axes();
    let grid = scanner(&a.quad, threads)?.grid_scan(&g, &d, a.lambda, a.tau_d)?;
    let mut t = Table::new(&["gamma0", "delta", "lambda", "tau_d", "ratio", "classification", "quad_err"]);
    let mut failed = Vec::new();
    let mut first_error = None;
    for (k, (gamma0, delta, cell)) in grid.iter().enumerate() {
        let (ratio, class, err) = match cell {
            Cell::Done(r) => (r.ratio, r.classification().as_str(), r.quadrature_err),
            Cell::Failed(e) => {
                failed.push(k);
                first_error.get_or_insert_with(|| e.to_string());
                (f64::NAN, "failed", f64::NAN)
            }
        };
        t.rows.push(vec![
            Field::Num(gamma0),
            Field::Num(delta),
            Field::Num(grid.lambda),
            Field::Num(grid.tau_d),
            Field::Num(ratio),
            Field::Text(class),
            Field::Num(err),
        ]);
    }
    if let Some(first_error) = first_error {
        t.incomplete = Some(Incomplete { failed, total: grid.cells.len(), first_error });
    }
    Ok(t)
}

fn run_boundary(a: &GridArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let (g, d) = a.axes();
    let s = scanner(&a.quad, threads)?;
    let grid = s.grid_scan(&g, &d, a.lambda, a.tau_d)?;
    let points = s.transition_boundary(&grid)?;
    let mut t = Table::new(&["delta", "gamma0_boundary", "flip_index"]);
    for b in points {
        t.rows.push(vec![Field::Num(b.delta), Field::Num(b.gamma0), Field::Int(b.flip_index)]);
    }
    let failures = grid.failures();
    if failures > 0 {
        let failed: Vec<usize> =
            grid.cells.iter().enumerate().filter(|(_, c)| matches!(c, Cell::Failed(_))).map(|(k, _)| k).collect();
        let first_error = grid
            .cells
            .iter()
            .find_map(|c| match c {
                Cell::Failed(e) => Some(e.to_string()),
                Cell::Done(_) => None,
            })
            .unwrap_or_default();
        t.incomplete = Some(Incomplete { failed, total: grid.cells.len(), first_error });
    }
    Ok(t)
}

fn run_sweep_tau(a: &SweepTauArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let p = a.model.params()?;
    let series = scanner(&a.quad, threads)?.sweep_tau(&p, a.tau_max, a.points, a.tau_d)?;
    let mut t = Table::new(&["tau", "ratio"]);
    for (tau, r) in series.times.iter().zip(&series.values) {
        t.rows.push(vec![Field::Num(*tau), Field::Num(*r)]);
    }
    Ok(t)
}

fn run_decay_rate(a: &DecayRateArgs) -> Result<Table, CliError> {
    let p = a.model.params()?;
    let series = sweep_decay_rate(&p, a.t_max, a.points, a.clip)?;
    let mut t = Table::new(&["t", "gamma_over_gamma0", "clipped"]);
    for k in 0..series.len() {
        t.rows.push(vec![
            Field::Num(series.times[k]),
            Field::Num(series.values[k]),
            Field::Flag(series.clipped[k]),
        ]);
    }
    Ok(t)
}

fn run_compare(a: &CompareArgs, threads: Option<usize>) -> Result<Table, CliError> {
    let l = a.lambda;
    let g = log_axis(a.gamma0_min.unwrap_or(0.02 * l), a.gamma0_max.unwrap_or(20.0 * l), a.gamma0_points);
    let rows = scanner(&a.quad, threads)?.compare_bounds(&g, l, a.delta, a.tau_d)?;
    let mut t = Table::new(&["gamma0", "ratio_trace", "ratio_bures"]);
    for r in rows {
        let bures = match a.bures_norm {
            BuresNorm::Operator => r.ratio_bures,
            BuresNorm::Trace => r.ratio_bures_weighted,
        };
        t.rows.push(vec![Field::Num(r.gamma0), Field::Num(r.ratio_trace), Field::Num(bures)]);
    }
    Ok(t)
}

fn run_oracle(a: &OracleArgs) -> Result<(Table, bool), CliError> {
    let p = a.model.params()?;
    let sampled = oracle_amplitude(&p, a.t_max, a.step)?;
    let (mut worst, mut at) = (0.0f64, 0.0);
    for (t, c) in sampled.iter() {
        let err = (c - p.amplitude(t)?.c).norm();
        if err > worst {
            worst = err;
            at = t;
        }
    }
    let passed = worst < a.tolerance;
    let mut t = Table::new(&[
        "gamma0",
        "lambda",
        "delta",
        "t_max",
        "step",
        "max_abs_error",
        "t_at_max_error",
        "tolerance",
        "passed",
    ]);
    t.rows.push(vec![
        Field::Num(p.gamma0()),
        Field::Num(p.lambda()),
        Field::Num(p.delta()),
        Field::Num(a.t_max),
        Field::Num(a.step),
        Field::Num(worst),
        Field::Num(at),
        Field::Num(a.tolerance),
        Field::Flag(passed),
    ]);
    Ok((t, passed))
}

/// Reads the thread cap from the environment.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::new(EXIT_USAGE, "invalid_input", format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::new(
                EXIT_USAGE,
                "invalid_input",
                format!("{THREADS_ENV} must be a positive integer, got {v:?}"),
            )),
        },
    }
}

/// Parses a key=value file into `--key value` arguments.
///
/// Blank lines and lines starting with `#` are skipped; underscores in keys
/// are accepted in place of dashes.
pub fn config_args(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::new(
                EXIT_USAGE,
                "invalid_config",
                format!("config line {}: expected key=value, got {line:?}", n + 1),
            ));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::new(
                EXIT_USAGE,
                "invalid_config",
                format!("config line {}: invalid key {key:?}", n + 1),
            ));
        }
        out.push(format!("--{key}").into());
        out.push(value.trim().into());
    }
    Ok(out)
}

fn parse(args: &[OsString]) -> Result<RunConfig, clap::Error> {
    RunConfig::try_parse_from(args)
}

/// Value of `--config` in raw arguments, if any.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Parses arguments, merging a config file when one is named.
pub fn parse_config(args: Vec<OsString>) -> Result<RunConfig, ParseOutcome> {
    let Some(path) = config_path(&args).filter(|_| args.len() >= 2) else {
        return parse(&args).map_err(ParseOutcome::Clap);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        ParseOutcome::Error(CliError::new(EXIT_IO, "io", format!("reading config {}: {e}", path.display())))
    })?;
    let injected = config_args(&text).map_err(ParseOutcome::Error)?;
    // argv[0], the subcommand, the file's settings, then the user's flags.
    let mut merged: Vec<OsString> = args[..2].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[2..]);
    parse(&merged).map_err(ParseOutcome::Clap)
}

/// Why argument parsing did not produce a config.
#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Error(CliError),
}

/// Result of a successful run: the rendered document and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub exit_code: i32,
    /// Reported on stderr alongside a nonzero exit code.
    pub error: Option<CliError>,
}

/// Executes one parsed command without touching stdout or files.
pub fn execute(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput, CliError> {
    let format = config.command.output().format;
    let (table, mismatch) = match &config.command {
        Command::Ratio(a) => (run_ratio(a)?, false),
        Command::Scan(a) => (run_scan(a, threads)?, false),
        Command::Boundary(a) => (run_boundary(a, threads)?, false),
        Command::SweepTau(a) => (run_sweep_tau(a, threads)?, false),
        Command::DecayRate(a) => (run_decay_rate(a)?, false),
        Command::CompareBounds(a) => (run_compare(a, threads)?, false),
        Command::OracleCheck(a) => {
            let (t, passed) = run_oracle(a)?;
            (t, !passed)
        }
    };
    let text = table.render(format);
    let error = if let Some(inc) = &table.incomplete {
        Some(CliError::new(
            EXIT_PARTIAL,
            "incomplete",
            format!("{} of {} rows failed; first: {}", inc.failed.len(), inc.total, inc.first_error),
        ))
    } else if mismatch {
        Some(CliError::new(EXIT_ORACLE_MISMATCH, "oracle_mismatch", "oracle and closed form disagree beyond tolerance"))
    } else {
        None
    };
    let exit_code = error.as_ref().map_or(0, |e| e.exit_code);
    Ok(RunOutput { text, exit_code, error })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new(EXIT_IO, "io", format!("writing {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::new(EXIT_IO, "io", format!("writing stdout: {e}")))
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(ParseOutcome::Clap(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::new(EXIT_USAGE, "usage", e.to_string().trim_end());
            eprintln!("{}", err.record());
            return EXIT_USAGE;
        }
        Err(ParseOutcome::Error(e)) => {
            eprintln!("{}", e.record());
            return e.exit_code;
        }
    };
    let result = threads_from_env().and_then(|threads| execute(&config, threads)).and_then(|out| {
        write_output(config.command.output().output.as_deref(), &out.text)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            if let Some(e) = &out.error {
                eprintln!("{}", e.record());
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5e-7), "-2.4999999999999999e-7");
    }

    #[test]
    fn config_lines() {
        let a = config_args("# recipe\ngamma0 = 500\n\ntau_d=0.2\n").unwrap();
        assert_eq!(a, args("--gamma0 500 --tau-d 0.2"));
        assert!(config_args("gamma0").is_err());
        assert!(config_args("config=x").is_err());
    }

    #[test]
    fn flags_override_later_flags() {
        let c = parse(&args("qslkit ratio --gamma0 5 --gamma0 7")).unwrap();
        match c.command {
            Command::Ratio(r) => assert_eq!(r.model.gamma0, 7.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn csv_and_json_share_fields() {
        let mut t = Table::new(&["tau", "ratio"]);
        t.rows.push(vec![Field::Num(0.0), Field::Num(1.0)]);
        assert_eq!(t.render(Format::Csv), "tau,ratio\n0.0000000000000000e0,1.0000000000000000e0\n");
        let v: Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["ratio"], json!(1.0));
        assert_eq!(v["rows"][0]["tau"], json!(0.0));
    }

    #[test]
    fn incomplete_marker() {
        let mut t = Table::new(&["x"]);
        t.rows.push(vec![Field::Num(f64::NAN)]);
        t.incomplete = Some(Incomplete { failed: vec![0], total: 1, first_error: "boom".into() });
        assert!(t.render(Format::Csv).ends_with("# incomplete: 1 of 1 rows failed; rerun rows 0\n"));
        let v: Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["x"], Value::Null);
        assert_eq!(v["incomplete"]["failed_rows"], json!([0]));
    }

    #[test]
    fn library_errors_map_to_codes() {
        let e: CliError = QslError::InvalidInput("x".into()).into();
        assert_eq!((e.exit_code, e.code.as_str()), (EXIT_USAGE, "invalid_input"));
        let e: CliError = QslError::QuadratureFailed { a: 0.0, b: 1.0, value: 0.0, err_estimate: 1.0 }.into();
        assert_eq!((e.exit_code, e.code.as_str()), (EXIT_FAILURE, "quadrature_failed"));
        let v: Value = serde_json::from_str(&e.record()).unwrap();
        assert_eq!(v["error"]["code"], "quadrature_failed");
    }
}
