//! Configuration-driven command line front end.
//!
//! A run is described by a JSON document: a scenario name, a field block, an
//! initial state, a time grid, tolerance, and an output destination. The
//! binary reads it with `--config`, applies `--set key=value` overrides, and
//! executes, writing the data file plus a `<output>.manifest.json` with the
//! config echo, version, duration, diagnostics, and output digests. A sweep
//! block fans one config out into children (`_k` output suffix, one manifest
//! each) that run in parallel up to `--jobs`. `TLDL_LOG` (error, info,
//! debug) controls stderr verbosity. The process exits zero exactly when the
//! manifest was written.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bloch::{bloch_from_spinor, evolve_bloch, spinor_from_bloch, BlochState};
use crate::classical::{
    extend_howland, hamilton_flow, hamiltonian_value, spin_from_chart, Chart, ChartState,
    CouplingSplit, ExtendedState,
};
use crate::exact::{
    constant_solution, sech_spinor, tanh_spinor, ConstantFieldSolution, InState,
    SechSolutionParams, TanhSolutionParams, TransitionScenario,
};
use crate::fields::{DriveProfile, FieldConfiguration, Layout};
use crate::quantum::{
    evolve_schrodinger, second_order_residual, ComponentEq, ResidualProbe, Spinor,
};
use crate::special::{hyp2f1, lngamma, HypParams};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{scenario} run failed: {message}")]
    Scenario { scenario: &'static str, message: String },
}

fn io_err(path: &str, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_string(), source }
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Evolve,
    Bloch,
    Classical,
    Poincare,
    ExactTanh,
    ExactSech,
    Scatter,
    Compare,
}

impl Scenario {
    fn name(&self) -> &'static str {
        match self {
            Scenario::Evolve => "evolve",
            Scenario::Bloch => "bloch",
            Scenario::Classical => "classical",
            Scenario::Poincare => "poincare",
            Scenario::ExactTanh => "exact-tanh",
            Scenario::ExactSech => "exact-sech",
            Scenario::Scatter => "scatter",
            Scenario::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    fn times(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n)
            .map(|i| self.t_start + (self.t_end - self.t_start) * (i as f64 / (n - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Spinor { psi1: [f64; 2], psi2: [f64; 2] },
    Bloch { q: [f64; 3] },
    Chart { chart: Chart, q: f64, p: f64 },
    Extended { chart: Chart, q: f64, p: f64, theta: Vec<f64>, #[serde(default)] actions: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub values: Vec<f64>,
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub field: FieldConfiguration,
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub output: String,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub in_state: Option<InState>,
    #[serde(default)]
    pub split: Option<CouplingSplit>,
    #[serde(default)]
    pub n_crossings: Option<usize>,
    #[serde(default)]
    pub section_angle_index: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        self.field
            .validate()
            .map_err(|e| invalid(format!("field: {e}")))?;
        if !(self.tolerance > 1e-14 && self.tolerance < 1e-3) {
            return Err(invalid(format!(
                "tolerance {} outside the supported range (1e-14, 1e-3)",
                self.tolerance
            )));
        }
        if let Some(grid) = &self.grid {
            if grid.n_samples < 2 {
                return Err(invalid("n_samples must be at least 2"));
            }
            if !grid.t_start.is_finite() || !grid.t_end.is_finite() {
                return Err(invalid("time grid bounds must be finite"));
            }
        }
        let needs_grid = !matches!(self.scenario, Scenario::Poincare | Scenario::Scatter);
        if needs_grid && self.grid.is_none() {
            return Err(invalid(format!(
                "the {} scenario needs a grid block",
                self.scenario.name()
            )));
        }
        match self.scenario {
            Scenario::Evolve | Scenario::Bloch | Scenario::Compare => {
                if self.initial.is_none() {
                    return Err(invalid("an initial state block is required"));
                }
                if matches!(self.initial, Some(InitialState::Extended { .. })) {
                    return Err(invalid("extended initial states apply only to poincare"));
                }
            }
            Scenario::Classical => match self.initial {
                Some(InitialState::Chart { .. }) => {}
                _ => return Err(invalid("classical runs take a chart initial state")),
            },
            Scenario::Poincare => {
                match self.initial {
                    Some(InitialState::Chart { .. }) | Some(InitialState::Extended { .. }) => {}
                    _ => {
                        return Err(invalid(
                            "poincare runs take a chart or extended initial state",
                        ))
                    }
                }
                match self.n_crossings {
                    Some(n) if n >= 1 => {}
                    _ => return Err(invalid("poincare runs need n_crossings >= 1")),
                }
            }
            Scenario::ExactTanh | Scenario::ExactSech => {
                if self.initial.is_none() {
                    return Err(invalid("an initial state block is required"));
                }
                if matches!(self.initial, Some(InitialState::Extended { .. })) {
                    return Err(invalid("extended initial states apply only to poincare"));
                }
            }
            Scenario::Scatter => {
                if self.initial.is_some() {
                    return Err(invalid("scatter runs take no initial state"));
                }
            }
        }
        let closed_form = matches!(
            self.scenario,
            Scenario::ExactTanh | Scenario::ExactSech | Scenario::Scatter | Scenario::Compare
        );
        if closed_form {
            if self.field.layout != Layout::ZDrive {
                return Err(invalid("closed-form scenarios require the z-drive layout"));
            }
            let profile_ok = match self.scenario {
                Scenario::ExactTanh => matches!(self.field.profile, DriveProfile::Tanh { .. }),
                Scenario::ExactSech => matches!(self.field.profile, DriveProfile::Sech { .. }),
                Scenario::Scatter => matches!(
                    self.field.profile,
                    DriveProfile::Tanh { .. } | DriveProfile::Sech { .. }
                ),
                Scenario::Compare => matches!(
                    self.field.profile,
                    DriveProfile::Constant { .. }
                        | DriveProfile::Tanh { .. }
                        | DriveProfile::Sech { .. }
                ),
                _ => true,
            };
            if !profile_ok {
                return Err(invalid(format!(
                    "the {} scenario has no closed form for this drive profile",
                    self.scenario.name()
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep needs at least one value"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "tldl",
    version,
    about = "Two-level dynamics lab: spinor, Bloch, and classical spin runs"
)]
struct Args {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value by dotted path, e.g. --set field.epsilon=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Maximum parallel sweep children.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    probe: Option<ProbeCommand>,
}

#[derive(Subcommand, Debug)]
enum ProbeCommand {
    /// Evaluate the Gauss hypergeometric function and log-gamma at a point.
    #[command(hide = true, name = "special-probe")]
    SpecialProbe {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        z_re: f64,
        #[arg(long, default_value_t = 0.0)]
        z_im: f64,
    },
}

/// Entry point used by the binary: parses `std::env::args`, runs, and maps
/// errors to a nonzero exit code.
pub fn main() -> std::process::ExitCode {
    let env = env_logger::Env::new().filter_or("TLDL_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
    match run_from(std::env::args_os()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

/// Runs the CLI against an explicit argument list.
pub fn run_from<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Parse(e.to_string())),
    };

    if let Some(ProbeCommand::SpecialProbe { a, b, c, z_re, z_im }) = args.probe {
        let z = Complex64::new(z_re, z_im);
        let params = HypParams::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
        )
        .map_err(|e| invalid(e.to_string()))?;
        match hyp2f1(&params, z) {
            Ok(f) => println!("hyp2f1 = {:.16e} {:.16e}", f.re, f.im),
            Err(e) => println!("hyp2f1 error: {e}"),
        }
        match lngamma(z) {
            Ok(lg) => println!("lngamma = {:.16e} {:.16e}", lg.re, lg.im),
            Err(e) => println!("lngamma error: {e}"),
        }
        return Ok(());
    }

    let config_path = args
        .config
        .ok_or_else(|| invalid("--config <path> is required"))?;
    let path_str = config_path.display().to_string();
    let text = std::fs::read_to_string(&config_path).map_err(|e| io_err(&path_str, e))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{path_str}: {e}")))?;
    apply_sets(&mut value, &args.set)?;

    match expand_sweep(&value)? {
        None => {
            run_single(value)?;
            Ok(())
        }
        Some(children) => {
            let summaries = run_children(children, args.jobs.max(1))?;
            let outputs: Vec<Value> = summaries
                .iter()
                .flat_map(|s| s.outputs.iter())
                .map(|(p, d)| json!({ "path": p, "sha256": d }))
                .collect();
            let n = summaries.len();
            let parent_output = value
                .get("output")
                .and_then(Value::as_str)
                .unwrap_or("sweep")
                .to_string();
            let manifest = json!({
                "config": value,
                "version": env!("CARGO_PKG_VERSION"),
                "duration_seconds": summaries.iter().map(|s| s.duration).sum::<f64>(),
                "diagnostics": { "children": n },
                "outputs": outputs,
            });
            write_manifest(&parent_output, &manifest)?;
            log::info!("sweep finished: {n} children");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Overrides and sweeps
// ---------------------------------------------------------------------------

fn parse_override(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| invalid(format!("config path '{path}' does not reach an object")))?;
        if i + 1 == parts.len() {
            map.insert((*key).to_string(), new);
            return Ok(());
        }
        node = map
            .get_mut(*key)
            .ok_or_else(|| invalid(format!("config path '{path}' not found")))?;
    }
    Err(invalid(format!("empty config path '{path}'")))
}

fn get_path<'v>(root: &'v Value, path: &str) -> Option<&'v Value> {
    let mut node = root;
    for key in path.split('.') {
        node = node.as_object()?.get(key)?;
    }
    Some(node)
}

fn apply_sets(value: &mut Value, sets: &[String]) -> Result<(), CliError> {
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| invalid(format!("--set needs KEY=VALUE, got '{s}'")))?;
        set_path(value, key, parse_override(raw))?;
    }
    Ok(())
}

fn suffixed_output(output: &str, k: usize) -> String {
    let path = Path::new(output);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(output);
    let ext = path.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(e) => format!("{stem}_{k}.{e}"),
        None => format!("{stem}_{k}"),
    };
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.join(name).display().to_string(),
        _ => name,
    }
}

/// Expands a sweep block into child configs (sweep key removed, parameter
/// substituted, output suffixed with the value index).
fn expand_sweep(value: &Value) -> Result<Option<Vec<Value>>, CliError> {
    let sweep = match value.get("sweep") {
        Some(s) if !s.is_null() => s,
        _ => return Ok(None),
    };
    let block: SweepBlock = serde_json::from_value(sweep.clone())
        .map_err(|e| CliError::Parse(format!("sweep block: {e}")))?;
    if block.values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    match get_path(value, &block.parameter) {
        Some(Value::Number(_)) => {}
        Some(_) => {
            return Err(invalid(format!(
                "sweep parameter '{}' is not a scalar",
                block.parameter
            )))
        }
        None => {
            return Err(invalid(format!(
                "sweep parameter '{}' does not exist",
                block.parameter
            )))
        }
    }
    let output = value
        .get("output")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("sweep config needs a string output path"))?
        .to_string();
    let mut children = Vec::with_capacity(block.values.len());
    for (k, v) in block.values.iter().enumerate() {
        let mut child = value.clone();
        child.as_object_mut().unwrap().remove("sweep");
        let num = serde_json::Number::from_f64(*v)
            .ok_or_else(|| invalid(format!("sweep value {v} is not a finite number")))?;
        set_path(&mut child, &block.parameter, Value::Number(num))?;
        set_path(&mut child, "output", Value::String(suffixed_output(&output, k)))?;
        children.push(child);
    }
    Ok(Some(children))
}

struct ChildSummary {
    outputs: Vec<(String, String)>,
    duration: f64,
}

fn run_children(children: Vec<Value>, jobs: usize) -> Result<Vec<ChildSummary>, CliError> {
    let n = children.len();
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ChildSummary, CliError>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = run_single(children[i].clone());
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    let mut summaries = Vec::with_capacity(n);
    for slot in slots {
        summaries.push(slot.into_inner().unwrap().expect("sweep worker finished")?);
    }
    Ok(summaries)
}

// ---------------------------------------------------------------------------
// Single run execution
// ---------------------------------------------------------------------------

/// One table cell.
enum Cell {
    F(f64),
    I(usize),
    S(&'static str),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => (*s).to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => json!(x),
            Cell::I(n) => json!(n),
            Cell::S(s) => json!(s),
        }
    }
}

struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render_json(table: &Table, scenario: Scenario) -> String {
    let data: Vec<Value> = table
        .rows
        .iter()
        .map(|row| Value::Array(row.iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({
        "meta": {
            "scenario": scenario.name(),
            "columns": table.columns,
            "version": env!("CARGO_PKG_VERSION"),
        },
        "data": data,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
    text.push('\n');
    text
}

fn write_manifest(output: &str, manifest: &Value) -> Result<String, CliError> {
    let path = format!("{output}.manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Parses, validates, executes, and writes one run plus its manifest.
/// Returns the emitted data files and their digests.
fn run_single(value: Value) -> Result<ChildSummary, CliError> {
    let cfg: RunConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Parse(e.to_string()))?;
    cfg.validate()?;
    log::info!("running {} -> {}", cfg.scenario.name(), cfg.output);
    let started = Instant::now();
    let (table, diagnostics) = execute(&cfg)?;

    let body = match cfg.format {
        OutputFormat::Csv => render_csv(&table),
        OutputFormat::Json => render_json(&table, cfg.scenario),
    };
    if let Some(parent) = Path::new(&cfg.output).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| io_err(&parent.display().to_string(), e))?;
        }
    }
    std::fs::write(&cfg.output, body.as_bytes()).map_err(|e| io_err(&cfg.output, e))?;
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    log::debug!("wrote {} ({} rows, sha256 {digest})", cfg.output, table.rows.len());

    let duration = started.elapsed().as_secs_f64();
    let manifest = json!({
        "config": value,
        "version": env!("CARGO_PKG_VERSION"),
        "duration_seconds": duration,
        "diagnostics": diagnostics,
        "outputs": [ { "path": cfg.output, "sha256": digest } ],
    });
    write_manifest(&cfg.output, &manifest)?;
    Ok(ChildSummary { outputs: vec![(cfg.output.clone(), digest)], duration })
}

fn scenario_err(scenario: Scenario, e: impl std::fmt::Display) -> CliError {
    CliError::Scenario { scenario: scenario.name(), message: e.to_string() }
}

fn initial_spinor(cfg: &RunConfig) -> Result<Spinor, CliError> {
    let sc = cfg.scenario;
    match cfg.initial.as_ref().expect("validated") {
        InitialState::Spinor { psi1, psi2 } => Ok(Spinor::new(
            Complex64::new(psi1[0], psi1[1]),
            Complex64::new(psi2[0], psi2[1]),
        )),
        InitialState::Bloch { q } => {
            spinor_from_bloch(&BlochState { q0: 1.0, q: *q }).map_err(|e| scenario_err(sc, e))
        }
        InitialState::Chart { chart, q, p } => {
            let state = ChartState::new(*chart, *q, *p).map_err(|e| scenario_err(sc, e))?;
            spinor_from_bloch(&BlochState { q0: 1.0, q: spin_from_chart(&state) })
                .map_err(|e| scenario_err(sc, e))
        }
        InitialState::Extended { .. } => unreachable!("validation rejects this"),
    }
}

fn initial_bloch(cfg: &RunConfig) -> Result<BlochState, CliError> {
    let sc = cfg.scenario;
    match cfg.initial.as_ref().expect("validated") {
        InitialState::Spinor { .. } => {
            let psi = initial_spinor(cfg)?;
            bloch_from_spinor(&psi).map_err(|e| scenario_err(sc, e))
        }
        InitialState::Bloch { q } => Ok(BlochState { q0: 1.0, q: *q }),
        InitialState::Chart { chart, q, p } => {
            let state = ChartState::new(*chart, *q, *p).map_err(|e| scenario_err(sc, e))?;
            Ok(BlochState { q0: 1.0, q: spin_from_chart(&state) })
        }
        InitialState::Extended { .. } => unreachable!("validation rejects this"),
    }
}

fn spinor_row(t: f64, psi: &Spinor) -> Vec<Cell> {
    vec![
        Cell::F(t),
        Cell::F(psi.psi1.re),
        Cell::F(psi.psi1.im),
        Cell::F(psi.psi2.re),
        Cell::F(psi.psi2.im),
        Cell::F(psi.norm()),
    ]
}

const SPINOR_COLUMNS: &[&str] = &["t", "psi1_re", "psi1_im", "psi2_re", "psi2_im", "norm"];

/// Closed-form solution matched to an initial spinor.
enum ClosedForm {
    Constant(ConstantFieldSolution),
    Tanh(TanhSolutionParams),
    Sech(SechSolutionParams),
}

impl ClosedForm {
    fn spinor(&self, t: f64) -> Result<Spinor, String> {
        match self {
            ClosedForm::Constant(sol) => Ok(constant_solution(sol, t)),
            ClosedForm::Tanh(p) => tanh_spinor(p, t).map_err(|e| e.to_string()),
            ClosedForm::Sech(p) => sech_spinor(p, t).map_err(|e| e.to_string()),
        }
    }
}

/// Solves the 2x2 system that expresses the target spinor in the basis of
/// the two closed-form solutions with weights (1, 0) and (0, 1).
fn fit_weights(a: Spinor, b: Spinor, target: &Spinor) -> (Complex64, Complex64) {
    let det = a.psi1 * b.psi2 - b.psi1 * a.psi2;
    (
        (target.psi1 * b.psi2 - b.psi1 * target.psi2) / det,
        (a.psi1 * target.psi2 - target.psi1 * a.psi2) / det,
    )
}

fn closed_form_for(cfg: &RunConfig, psi0: &Spinor, t0: f64) -> Result<ClosedForm, CliError> {
    let sc = cfg.scenario;
    let eps = cfg.field.epsilon;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match cfg.field.profile {
        DriveProfile::Constant { f0 } => {
            let pa = ConstantFieldSolution::new(eps, f0, one, zero);
            let pb = ConstantFieldSolution::new(eps, f0, zero, one);
            let (cp, cq) = fit_weights(
                constant_solution(&pa, t0),
                constant_solution(&pb, t0),
                psi0,
            );
            Ok(ClosedForm::Constant(ConstantFieldSolution::new(eps, f0, cp, cq)))
        }
        DriveProfile::Tanh { f0, f1, t_scale } => {
            let base = TanhSolutionParams { f0, f1, t_scale, epsilon: eps, c1: one, c2: zero };
            let ua = tanh_spinor(&base, t0).map_err(|e| scenario_err(sc, e))?;
            let ub = tanh_spinor(&TanhSolutionParams { c1: zero, c2: one, ..base }, t0)
                .map_err(|e| scenario_err(sc, e))?;
            let (c1, c2) = fit_weights(ua, ub, psi0);
            Ok(ClosedForm::Tanh(TanhSolutionParams { c1, c2, ..base }))
        }
        DriveProfile::Sech { f0, t_scale } => {
            let base = SechSolutionParams { f0, t_scale, epsilon: eps, c1: one, c2: zero };
            let ua = sech_spinor(&base, t0).map_err(|e| scenario_err(sc, e))?;
            let ub = sech_spinor(&SechSolutionParams { c1: zero, c2: one, ..base }, t0)
                .map_err(|e| scenario_err(sc, e))?;
            let (c1, c2) = fit_weights(ua, ub, psi0);
            Ok(ClosedForm::Sech(SechSolutionParams { c1, c2, ..base }))
        }
        _ => Err(invalid("no closed form for this drive profile")),
    }
}

fn execute(cfg: &RunConfig) -> Result<(Table, Value), CliError> {
    let sc = cfg.scenario;
    match sc {
        Scenario::Evolve => {
            let grid = cfg.grid.as_ref().expect("validated");
            let psi0 = initial_spinor(cfg)?;
            let traj = evolve_schrodinger(
                &cfg.field,
                psi0,
                grid.t_start,
                grid.t_end,
                cfg.tolerance,
            )
            .map_err(|e| scenario_err(sc, e))?;
            let times = grid.times();
            let rows = times
                .iter()
                .map(|&t| spinor_row(t, &traj.eval(t)))
                .collect();
            let mut diag = json!({
                "norm_drift": traj.norm_drift,
                "accepted_steps": traj.accepted_steps,
                "rejected_steps": traj.rejected_steps,
            });
            if cfg.field.layout == Layout::ZDrive {
                let probe_fn = |t: f64| traj.eval(t).psi1;
                let probe = ResidualProbe::Sampled(&probe_fn);
                let span = grid.t_end - grid.t_start;
                let mut max_res = 0.0f64;
                for k in 1..=32 {
                    let t = grid.t_start + span * (k as f64 / 33.0);
                    let r = second_order_residual(&probe, &cfg.field, t, ComponentEq::First);
                    max_res = max_res.max(r.norm());
                }
                diag["max_psi1_residual"] = json!(max_res);
            }
            Ok((Table { columns: SPINOR_COLUMNS, rows }, diag))
        }
        Scenario::Bloch => {
            let grid = cfg.grid.as_ref().expect("validated");
            let q0 = initial_bloch(cfg)?;
            let traj = evolve_bloch(&cfg.field, &q0, grid.t_start, grid.t_end, cfg.tolerance)
                .map_err(|e| scenario_err(sc, e))?;
            let rows = grid
                .times()
                .iter()
                .map(|&t| {
                    let q = traj.eval(t);
                    vec![Cell::F(t), Cell::F(q[0]), Cell::F(q[1]), Cell::F(q[2])]
                })
                .collect();
            let diag = json!({
                "radius_drift": traj.radius_drift,
                "accepted_steps": traj.accepted_steps,
                "rejected_steps": traj.rejected_steps,
            });
            Ok((Table { columns: &["t", "Q1", "Q2", "Q3"], rows }, diag))
        }
        Scenario::Classical => {
            let grid = cfg.grid.as_ref().expect("validated");
            let s0 = match cfg.initial.as_ref().expect("validated") {
                InitialState::Chart { chart, q, p } => {
                    ChartState::new(*chart, *q, *p).map_err(|e| scenario_err(sc, e))?
                }
                _ => unreachable!("validation rejects this"),
            };
            let traj = hamilton_flow(&cfg.field, &s0, grid.t_start, grid.t_end, cfg.tolerance)
                .map_err(|e| scenario_err(sc, e))?;
            let rows = grid
                .times()
                .iter()
                .map(|&t| {
                    let s = traj.eval(t);
                    let energy = hamiltonian_value(&s, cfg.field.field_at(t));
                    vec![Cell::F(t), Cell::F(s.q), Cell::F(s.p), Cell::F(energy)]
                })
                .collect();
            let diag = json!({
                "pole_crossings": traj.pole_crossings,
                "accepted_steps": traj.accepted_steps,
                "rejected_steps": traj.rejected_steps,
            });
            Ok((Table { columns: &["t", "q", "p", "energy"], rows }, diag))
        }
        Scenario::Poincare => {
            let (base, theta, actions) = match cfg.initial.as_ref().expect("validated") {
                InitialState::Chart { chart, q, p } => (
                    ChartState::new(*chart, *q, *p).map_err(|e| scenario_err(sc, e))?,
                    None,
                    Vec::new(),
                ),
                InitialState::Extended { chart, q, p, theta, actions } => (
                    ChartState::new(*chart, *q, *p).map_err(|e| scenario_err(sc, e))?,
                    Some(theta.clone()),
                    actions.clone(),
                ),
                _ => unreachable!("validation rejects this"),
            };
            let split = cfg.split.unwrap_or(CouplingSplit::StrongCoupling);
            let sys = extend_howland(&cfg.field, base.chart, split)
                .map_err(|e| scenario_err(sc, e))?;
            let theta = theta.unwrap_or_else(|| vec![0.0; sys.arity()]);
            let s0 = ExtendedState { base, theta, actions };
            let n = cfg.n_crossings.expect("validated");
            let idx = cfg.section_angle_index.unwrap_or(0);
            let points = sys
                .poincare_section(&s0, n, idx, cfg.tolerance)
                .map_err(|e| scenario_err(sc, e))?;
            let rows = points
                .iter()
                .enumerate()
                .map(|(k, pt)| {
                    vec![Cell::F(pt.q), Cell::F(pt.p), Cell::F(pt.theta2), Cell::I(k)]
                })
                .collect();
            let diag = json!({ "n_crossings": n, "section_angle_index": idx });
            Ok((Table { columns: &["q", "p", "theta2", "crossing_index"], rows }, diag))
        }
        Scenario::ExactTanh | Scenario::ExactSech => {
            let grid = cfg.grid.as_ref().expect("validated");
            let psi0 = initial_spinor(cfg)?;
            let form = closed_form_for(cfg, &psi0, grid.t_start)?;
            let times = grid.times();
            let mut rows = Vec::with_capacity(times.len());
            for &t in &times {
                let psi = form.spinor(t).map_err(|e| scenario_err(sc, e))?;
                rows.push(spinor_row(t, &psi));
            }
            let mut max_res = 0.0f64;
            match &form {
                ClosedForm::Tanh(p) => {
                    let f = |t: f64| crate::exact::tanh_solution_with_derivatives(p, t)
                        .expect("evaluated on this grid already");
                    for &t in &times {
                        let r = second_order_residual(
                            &ResidualProbe::Analytic(&f),
                            &cfg.field,
                            t,
                            ComponentEq::First,
                        );
                        max_res = max_res.max(r.norm());
                    }
                }
                ClosedForm::Sech(p) => {
                    let f = |t: f64| crate::exact::sech_solution_with_derivatives(p, t)
                        .expect("evaluated on this grid already");
                    for &t in &times {
                        let r = second_order_residual(
                            &ResidualProbe::Analytic(&f),
                            &cfg.field,
                            t,
                            ComponentEq::First,
                        );
                        max_res = max_res.max(r.norm());
                    }
                }
                ClosedForm::Constant(_) => {}
            }
            let diag = json!({ "max_psi1_residual": max_res });
            Ok((Table { columns: SPINOR_COLUMNS, rows }, diag))
        }
        Scenario::Scatter => {
            let scenario = match cfg.field.profile {
                DriveProfile::Tanh { f0, f1, t_scale } => TransitionScenario::Tanh {
                    f0,
                    f1,
                    t_scale,
                    epsilon: cfg.field.epsilon,
                },
                DriveProfile::Sech { f0, t_scale } => TransitionScenario::Sech {
                    f0,
                    t_scale,
                    epsilon: cfg.field.epsilon,
                },
                _ => unreachable!("validation rejects this"),
            };
            let states: Vec<InState> = match cfg.in_state {
                Some(s) => vec![s],
                None => vec![InState::Lower, InState::Upper],
            };
            let mut rows = Vec::new();
            let mut worst_sum = 0.0f64;
            for st in states {
                let (trans, survival) = crate::exact::scattering_outcome(&scenario, st)
                    .map_err(|e| scenario_err(sc, e))?;
                worst_sum = worst_sum.max((trans + survival - 1.0).abs());
                let label = match st {
                    InState::Lower => "lower",
                    InState::Upper => "upper",
                };
                rows.push(vec![Cell::S(label), Cell::F(trans), Cell::F(survival)]);
            }
            let diag = json!({ "max_probability_defect": worst_sum });
            Ok((
                Table { columns: &["in_state", "p_transition", "p_survival"], rows },
                diag,
            ))
        }
        Scenario::Compare => {
            let grid = cfg.grid.as_ref().expect("validated");
            let psi0 = initial_spinor(cfg)?;
            let traj = evolve_schrodinger(
                &cfg.field,
                psi0,
                grid.t_start,
                grid.t_end,
                cfg.tolerance,
            )
            .map_err(|e| scenario_err(sc, e))?;
            let form = closed_form_for(cfg, &psi0, grid.t_start)?;
            let times = grid.times();
            let mut pairs = Vec::with_capacity(times.len());
            let mut max_err = 0.0f64;
            let mut sum_err = 0.0f64;
            for &t in &times {
                let exact = form.spinor(t).map_err(|e| scenario_err(sc, e))?.psi1;
                let numeric = traj.eval(t).psi1;
                let err = (exact - numeric).norm();
                max_err = max_err.max(err);
                sum_err += err;
                pairs.push((t, exact, numeric, err));
            }
            let mean_err = sum_err / times.len() as f64;
            let rows = pairs
                .into_iter()
                .map(|(t, e, n, err)| {
                    vec![
                        Cell::F(t),
                        Cell::F(e.re),
                        Cell::F(e.im),
                        Cell::F(n.re),
                        Cell::F(n.im),
                        Cell::F(err),
                        Cell::F(max_err),
                        Cell::F(mean_err),
                    ]
                })
                .collect();
            let diag = json!({
                "max_abs_err": max_err,
                "mean_abs_err": mean_err,
                "norm_drift": traj.norm_drift,
                "accepted_steps": traj.accepted_steps,
                "rejected_steps": traj.rejected_steps,
            });
            Ok((
                Table {
                    columns: &[
                        "t",
                        "exact_re",
                        "exact_im",
                        "numeric_re",
                        "numeric_im",
                        "abs_err",
                        "max_abs_err",
                        "mean_abs_err",
                    ],
                    rows,
                },
                diag,
            ))
        }
    }
}
