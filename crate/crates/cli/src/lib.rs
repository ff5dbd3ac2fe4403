//! Command-line front end: argument parsing, subcommand runners and the
//! CSV/JSON writers.
//!
//! Every subcommand writes one primary table. With `--out path.csv`,
//! `decay` also writes `path.bounds.csv` and `supdecay` writes
//! `path.trend.csv`; in JSON mode these tables are embedded instead.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use kwidth_core::bounds::{self, arctan_upper, relu_alpha_lower, smooth_upper};
use kwidth_core::check::{run_checks, suite_names, CheckProfile};
use kwidth_core::experiment::{log_log_slope, log_spaced, random_feature_fit};
use kwidth_core::spectrum::{build_spectrum_with, sup_trace_decay, trace_decay, EtaOptions};
use kwidth_core::{
    ActivationKind, ActivationSpec, BoundCurve, FeatureKind, KernelSpectrum, SeparationConfig, SpectrumOptions,
    TargetDirection, TraceRequest,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Standard errors allowed below `Lambda(m)` before `separation` fails.
pub const SEPARATION_Z: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(name = "kwidth", version, about = "Kernel spectra and width bounds for two-layer networks")]
pub struct Cli {
    /// Flat `key=value` file; each key is applied as `--key value` before the
    /// command-line flags, which take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Degree-wise eigenvalues of one activation kernel.
    Spectrum(SpectrumArgs),
    /// Trace decay Lambda(m) with the matching reference curve.
    Decay(DecayArgs),
    /// Lambda_r(m), the supremum over gamma + |b| <= r.
    Supdecay(SupdecayArgs),
    /// Reference rate curves.
    Bounds(BoundsArgs),
    /// Random-feature fits of a single neuron.
    Separation(SeparationArgs),
    /// Run the invariant suites.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceChoice {
    #[default]
    Auto,
    Quadrature,
    MonteCarlo,
    DegreeSum,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Output {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Numerics {
    /// Relative tolerance for the eigenvalue quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest degree that may be computed.
    #[arg(long, default_value_t = 2000)]
    pub degree_cap: usize,
    /// Tail ratio for extending the computed degrees.
    #[arg(long, default_value_t = 1e-3)]
    pub tail_ratio: f64,
}

impl Numerics {
    fn options(&self, trace: TraceRequest) -> Result<SpectrumOptions> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(usage(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.tail_ratio > 0.0 && self.tail_ratio < 1.0) {
            return Err(usage(format!("--tail-ratio must lie in (0, 1), got {}", self.tail_ratio)));
        }
        Ok(SpectrumOptions {
            degree_cap: self.degree_cap,
            tail_ratio: self.tail_ratio,
            trace,
            eta: EtaOptions { rel_tol: self.tol, ..EtaOptions::default() },
        })
    }
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct SpectrumArgs {
    /// Activation as kind[:alpha[:gamma[:bias]]], e.g. relu:1:1.0:0.0.
    #[arg(long)]
    pub activation: ActivationSpec,
    #[arg(long)]
    pub d: usize,
    /// Number of eigenvalues (with multiplicity) to cover.
    #[arg(long, default_value_t = 100)]
    pub mmax: usize,
    #[arg(long, value_enum, default_value_t = TraceChoice::Auto)]
    pub trace: TraceChoice,
    /// Monte Carlo samples for `--trace monte-carlo`.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub numerics: Numerics,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct DecayArgs {
    #[arg(long)]
    pub activation: ActivationSpec,
    #[arg(long)]
    pub d: usize,
    /// Explicit m values; a log-spaced grid up to --mmax otherwise.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub mmax: usize,
    #[arg(long, value_enum, default_value_t = TraceChoice::Auto)]
    pub trace: TraceChoice,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub numerics: Numerics,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct SupdecayArgs {
    /// Activation kind and alpha; gamma and bias are swept.
    #[arg(long)]
    pub activation: ActivationSpec,
    #[arg(long)]
    pub d: usize,
    /// Radii r (comma list).
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub mmax: usize,
    #[command(flatten)]
    pub numerics: Numerics,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub mmax: usize,
    /// ReLU powers for the lower curves (comma list).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub alpha: Vec<u32>,
    /// Radii for the arctan upper curve (comma list).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureChoice {
    #[default]
    Neuron,
    Harmonic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionChoice {
    #[default]
    E1,
    Random,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct SeparationArgs {
    /// Target neuron activation.
    #[arg(long, default_value = "step")]
    pub activation: ActivationSpec,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![64, 128, 256])]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Training samples per trial; max(20 m, 200) when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub ridge: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureChoice::Neuron)]
    pub features: FeatureChoice,
    #[arg(long, value_enum, default_value_t = DirectionChoice::E1)]
    pub direction: DirectionChoice,
    /// Use the target direction as the first feature (diagnostic).
    #[arg(long)]
    pub force_target: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct CheckArgs {
    /// Run only these suites (comma list).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Stress dimension for dimension-dependent suites (slow for large d).
    #[arg(long)]
    pub d: Option<usize>,
    /// List suite names and exit.
    #[arg(long)]
    pub list: bool,
    #[command(flatten)]
    pub output: Output,
}

/// An input the user can fix; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit code for an error: 2 for bad input, 1 for numeric or I/O failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<kwidth_core::Error>() {
        Some(kwidth_core::Error::Domain(_) | kwidth_core::Error::Parse(_)) => 2,
        _ => 1,
    }
}

/// Splices `--config FILE` entries into the argument list right after the
/// subcommand, so explicit flags override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| usage("--config needs a file path"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let injected = parse_config(&text)?;
    let at = rest.iter().skip(1).position(|a| !a.starts_with('-')).map_or(rest.len(), |i| i + 2);
    rest.splice(at.min(rest.len())..at.min(rest.len()), injected);
    Ok(rest)
}

fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k.is_empty() || k == "config" {
            return Err(usage(format!("config line {}: invalid key", n + 1)));
        }
        match v {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Parses, runs and returns the process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Executes one subcommand. `Ok(1)` signals a failed invariant.
pub fn run(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Supdecay(a) => cmd_supdecay(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Separation(a) => cmd_separation(a),
        Command::Check(a) => cmd_check(a),
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table with fixed column names and preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u128),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => u64::try_from(*v).map_or_else(|_| json!(v.to_string()), |v| json!(v)),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u128)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u128)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as u128)
    }
}
impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

impl Table {
    fn new(columns: &'static [&'static str]) -> Self {
        Self { columns, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        w.into_inner().context("flushing CSV")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> =
                        self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

pub const SPECTRUM_COLUMNS: &[&str] =
    &["d", "kind", "alpha", "gamma", "bias", "k", "mult", "mu", "cum_count", "cum_energy"];
pub const DECAY_COLUMNS: &[&str] = &["d", "kind", "alpha", "gamma", "bias", "m", "Lambda"];
pub const BOUNDS_COLUMNS: &[&str] = &["label", "d", "alpha_or_r", "m", "value", "direction", "validity"];
pub const SEPARATION_COLUMNS: &[&str] =
    &["d", "kind", "alpha", "m", "n", "ridge", "trials", "mean_err", "stderr", "lambda_m", "seed"];
pub const SUPDECAY_COLUMNS: &[&str] = &["d", "kind", "alpha", "r", "m", "Lambda_r", "argmax_gamma", "argmax_bias"];
pub const TREND_COLUMNS: &[&str] = &["kind", "d", "r", "m", "Lambda_r", "slope"];
pub const CHECK_COLUMNS: &[&str] = &["name", "passed", "detail"];

/// `<stem>.<tag>.csv` next to `path`.
pub fn sibling_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.csv"))
}

fn write_bytes(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

/// Writes the primary table plus sibling tables (CSV) or one JSON document.
fn emit(
    output: &Output,
    command: &str,
    provenance: Value,
    main: &Table,
    extra: &[(&str, &Table)],
    summary: Value,
) -> Result<()> {
    match output.format {
        Format::Csv => {
            write_bytes(&output.out, &main.to_csv()?)?;
            if let Some(p) = &output.out {
                for (tag, t) in extra {
                    let sp = sibling_path(p, tag);
                    fs::write(&sp, t.to_csv()?).with_context(|| format!("writing {}", sp.display()))?;
                }
            }
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("command".into(), json!(command));
            doc.insert("provenance".into(), provenance);
            doc.insert("rows".into(), main.to_json());
            for (tag, t) in extra {
                doc.insert((*tag).to_string(), t.to_json());
            }
            if !summary.is_null() {
                doc.insert("summary".into(), summary);
            }
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
            bytes.push(b'\n');
            write_bytes(&output.out, &bytes)?;
        }
    }
    Ok(())
}

fn provenance<T: Serialize>(args: &T, extra: Value) -> Result<Value> {
    let mut p = Map::new();
    p.insert("version".into(), json!(VERSION));
    p.insert("config".into(), serde_json::to_value(args)?);
    if let Value::Object(m) = extra {
        p.extend(m);
    }
    Ok(Value::Object(p))
}

fn trace_request(choice: TraceChoice, samples: usize, seed: u64) -> TraceRequest {
    match choice {
        TraceChoice::Auto => TraceRequest::Auto,
        TraceChoice::Quadrature => TraceRequest::Quadrature,
        TraceChoice::MonteCarlo => TraceRequest::MonteCarlo { samples, seed },
        TraceChoice::DegreeSum => TraceRequest::DegreeSum,
    }
}

fn spectrum_provenance(ks: &KernelSpectrum, seed: u64) -> Result<Value> {
    Ok(json!({
        "degree_cap": ks.options.degree_cap,
        "max_degree": ks.max_degree(),
        "trace": ks.trace,
        "trace_method": serde_json::to_value(ks.trace_method)?,
        "trace_stderr": ks.trace_stderr,
        "residual": ks.residual,
        "tolerances": {
            "eta_rel_tol": ks.options.eta.rel_tol,
            "tail_ratio": ks.options.tail_ratio,
        },
        "seed": seed,
    }))
}

fn spec_cells(d: usize, s: &ActivationSpec) -> Vec<Cell> {
    row![d, s.kind.name(), s.alpha, s.gamma, s.bias]
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<i32> {
    let opts = a.numerics.options(trace_request(a.trace, a.samples, a.seed))?;
    let ks = build_spectrum_with(&a.activation, a.d, a.mmax, &opts)?;
    let mut t = Table::new(SPECTRUM_COLUMNS);
    for (k, (count, energy)) in ks.cumulative().into_iter().enumerate() {
        let mut r = spec_cells(a.d, &ks.spec);
        r.extend(row![k, ks.mult[k], ks.mu[k], count, energy]);
        t.push(r);
    }
    let prov = provenance(a, spectrum_provenance(&ks, a.seed)?)?;
    emit(&a.output, "spectrum", prov, &t, &[], Value::Null)?;
    Ok(0)
}

/// `0` followed by a log-spaced grid in `[1, mmax]`.
pub fn default_m_grid(mmax: usize) -> Vec<usize> {
    let mut ms = vec![0];
    ms.extend(log_spaced(1, mmax.max(1), 41));
    ms
}

fn m_values(explicit: &[usize], mmax: usize) -> Vec<usize> {
    if explicit.is_empty() {
        default_m_grid(mmax)
    } else {
        explicit.to_vec()
    }
}

/// The reference curve matching an activation, if any.
pub fn overlay_curve(spec: &ActivationSpec, d: usize, ms: &[usize]) -> Result<Option<BoundCurve>> {
    let ms: Vec<usize> = ms.iter().copied().filter(|&m| m >= 1).collect();
    if ms.is_empty() {
        return Ok(None);
    }
    Ok(match spec.kind {
        ActivationKind::Step | ActivationKind::ReluAlpha if d >= 3 => Some(relu_alpha_lower(d, spec.alpha, &ms)?),
        ActivationKind::Arctan => Some(arctan_upper(d, spec.gamma + spec.bias.abs(), &ms)?),
        k if k.is_smooth() => Some(smooth_upper(d, &ms)?),
        _ => None,
    })
}

fn bounds_rows(t: &mut Table, c: &BoundCurve) {
    for (m, v) in c.m_values.iter().zip(&c.values) {
        t.push(row![c.label.as_str(), c.d, c.alpha_or_r, *m, *v, c.direction.as_str(), c.validity.as_str()]);
    }
}

pub fn cmd_decay(a: &DecayArgs) -> Result<i32> {
    let ms = m_values(&a.m, a.mmax);
    let top = ms.iter().copied().max().unwrap_or(1).max(1);
    let opts = a.numerics.options(trace_request(a.trace, a.samples, a.seed))?;
    let ks = build_spectrum_with(&a.activation, a.d, top, &opts)?;
    let td = trace_decay(&ks, &ms)?;
    let mut t = Table::new(DECAY_COLUMNS);
    for (m, lam) in td.m_values.iter().zip(&td.lambda_values) {
        let mut r = spec_cells(a.d, &ks.spec);
        r.extend(row![*m, *lam]);
        t.push(r);
    }
    let mut bt = Table::new(BOUNDS_COLUMNS);
    if let Some(c) = overlay_curve(&ks.spec, a.d, &ms)? {
        bounds_rows(&mut bt, &c);
    }
    let prov = provenance(a, spectrum_provenance(&ks, a.seed)?)?;
    emit(&a.output, "decay", prov, &t, &[("bounds", &bt)], Value::Null)?;
    Ok(0)
}

/// Slope of `ln Lambda_r` against `ln m` over the top decade of `ms`.
pub fn top_decade_slope(ms: &[usize], lam: &[f64]) -> Option<f64> {
    let top = *ms.iter().max()?;
    let (xs, ys): (Vec<usize>, Vec<f64>) =
        ms.iter().zip(lam).filter(|(&m, _)| m >= 1 && 10 * m >= top).map(|(&m, &l)| (m, l)).unzip();
    log_log_slope(&xs, &ys)
}

/// Default supdecay grid: sparse below `mmax/10`, 21 points in the top decade.
pub fn supdecay_m_grid(mmax: usize) -> Vec<usize> {
    let mmax = mmax.max(10);
    let mut ms = log_spaced(1, mmax / 10, 11);
    ms.extend(log_spaced(mmax / 10, mmax, 21));
    ms.sort_unstable();
    ms.dedup();
    ms
}

pub fn cmd_supdecay(a: &SupdecayArgs) -> Result<i32> {
    let ms = if a.m.is_empty() { supdecay_m_grid(a.mmax) } else { a.m.clone() };
    let opts = a.numerics.options(TraceRequest::Auto)?;
    let (kind, alpha) = (a.activation.kind, a.activation.alpha);
    let mut t = Table::new(SUPDECAY_COLUMNS);
    let mut trend = Table::new(TREND_COLUMNS);
    let mut slopes = Vec::new();
    let mut off_boundary = Vec::new();
    for &r in &a.r {
        let sup = sup_trace_decay(kind, alpha, r, a.d, a.grid, &ms, &opts)?;
        for (i, &m) in ms.iter().enumerate() {
            let (g, b) = sup.argmax[i];
            t.push(row![a.d, kind.name(), alpha, r, m, sup.sup_curve[i], g, b]);
        }
        let slope = top_decade_slope(&ms, &sup.sup_curve).unwrap_or(f64::NAN);
        let top = ms.iter().copied().max().unwrap_or(0);
        for (i, &m) in ms.iter().enumerate() {
            if m >= 1 && 10 * m >= top {
                trend.push(row![kind.name(), a.d, r, m, sup.sup_curve[i], slope]);
            }
        }
        if !sup.argmax_at_boundary() {
            eprintln!("warning: r = {r}: the grid maximum is not always attained at (gamma, b) = (r, 0)");
            off_boundary.push(r);
        }
        slopes.push(json!({ "r": r, "slope": slope }));
    }
    let prov = provenance(
        a,
        json!({
            "degree_cap": opts.degree_cap,
            "trace_method": "auto",
            "tolerances": { "eta_rel_tol": opts.eta.rel_tol, "tail_ratio": opts.tail_ratio },
            "seed": Value::Null,
        }),
    )?;
    let summary = json!({ "slopes": slopes, "off_boundary_argmax": off_boundary });
    emit(&a.output, "supdecay", prov, &t, &[("trend", &trend)], summary)?;
    Ok(0)
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<i32> {
    let ms: Vec<usize> = if a.m.is_empty() { log_spaced(1, a.mmax.max(1), 41) } else { a.m.clone() };
    let mut t = Table::new(BOUNDS_COLUMNS);
    if a.d >= 3 {
        for &alpha in &a.alpha {
            bounds_rows(&mut t, &relu_alpha_lower(a.d, alpha, &ms)?);
        }
    }
    bounds_rows(&mut t, &smooth_upper(a.d, &ms)?);
    for &r in &a.r {
        bounds_rows(&mut t, &arctan_upper(a.d, r, &ms)?);
    }
    let prov = provenance(a, json!({ "notes": bounds::large_r_regime_notes() }))?;
    emit(&a.output, "bounds", prov, &t, &[], Value::Null)?;
    Ok(0)
}

pub fn cmd_separation(a: &SeparationArgs) -> Result<i32> {
    if a.trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    if a.ridge.is_nan() || a.ridge < 0.0 {
        return Err(usage("--ridge must be non-negative"));
    }
    let mut t = Table::new(SEPARATION_COLUMNS);
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for &m in &a.m {
        if m == 0 {
            return Err(usage("m values must be positive"));
        }
        let mut cfg = SeparationConfig::new(a.d, a.activation, m, a.seed);
        if let Some(n) = a.samples {
            cfg.n_train = n;
            cfg.n_test = 4 * n;
        }
        cfg.ridge = a.ridge;
        cfg.trials = a.trials;
        cfg.force_target_feature = a.force_target;
        cfg.features = match a.features {
            FeatureChoice::Neuron => FeatureKind::RandomNeuron,
            FeatureChoice::Harmonic => FeatureKind::SphericalHarmonicProxy,
        };
        cfg.direction = match a.direction {
            DirectionChoice::E1 => TargetDirection::FixedE1,
            DirectionChoice::Random => TargetDirection::Random,
        };
        let rep = random_feature_fit(&cfg)?;
        if !a.force_target && !rep.respects_lower_bound(SEPARATION_Z) {
            failures.push(m);
        }
        t.push(row![
            a.d,
            a.activation.kind.name(),
            a.activation.alpha,
            m,
            cfg.n_train,
            cfg.ridge,
            cfg.trials,
            rep.mean,
            rep.stderr,
            rep.lambda_m,
            a.seed,
        ]);
        summary.push(json!({
            "m": m,
            "underdetermined": rep.underdetermined,
            "min_norm_trials": rep.min_norm_trials,
            "median_err": rep.quantile(0.5),
            "q90_err": rep.quantile(0.9),
        }));
    }
    let prov = provenance(a, json!({ "seed": a.seed, "z": SEPARATION_Z }))?;
    emit(&a.output, "separation", prov, &t, &[], json!({ "per_m": summary, "bound_failures": failures }))?;
    if failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("error: mean error below Lambda(m) - {SEPARATION_Z} SE for m in {failures:?}");
        Ok(1)
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32> {
    if a.list {
        for n in suite_names() {
            println!("{n}");
        }
        return Ok(0);
    }
    let outcomes = run_checks(&a.only, &CheckProfile { stress_d: a.d })?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let summary = format!("{} passed, {failed} failed", outcomes.len() - failed);
    if a.output.out.is_none() {
        // Timings only go to the terminal so that saved reports are reproducible.
        let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(4);
        let mut so = io::stdout().lock();
        for o in &outcomes {
            let tag = if o.passed { "PASS" } else { "FAIL" };
            writeln!(so, "[{tag}] {:width$}  {:>8.2}s  {}", o.name, o.seconds, o.detail)?;
        }
        writeln!(so, "{summary}")?;
    } else {
        eprintln!("check: {summary}");
        let mut t = Table::new(CHECK_COLUMNS);
        for o in &outcomes {
            t.push(row![o.name, if o.passed { "true" } else { "false" }, o.detail.as_str()]);
        }
        emit(&a.output, "check", provenance(a, Value::Null)?, &t, &[], Value::Null)?;
    }
    Ok(i32::from(failed > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn config_lines() {
        let got = parse_config("# c\n\nd = 3\nforce_target = true\nlist=false\n").unwrap();
        assert_eq!(got, argv("--d 3 --force-target"));
        assert!(parse_config("novalue\n").is_err());
        assert!(parse_config("config = x\n").is_err());
    }

    #[test]
    fn config_goes_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("kwidth-cfg-{}", std::process::id()));
        fs::write(&dir, "d = 4\n").unwrap();
        let args = argv(&format!("kwidth --config {} spectrum --d 3", dir.display()));
        assert_eq!(expand_config(args).unwrap(), argv("kwidth spectrum --d 4 --d 3"));
        fs::remove_file(&dir).unwrap();
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling_path(Path::new("out/decay.csv"), "bounds"), PathBuf::from("out/decay.bounds.csv"));
    }

    #[test]
    fn slope_uses_top_decade() {
        let ms = vec![1, 10, 100, 1000];
        let lam = vec![1.0, 5.0, 1e-2, 1e-3];
        assert!((top_decade_slope(&ms, &lam).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_grids() {
        let g = default_m_grid(1000);
        assert_eq!((g[0], g[1], *g.last().unwrap()), (0, 1, 1000));
        let s = supdecay_m_grid(10_000);
        assert!(s.iter().filter(|&&m| m >= 1000).count() >= 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}
