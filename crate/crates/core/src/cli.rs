//! Command-line front end. The binary is a thin wrapper around [`run`], which
//! writes to caller-supplied streams and returns the process exit code:
//! `0` success, `1` bad input or configuration, `2` infeasible or unstable.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::game::{self, UserStrategy};
use crate::optimizer::{MarketParams, OperatingPoint, PricingModel, Region};
use crate::queue::{PriorityRatio, QueueParams};
use crate::sim::{self, ServiceDistribution, SimConfig};
use crate::table1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

pub const CSV_HEADER: [&str; 10] = [
    "s_p",
    "region",
    "lambda_s",
    "beta",
    "theta",
    "s_s",
    "revenue",
    "sensitivity",
    "w_p",
    "binding",
];

#[derive(Debug, Clone, Parser)]
#[command(name = "queue-pricing", version, about = "Pricing, service levels and priority scheduling for a shared two-class queue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file; the built-in reference parameters are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Primary service level: a value, a comma list, or start:stop:step.
    #[arg(long, global = true)]
    pub sp: Option<String>,

    /// Secondary arrival rate (ne, simulate).
    #[arg(long = "lambda-s", global = true)]
    pub lambda_s: Option<f64>,

    /// Priority ratio for simulate; repeatable, accepts `inf`.
    #[arg(long, global = true)]
    pub beta: Vec<String>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Significant digits in numeric output.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Revenue-optimal operating point for one S_p.
    Optimize,
    /// Operating points over a list or range of S_p values.
    Sweep,
    /// Best-response dynamics and equilibrium check.
    Ne,
    /// Simulation of the queue against the analytic waits.
    Simulate,
    /// Reproduce the reference table and compare with the published values.
    Table1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub queue: QueueSection,
    pub market: MarketSection,
    #[serde(default)]
    pub sla: Option<SlaSection>,
    #[serde(default)]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSection {
    pub lambda_p: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaSection {
    pub s_p: SpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpSpec {
    Single(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub departures_per_replication: Option<usize>,
    #[serde(default)]
    pub warmup_departures: Option<usize>,
    #[serde(default)]
    pub lambda_s: Option<f64>,
    #[serde(default)]
    pub betas: Option<Vec<PriorityRatio>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub precision: Option<usize>,
}

/// Input problem reported to the user with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl RunConfig {
    pub fn reference() -> Self {
        let q = table1::queue();
        let m = table1::market();
        RunConfig {
            queue: QueueSection {
                lambda_p: q.lambda_p(),
                mu: q.mu(),
                sigma: q.sigma(),
            },
            market: MarketSection {
                a: m.a,
                b: m.b,
                c: m.c,
            },
            sla: None,
            sim: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the missing or unknown key in backticks
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "config".to_string());
            ConfigError::new(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn queue_params(&self) -> Result<QueueParams, ConfigError> {
        let q = self.queue;
        QueueParams::new(q.lambda_p, q.mu, q.sigma).map_err(|e| field_error("queue", e))
    }

    pub fn market_params(&self) -> Result<MarketParams, ConfigError> {
        let m = self.market;
        MarketParams::new(m.a, m.b, m.c).map_err(|e| field_error("market", e))
    }

    pub fn model(&self) -> Result<PricingModel, ConfigError> {
        PricingModel::new(self.queue_params()?, self.market_params()?)
            .map_err(|e| ConfigError::new("queue/market", e.to_string()))
    }
}

fn field_error(section: &str, err: Error) -> ConfigError {
    match err {
        Error::InvalidParameter { name, reason } => ConfigError::new(format!("{section}.{name}"), reason),
        other => ConfigError::new(section, other.to_string()),
    }
}

impl SpSpec {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        let vals = match self {
            SpSpec::Single(v) => vec![*v],
            SpSpec::List(v) => v.clone(),
            SpSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(ConfigError::new(
                        "sla.s_p",
                        format!("range needs step > 0 and stop >= start, got {start}:{stop}:{step}"),
                    ));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + step * i as f64).collect()
            }
        };
        if vals.is_empty() {
            return Err(ConfigError::new("sla.s_p", "no service levels given"));
        }
        if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::new("sla.s_p", format!("{bad} is not a finite time")));
        }
        Ok(vals)
    }

    /// Parses `8`, `0.29,0.35` or `0.3:0.5:0.1`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| ConfigError::new("--sp", format!("`{s}`: {e}")))
        };
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(ConfigError::new("--sp", "range must be start:stop:step"));
            }
            Ok(SpSpec::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                step: num(parts[2])?,
            })
        } else if text.contains(',') {
            Ok(SpSpec::List(
                text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?,
            ))
        } else if text.trim().is_empty() {
            Ok(SpSpec::List(Vec::new()))
        } else {
            Ok(SpSpec::Single(num(text)?))
        }
    }
}

// ---------------------------------------------------------------------------
// formatting

/// Rounds to `digits` significant digits and prints the shortest decimal
/// that reads back as the rounded value.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.clamp(1, 17);
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("valid float");
    format!("{rounded}")
}

fn fmt_beta(beta: PriorityRatio, digits: usize) -> String {
    match beta {
        PriorityRatio::Infinite => "inf".to_string(),
        PriorityRatio::Finite(v) => fmt_sig(v, digits),
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: OperatingPoint,
    pub sensitivity: Option<f64>,
}

impl SweepRow {
    fn compute(model: &PricingModel, s_p: f64) -> Result<Self, Error> {
        let point = model.optimize(s_p)?;
        let sensitivity = model.sensitivity(s_p).ok();
        Ok(Self { point, sensitivity })
    }

    fn csv_record(&self, digits: usize) -> [String; 10] {
        let p = &self.point;
        let feasible = p.is_feasible();
        let num = |x: f64| if feasible { fmt_sig(x, digits) } else { String::new() };
        [
            fmt_sig(p.s_p, digits),
            p.region.label().to_string(),
            fmt_sig(p.lambda_s, digits),
            if feasible { fmt_beta(p.beta, digits) } else { String::new() },
            num(p.theta),
            num(p.s_s),
            fmt_sig(p.revenue, digits),
            self.sensitivity.map(|s| fmt_sig(s, digits)).unwrap_or_default(),
            fmt_sig(p.w_p, digits),
            p.binding.label(),
        ]
    }
}

pub fn render_csv(rows: &[SweepRow], digits: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r.csv_record(digits)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// A sweep CSV row read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub s_p: f64,
    pub region: Region,
    pub lambda_s: f64,
    pub beta: Option<PriorityRatio>,
    pub theta: Option<f64>,
    pub s_s: Option<f64>,
    pub revenue: f64,
    pub sensitivity: Option<f64>,
    pub w_p: f64,
    pub binding: String,
}

pub fn parse_csv(text: &str) -> Result<Vec<ParsedRow>, ConfigError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| ConfigError::new("csv", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_HEADER {
        return Err(ConfigError::new("csv", format!("unexpected header {header:?}")));
    }
    let opt = |s: &str| -> Result<Option<f64>, ConfigError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|e| ConfigError::new("csv", format!("`{s}`: {e}")))
        }
    };
    let req = |s: &str| -> Result<f64, ConfigError> {
        s.parse().map_err(|e| ConfigError::new("csv", format!("`{s}`: {e}")))
    };
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| ConfigError::new("csv", e.to_string()))?;
            let beta = match &rec[3] {
                "" => None,
                s => Some(s.parse::<PriorityRatio>().map_err(|e| ConfigError::new("csv", e.to_string()))?),
            };
            Ok(ParsedRow {
                s_p: req(&rec[0])?,
                region: Region::from_label(&rec[1])
                    .ok_or_else(|| ConfigError::new("csv", format!("unknown region `{}`", &rec[1])))?,
                lambda_s: req(&rec[2])?,
                beta,
                theta: opt(&rec[4])?,
                s_s: opt(&rec[5])?,
                revenue: req(&rec[6])?,
                sensitivity: opt(&rec[7])?,
                w_p: req(&rec[8])?,
                binding: rec[9].to_string(),
            })
        })
        .collect()
}

fn render_table(rows: &[SweepRow], digits: usize) -> String {
    let records: Vec<[String; 10]> = rows.iter().map(|r| r.csv_record(digits)).collect();
    let mut widths: Vec<usize> = CSV_HEADER.iter().map(|h| h.len()).collect();
    for rec in &records {
        for (w, cell) in widths.iter_mut().zip(rec.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &mut dyn Iterator<Item = &str>, out: &mut String| {
        let parts: Vec<String> =
            cells.zip(&widths).map(|(c, w)| format!("{c:>w$}", w = *w)).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut CSV_HEADER.iter().copied(), &mut out);
    for rec in &records {
        line(&mut rec.iter().map(String::as_str), &mut out);
    }
    out
}

fn render_rows(rows: &[SweepRow], format: Format, digits: usize) -> String {
    match format {
        Format::Csv => render_csv(rows, digits),
        Format::Table => render_table(rows, digits),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
            s.push('\n');
            s
        }
    }
}

// ---------------------------------------------------------------------------
// commands

/// Result of a command: text for stdout, diagnostics for stderr, and the
/// exit code.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

impl From<ConfigError> for CommandOutput {
    fn from(e: ConfigError) -> Self {
        CommandOutput::fail(EXIT_USAGE, format!("error: {e}"))
    }
}

/// Options resolved from flags over the config file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub format: Format,
    pub digits: usize,
    pub out: Option<PathBuf>,
    pub cli: Cli,
}

impl Resolved {
    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::reference(),
        };
        let output = config.output.clone().unwrap_or(OutputSection {
            path: None,
            format: None,
            precision: None,
        });
        let default_format = if cli.command == Command::Sweep { Format::Csv } else { Format::Table };
        let digits = cli.precision.or(output.precision).unwrap_or(6);
        if !(1..=17).contains(&digits) {
            return Err(ConfigError::new("--precision", format!("must be 1..=17, got {digits}")));
        }
        Ok(Self {
            format: cli.format.or(output.format).unwrap_or(default_format),
            digits,
            out: cli.out.clone().or(output.path),
            config,
            cli,
        })
    }

    pub fn sp_values(&self) -> Result<Vec<f64>, ConfigError> {
        let spec = match (&self.cli.sp, &self.config.sla) {
            (Some(text), _) => SpSpec::parse(text)?,
            (None, Some(sla)) => sla.s_p.clone(),
            (None, None) => return Err(ConfigError::new("sla.s_p", "no primary service level given (use --sp)")),
        };
        spec.values()
    }

    fn single_sp(&self) -> Result<f64, ConfigError> {
        let v = self.sp_values()?;
        if v.len() != 1 {
            return Err(ConfigError::new("--sp", format!("expected one value, got {}", v.len())));
        }
        Ok(v[0])
    }
}

pub fn cmd_optimize(r: &Resolved) -> CommandOutput {
    let run = || -> Result<CommandOutput, ConfigError> {
        let model = r.config.model()?;
        let s_p = r.single_sp()?;
        let row = SweepRow::compute(&model, s_p).map_err(|e| ConfigError::new("sla.s_p", e.to_string()))?;
        if !row.point.is_feasible() {
            let iv = model.intervals();
            let why = if iv.demand_feasible {
                format!(
                    "S_p = {} does not exceed the minimum achievable primary wait S^_p = {}",
                    fmt_sig(s_p, r.digits),
                    fmt_sig(iv.s_hat_p, r.digits)
                )
            } else {
                "demand intercept too small: a/c <= lambda_p psi / mu^2".to_string()
            };
            return Ok(CommandOutput::fail(EXIT_INFEASIBLE, format!("infeasible: {why}")));
        }
        let text = match r.format {
            Format::Table => {
                let p = &row.point;
                let d = r.digits;
                let mut s = String::new();
                let _ = writeln!(s, "region       {}", p.region);
                let _ = writeln!(s, "s_p          {}", fmt_sig(p.s_p, d));
                let _ = writeln!(s, "lambda_s     {}", fmt_sig(p.lambda_s, d));
                let _ = writeln!(s, "beta         {}", fmt_beta(p.beta, d));
                let _ = writeln!(s, "theta        {}", fmt_sig(p.theta, d));
                let _ = writeln!(s, "s_s          {}", fmt_sig(p.s_s, d));
                let _ = writeln!(s, "revenue      {}", fmt_sig(p.revenue, d));
                let _ = writeln!(s, "w_p          {}", fmt_sig(p.w_p, d));
                let _ = writeln!(
                    s,
                    "sensitivity  {}",
                    row.sensitivity.map(|v| fmt_sig(v, d)).unwrap_or_else(|| "-".into())
                );
                let _ = writeln!(s, "binding      {}", p.binding.label());
                if !p.theta_valid {
                    let _ = writeln!(s, "warning      negative price; parameters outside the model's operating regime");
                }
                s
            }
            f => render_rows(std::slice::from_ref(&row), f, r.digits),
        };
        Ok(CommandOutput::ok(text))
    };
    run().unwrap_or_else(CommandOutput::from)
}

pub fn cmd_sweep(r: &Resolved) -> CommandOutput {
    let run = || -> Result<CommandOutput, ConfigError> {
        let model = r.config.model()?;
        let values = r.sp_values()?;
        let rows = values
            .iter()
            .map(|&s_p| SweepRow::compute(&model, s_p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::new("sla.s_p", e.to_string()))?;
        Ok(CommandOutput::ok(render_rows(&rows, r.format, r.digits)))
    };
    run().unwrap_or_else(CommandOutput::from)
}

#[derive(Debug, Serialize)]
struct NeOutput<'a> {
    s_p: f64,
    report: &'a game::NeReport,
    revenue_maximal: f64,
}

pub fn cmd_ne(r: &Resolved) -> CommandOutput {
    let run = || -> Result<CommandOutput, ConfigError> {
        let model = r.config.model()?;
        let s_p = r.single_sp()?;
        let outcome = match r.cli.lambda_s {
            Some(lambda_s) => game::run_dynamics(&model, s_p, UserStrategy { lambda_s }),
            None => game::revenue_maximal_ne(&model, s_p),
        };
        let report = match outcome {
            Ok(rep) => rep,
            Err(e @ (Error::Infeasible(_) | Error::Unstable { .. })) => {
                return Ok(CommandOutput::fail(EXIT_INFEASIBLE, format!("infeasible: {e}")))
            }
            Err(e) => return Err(ConfigError::new("--lambda-s", e.to_string())),
        };
        let best = model.optimize(s_p).map(|p| p.revenue).unwrap_or(0.0);
        let d = r.digits;
        let text = match r.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&NeOutput {
                    s_p,
                    report: &report,
                    revenue_maximal: best,
                })
                .expect("serializable report");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let _ = w.write_record([
                    "s_p",
                    "lambda_s",
                    "beta",
                    "theta",
                    "s_s",
                    "revenue",
                    "is_equilibrium",
                    "provider_deviation_gain",
                    "user_deviation_gain",
                    "revenue_maximal",
                ]);
                let _ = w.write_record([
                    fmt_sig(s_p, d),
                    fmt_sig(report.user.lambda_s, d),
                    fmt_beta(report.provider.beta, d),
                    fmt_sig(report.provider.theta, d),
                    fmt_sig(report.provider.s_s, d),
                    fmt_sig(report.revenue, d),
                    report.is_equilibrium.to_string(),
                    fmt_sig(report.provider_deviation_gain, d),
                    fmt_sig(report.user_deviation_gain, d),
                    fmt_sig(best, d),
                ]);
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            }
            Format::Table => {
                let mut s = String::new();
                let _ = writeln!(s, "s_p                      {}", fmt_sig(s_p, d));
                let _ = writeln!(s, "lambda_s                 {}", fmt_sig(report.user.lambda_s, d));
                let _ = writeln!(s, "beta                     {}", fmt_beta(report.provider.beta, d));
                let _ = writeln!(s, "theta                    {}", fmt_sig(report.provider.theta, d));
                let _ = writeln!(s, "s_s                      {}", fmt_sig(report.provider.s_s, d));
                let _ = writeln!(s, "revenue                  {}", fmt_sig(report.revenue, d));
                let _ = writeln!(s, "equilibrium              {}", report.is_equilibrium);
                let _ = writeln!(s, "provider_deviation_gain  {}", fmt_sig(report.provider_deviation_gain, d));
                let _ = writeln!(s, "user_deviation_gain      {}", fmt_sig(report.user_deviation_gain, d));
                let _ = writeln!(s, "revenue_maximal          {}", fmt_sig(best, d));
                s
            }
        };
        Ok(CommandOutput::ok(text))
    };
    run().unwrap_or_else(CommandOutput::from)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRow {
    pub beta: PriorityRatio,
    pub report: sim::SimulationReport,
    pub analytic_w_p: f64,
    pub analytic_w_s: f64,
    pub covers_w_p: bool,
    pub covers_w_s: bool,
    pub conservation_ok: bool,
}

pub fn cmd_simulate(r: &Resolved) -> CommandOutput {
    let run = || -> Result<CommandOutput, ConfigError> {
        let queue = r.config.queue_params()?;
        let section = r.config.sim.clone().ok_or_else(|| {
            ConfigError::new("sim", "simulation settings missing from the config")
        })?;
        let lambda_s = r
            .cli
            .lambda_s
            .or(section.lambda_s)
            .ok_or_else(|| ConfigError::new("sim.lambda_s", "secondary arrival rate required (use --lambda-s)"))?;
        let departures = section.departures_per_replication.unwrap_or(200_000);
        let cfg = SimConfig {
            seed: r.cli.seed.or(section.seed).unwrap_or(1),
            replications: section.replications.unwrap_or(10),
            departures_per_replication: departures,
            warmup_departures: section.warmup_departures.unwrap_or(departures / 10),
        };
        cfg.validate().map_err(|e| field_error("sim", e))?;
        let betas = if r.cli.beta.is_empty() {
            section
                .betas
                .unwrap_or_else(|| vec![PriorityRatio::ZERO, PriorityRatio::FCFS, PriorityRatio::Infinite])
        } else {
            r.cli
                .beta
                .iter()
                .map(|s| s.parse::<PriorityRatio>())
                .collect::<Result<_, _>>()
                .map_err(|e| field_error("--beta", e))?
        };
        let dist = ServiceDistribution::for_queue(&queue);
        let sweep = match sim::frontier_sweep(&queue, lambda_s, &betas, &dist, &cfg) {
            Ok(s) => s,
            Err(e @ Error::Unstable { .. }) => {
                return Ok(CommandOutput::fail(EXIT_INFEASIBLE, format!("infeasible: {e}")))
            }
            Err(e) => return Err(field_error("sim", e)),
        };
        let rows: Vec<SimulateRow> = sweep
            .into_iter()
            .map(|(beta, report)| {
                let w = queue.mean_wait(lambda_s, beta).expect("stability checked by the simulation");
                let (gap, slack) =
                    sim::conservation_gap(&queue, lambda_s, &report).expect("stability checked");
                SimulateRow {
                    beta,
                    report,
                    analytic_w_p: w.w_p,
                    analytic_w_s: w.w_s,
                    covers_w_p: report.covers_primary(w.w_p),
                    covers_w_s: lambda_s == 0.0 || report.covers_secondary(w.w_s),
                    conservation_ok: gap <= slack,
                }
            })
            .collect();
        let d = r.digits;
        let text = match r.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&rows).expect("serializable rows");
                s.push('\n');
                s
            }
            Format::Csv | Format::Table => {
                let header = [
                    "beta", "w_p_sim", "w_p_ci_half", "w_p_analytic", "w_p_covered", "w_s_sim",
                    "w_s_ci_half", "w_s_analytic", "w_s_covered", "conservation_ok",
                ];
                let mut w = csv::WriterBuilder::new()
                    .delimiter(if r.format == Format::Csv { b',' } else { b'\t' })
                    .from_writer(Vec::new());
                let _ = w.write_record(header);
                for row in &rows {
                    let _ = w.write_record([
                        fmt_beta(row.beta, d),
                        fmt_sig(row.report.w_p_est, d),
                        fmt_sig(row.report.w_p_ci_half, d),
                        fmt_sig(row.analytic_w_p, d),
                        row.covers_w_p.to_string(),
                        fmt_sig(row.report.w_s_est, d),
                        fmt_sig(row.report.w_s_ci_half, d),
                        fmt_sig(row.analytic_w_s, d),
                        row.covers_w_s.to_string(),
                        row.conservation_ok.to_string(),
                    ]);
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            }
        };
        Ok(CommandOutput::ok(text))
    };
    run().unwrap_or_else(CommandOutput::from)
}

/// Comparison of one reference row with the computed optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Comparison {
    pub published: table1::PublishedRow,
    pub computed: OperatingPoint,
    /// Printed price or revenue disagrees with the row's own rate and wait.
    pub inconsistent_row: bool,
    pub matches: bool,
}

/// Tolerances used for the reference comparison.
pub const TABLE1_RATE_TOL: f64 = 1e-3;
pub const TABLE1_MONEY_TOL: f64 = 0.5;

pub fn compare_table1() -> Vec<Table1Comparison> {
    let model = PricingModel::new(table1::queue(), table1::market()).expect("reference model");
    let market = table1::market();
    table1::ROWS
        .iter()
        .map(|row| {
            let computed = model.optimize(row.s_p).expect("reference rows are feasible");
            let beta_ok = match (row.beta, computed.beta) {
                (PriorityRatio::Infinite, PriorityRatio::Infinite) => true,
                (PriorityRatio::Finite(a), PriorityRatio::Finite(b)) => (a - b).abs() <= TABLE1_RATE_TOL,
                _ => false,
            };
            let matches = beta_ok
                && (row.lambda_s - computed.lambda_s).abs() <= TABLE1_RATE_TOL
                && (row.s_s - computed.s_s).abs() <= TABLE1_RATE_TOL
                && (row.theta - computed.theta).abs() <= TABLE1_MONEY_TOL
                && (row.revenue - computed.revenue).abs() <= TABLE1_MONEY_TOL;
            Table1Comparison {
                published: *row,
                computed,
                inconsistent_row: !row.is_self_consistent(&market, TABLE1_MONEY_TOL),
                matches,
            }
        })
        .collect()
}

pub fn cmd_table1(r: &Resolved) -> CommandOutput {
    let rows = compare_table1();
    let d = r.digits;
    let text = match r.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("serializable rows");
            s.push('\n');
            s
        }
        Format::Csv | Format::Table => {
            let mut w = csv::WriterBuilder::new()
                .delimiter(if r.format == Format::Csv { b',' } else { b'\t' })
                .from_writer(Vec::new());
            let _ = w.write_record([
                "s_p", "beta", "beta_pub", "lambda_s", "lambda_s_pub", "theta", "theta_pub", "s_s",
                "s_s_pub", "revenue", "revenue_pub", "status",
            ]);
            for c in &rows {
                let status = match (c.matches, c.inconsistent_row) {
                    (true, _) => "match",
                    (false, true) => "published row inconsistent",
                    (false, false) => "mismatch",
                };
                let p = &c.published;
                let q = &c.computed;
                let _ = w.write_record([
                    fmt_sig(p.s_p, d),
                    fmt_beta(q.beta, d),
                    fmt_beta(p.beta, d),
                    fmt_sig(q.lambda_s, d),
                    fmt_sig(p.lambda_s, d),
                    fmt_sig(q.theta, d),
                    fmt_sig(p.theta, d),
                    fmt_sig(q.s_s, d),
                    fmt_sig(p.s_s, d),
                    fmt_sig(q.revenue, d),
                    fmt_sig(p.revenue, d),
                    status.to_string(),
                ]);
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    };
    CommandOutput::ok(text)
}

pub fn execute(cli: Cli) -> CommandOutput {
    let resolved = match Resolved::from_cli(cli) {
        Ok(r) => r,
        Err(e) => return e.into(),
    };
    let mut output = match resolved.cli.command {
        Command::Optimize => cmd_optimize(&resolved),
        Command::Sweep => cmd_sweep(&resolved),
        Command::Ne => cmd_ne(&resolved),
        Command::Simulate => cmd_simulate(&resolved),
        Command::Table1 => cmd_table1(&resolved),
    };
    if let (Some(path), EXIT_OK) = (&resolved.out, output.code) {
        if let Err(e) = fs::write(path, &output.stdout) {
            return CommandOutput::fail(EXIT_USAGE, format!("error: --out {}: {e}", path.display()));
        }
        output.stdout.clear();
    }
    output
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = execute(cli);
    let _ = stdout.write_all(out.stdout.as_bytes());
    let _ = stderr.write_all(out.stderr.as_bytes());
    out.code
}
