#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use rmt_linstats::asympt::{expansion, AsymptResolution};
use rmt_linstats::ensembles::{finite_moments, mgf_beta2, mgf_squared, EnsembleSpec, Family, Resolution, Statistic};
use rmt_linstats::mcsample::{linstat_moments, mgf_estimate, sample, Method, SampleBatch};
use rmt_linstats::operator::{StatFamily, TestFunction};
use rmt_linstats::orthopoly::{bessel_kernel, sine_kernel, CdKernel, CdKind};
use rmt_linstats::verify::{self, Suite};
use rmt_linstats::{fmt_f64, Error, VERSION};

const THREADS_VAR: &str = "RMT_LINSTATS_THREADS";

/// Moment generating functions and mean/variance of linear eigenvalue
/// statistics for the Gaussian and Laguerre β-ensembles.
#[derive(Parser, Debug)]
#[command(name = "rmt-linstats", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// G_N(λ) = E exp(−λ Σ F) from the determinant formulas (and Monte Carlo with --samples)
    Mgf,
    /// Asymptotic, finite-N and Monte Carlo mean and variance
    Meanvar,
    /// Scaled correlation kernel against its sine or Bessel limit on a grid
    Kernel {
        #[arg(long)]
        xmin: Option<f64>,
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Monte Carlo eigenvalue samples
    Sample,
    /// Built-in self-checks
    Verify {
        #[arg(default_value = "all", value_parser = ["lemmas", "kernels", "determinants", "all"])]
        suite: String,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML file with one key per option; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    beta: Option<u8>,
    /// Matrix sizes (comma separated)
    #[arg(short = 'N', long = "n", global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Statistic shape: gaussian, lorentzian or half-bump
    #[arg(long, global = true)]
    stat: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    center: Option<f64>,
    #[arg(long, global = true)]
    width: Option<f64>,
    /// λ values (comma separated)
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// Gauss-Legendre nodes per quadrature panel
    #[arg(long, global = true)]
    grid_nodes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count (0 disables Monte Carlo columns)
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Sampler: tridiagonal or mcmc
    #[arg(long, global = true)]
    method: Option<String>,
    /// json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<String>,
    beta: Option<u8>,
    n: Option<OneOrMany<usize>>,
    alpha: Option<f64>,
    stat: Option<String>,
    amplitude: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
    lambda: Option<OneOrMany<f64>>,
    grid_nodes: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    method: Option<String>,
    format: Option<String>,
    out: Option<PathBuf>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Fully resolved options, embedded in every report.
#[derive(Serialize, Debug, Clone)]
struct RunConfig {
    family: Family,
    beta: u8,
    n: Vec<usize>,
    alpha: f64,
    stat: TestFunction,
    lambda: Vec<f64>,
    grid_nodes: usize,
    seed: u64,
    samples: usize,
    method: Method,
    format: Format,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn specs(&self) -> Result<Vec<EnsembleSpec>, Error> {
        self.n.iter().map(|&n| EnsembleSpec::new(self.family, self.beta, n, self.alpha)).collect()
    }

    fn resolution(&self) -> Resolution {
        Resolution { per_panel: self.grid_nodes, ..Resolution::default() }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

fn resolve(flags: &Flags) -> Result<RunConfig, Failure> {
    let file: FileConfig = match &flags.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| invalid(format!("bad config {}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let family: Family = flags.family.clone().or(file.family).unwrap_or_else(|| "gaussian".into()).parse()?;
    let beta = flags.beta.or(file.beta).unwrap_or(2);
    let n = flags.n.clone().or(file.n.map(OneOrMany::into_vec)).unwrap_or_else(|| vec![10]);
    let alpha = flags.alpha.or(file.alpha).unwrap_or(1.0);
    let stat_family: StatFamily = flags.stat.clone().or(file.stat).unwrap_or_else(|| "gaussian".into()).parse()?;
    let stat = TestFunction::new(
        stat_family,
        flags.amplitude.or(file.amplitude).unwrap_or(1.0),
        flags.center.or(file.center).unwrap_or(0.0),
        flags.width.or(file.width).unwrap_or(1.0),
    )?;
    let lambda = flags.lambda.clone().or(file.lambda.map(OneOrMany::into_vec)).unwrap_or_else(|| vec![0.5]);
    if n.is_empty() || lambda.is_empty() {
        return Err(invalid("N and lambda lists must be nonempty"));
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(invalid("lambda values must be finite"));
    }
    let grid_nodes = flags.grid_nodes.or(file.grid_nodes).unwrap_or(16);
    if !(4..=64).contains(&grid_nodes) {
        return Err(invalid(format!("grid nodes per panel must lie in 4..=64, got {grid_nodes}")));
    }
    let method: Method = flags.method.clone().or(file.method).unwrap_or_else(|| "tridiagonal".into()).parse()?;
    let format = match flags.format.clone().or(file.format).as_deref().unwrap_or("json") {
        "json" => Format::Json,
        "csv" => Format::Csv,
        other => return Err(invalid(format!("unknown format '{other}'"))),
    };
    let cfg = RunConfig {
        family,
        beta,
        n,
        alpha: if family == Family::Gaussian { 0.0 } else { alpha },
        stat,
        lambda,
        grid_nodes,
        seed: flags.seed.or(file.seed).unwrap_or(0),
        samples: flags.samples.or(file.samples).unwrap_or(0),
        method,
        format,
        out: flags.out.clone().or(file.out),
    };
    cfg.specs()?;
    Ok(cfg)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt_f64(x)).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

/// Re-serialize every float of a serde value with 17 significant digits.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map(num).unwrap_or(Value::Number(n)),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    normalize(serde_json::to_value(t).unwrap_or(Value::Null))
}

type Row = Map<String, Value>;

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

struct Report {
    command: &'static str,
    rows: Vec<Row>,
    extra: Map<String, Value>,
}

fn render(cfg: &RunConfig, report: &Report) -> Result<Vec<u8>, Failure> {
    let config = to_value(cfg);
    match cfg.format {
        Format::Json => {
            let mut top = Map::new();
            top.insert("tool".into(), Value::String("rmt-linstats".into()));
            top.insert("version".into(), Value::String(VERSION.into()));
            top.insert("command".into(), Value::String(report.command.into()));
            top.insert("config".into(), config);
            for (k, v) in &report.extra {
                top.insert(k.clone(), v.clone());
            }
            top.insert("rows".into(), Value::Array(report.rows.iter().cloned().map(Value::Object).collect()));
            let mut s = serde_json::to_string_pretty(&Value::Object(top)).map_err(|e| Failure { code: 1, message: e.to_string() })?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# rmt-linstats {VERSION} {}", report.command).ok();
            writeln!(buf, "# config {config}").ok();
            for (k, v) in &report.extra {
                writeln!(buf, "# {k} {v}").ok();
            }
            let flat: Vec<Vec<(String, String)>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut out = Vec::new();
                    flatten_into("", &Value::Object(r.clone()), &mut out);
                    out
                })
                .collect();
            let mut header: Vec<String> = Vec::new();
            for row in &flat {
                for (k, _) in row {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| Failure { code: 1, message: e.to_string() };
            w.write_record(&header).map_err(csv_err)?;
            for row in &flat {
                let rec: Vec<&str> = header.iter().map(|h| row.iter().find(|(k, _)| k == h).map(|(_, v)| v.as_str()).unwrap_or("")).collect();
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Failure { code: 1, message: e.to_string() })?;
            drop(w);
            Ok(buf)
        }
    }
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure { code: 1, message: format!("output: {e}") };
    match &cfg.out {
        Some(p) => std::fs::write(p, bytes).map_err(io),
        None => std::io::stdout().write_all(bytes).map_err(io),
    }
}

fn batch_for(cfg: &RunConfig, spec: &EnsembleSpec) -> Result<Option<SampleBatch>, Failure> {
    if cfg.samples == 0 {
        return Ok(None);
    }
    Ok(Some(sample(spec, cfg.samples, cfg.seed, cfg.method)?))
}

fn cmd_mgf(cfg: &RunConfig) -> Result<Report, Failure> {
    let specs = cfg.specs()?;
    let batches: Vec<Option<SampleBatch>> = specs.iter().map(|s| batch_for(cfg, s)).collect::<Result<_, _>>()?;
    let res = cfg.resolution();
    let jobs: Vec<(usize, f64)> = (0..specs.len()).flat_map(|i| cfg.lambda.iter().map(move |&l| (i, l))).collect();
    let rows: Vec<Result<Row, Failure>> = jobs
        .par_iter()
        .map(|&(i, lambda)| {
            let spec = &specs[i];
            let stat = Statistic::scaled(spec, cfg.stat);
            let (g, disc, bf) = if spec.beta == 2 {
                let v = mgf_beta2(spec, &stat, lambda, &res)?;
                (v.value, v.discrepancy, v.boundary_factor)
            } else {
                let v = mgf_squared(spec, &stat, lambda, &res)?;
                if v.value < 0.0 {
                    return Err(Error::Numerical(format!("{spec}: negative [G]^2 = {} at lambda = {lambda}", v.value)).into());
                }
                let g = v.value.sqrt();
                (g, v.discrepancy / (2.0 * g), v.boundary_factor)
            };
            let mut row = Row::new();
            row.insert("n".into(), Value::from(spec.n));
            row.insert("lambda".into(), num(lambda));
            row.insert("g_determinant".into(), num(g));
            row.insert("discrepancy".into(), num(disc));
            row.insert("boundary_factor".into(), num(bf));
            if let Some(b) = &batches[i] {
                let e = mgf_estimate(b, &stat, lambda)?;
                row.insert("g_monte_carlo".into(), num(e.value));
                row.insert("g_monte_carlo_stderr".into(), num(e.stderr));
                row.insert("mc_minus_determinant".into(), num(e.value - g));
            }
            Ok(row)
        })
        .collect();
    Ok(Report { command: "mgf", rows: rows.into_iter().collect::<Result<_, _>>()?, extra: Map::new() })
}

fn cmd_meanvar(cfg: &RunConfig) -> Result<Report, Failure> {
    let specs = cfg.specs()?;
    let res = cfg.resolution();
    let ares = AsymptResolution { per_panel: cfg.grid_nodes, ..AsymptResolution::default() };
    let rows: Vec<Result<Row, Failure>> = specs
        .par_iter()
        .map(|spec| {
            let stat = Statistic::scaled(spec, cfg.stat);
            let a = expansion(spec, &cfg.stat, &ares)?;
            let fin = finite_moments(spec, &stat, &res)?;
            let mut row = Row::new();
            row.insert("n".into(), Value::from(spec.n));
            let mut asy = Map::new();
            asy.insert("mean".into(), num(a.mean));
            asy.insert("variance".into(), num(a.variance));
            asy.insert("leading_mean".into(), num(a.leading_mean()));
            asy.insert("leading_variance".into(), num(a.leading_variance()));
            asy.insert("variance_negative".into(), Value::Bool(a.variance_is_negative()));
            asy.insert("discrepancy".into(), num(a.discrepancy));
            let terms = |ts: &[rmt_linstats::asympt::Term]| Value::Object(ts.iter().map(|t| (t.label.clone(), num(t.value))).collect());
            asy.insert("mean_terms".into(), terms(&a.mean_terms));
            asy.insert("variance_terms".into(), terms(&a.variance_terms));
            row.insert("asymptotic".into(), Value::Object(asy));
            row.insert("finite".into(), to_value(&fin));
            if let Some(b) = batch_for(cfg, spec)? {
                row.insert("monte_carlo".into(), to_value(&linstat_moments(&b, &stat)?));
            }
            Ok(row)
        })
        .collect();
    Ok(Report { command: "meanvar", rows: rows.into_iter().collect::<Result<_, _>>()?, extra: Map::new() })
}

fn cmd_kernel(cfg: &RunConfig, xmin: Option<f64>, xmax: Option<f64>, points: usize) -> Result<Report, Failure> {
    let spec = cfg.specs()?[0];
    let (n, alpha) = (spec.n, spec.alpha);
    let (kind, order) = match (spec.family, spec.beta) {
        (Family::Gaussian, 4) => (CdKind::Gse { n }, None),
        (Family::Gaussian, _) => (CdKind::Goe { n }, None),
        (Family::Laguerre, 4) => (CdKind::Lse { n, alpha }, Some(alpha - 1.0)),
        (Family::Laguerre, 1) => (CdKind::Loe { n, alpha }, Some(alpha + 1.0)),
        (Family::Laguerre, _) => (CdKind::Lue { n, alpha }, Some(alpha)),
    };
    let (d0, d1) = if order.is_some() { (0.2, 4.0) } else { (-3.0, 3.0) };
    let (a, b) = (xmin.unwrap_or(d0), xmax.unwrap_or(d1));
    if !(a < b) || points < 2 || points > 1000 {
        return Err(invalid("kernel grid needs xmin < xmax and 2..=1000 points"));
    }
    if order.is_some() && a < 0.0 {
        return Err(invalid("Laguerre kernels live on x >= 0"));
    }
    let k = CdKernel::new(kind)?;
    let xs: Vec<f64> = (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect();
    let rows: Vec<Result<Row, Failure>> = xs
        .par_iter()
        .flat_map_iter(|&x| xs.iter().map(move |&y| (x, y)))
        .map(|(x, y)| {
            let limit = match order {
                None => sine_kernel(x, y),
                Some(o) => bessel_kernel(o, x, y)?,
            };
            let v = k.scaled(x, y);
            let mut row = Row::new();
            row.insert("x".into(), num(x));
            row.insert("y".into(), num(y));
            row.insert("kernel".into(), num(v));
            row.insert("limit".into(), num(limit));
            row.insert("difference".into(), num(v - limit));
            Ok(row)
        })
        .collect();
    Ok(Report { command: "kernel", rows: rows.into_iter().collect::<Result<_, _>>()?, extra: Map::new() })
}

fn cmd_sample(cfg: &RunConfig) -> Result<Report, Failure> {
    let spec = cfg.specs()?[0];
    let count = if cfg.samples == 0 { 1000 } else { cfg.samples };
    let b = sample(&spec, count, cfg.seed, cfg.method)?;
    let rows = b
        .samples
        .iter()
        .map(|s| {
            let mut row = Row::new();
            for (j, x) in s.iter().enumerate() {
                row.insert(format!("x{}", j + 1), num(*x));
            }
            row
        })
        .collect();
    let mut extra = Map::new();
    if !b.chains.is_empty() {
        extra.insert("chains".into(), to_value(&b.chains));
    }
    Ok(Report { command: "sample", rows, extra })
}

fn cmd_verify(suite: &str) -> Result<(Report, bool), Failure> {
    let suite: Suite = suite.parse()?;
    let checks = verify::run(suite);
    let ok = checks.iter().all(|c| c.pass);
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {} (error {} > {})", c.suite, c.name, c.error, c.tolerance);
    }
    let rows = checks
        .iter()
        .map(|c| match to_value(c) {
            Value::Object(m) => m,
            _ => Row::new(),
        })
        .collect();
    let mut extra = Map::new();
    extra.insert("passed".into(), Value::Bool(ok));
    Ok((Report { command: "verify", rows, extra }, ok))
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().map_err(|_| invalid(format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(invalid(format!("{THREADS_VAR} must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| invalid(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    init_threads()?;
    let cfg = resolve(&cli.opts)?;
    let (report, ok) = match cli.command {
        Command::Mgf => (cmd_mgf(&cfg)?, true),
        Command::Meanvar => (cmd_meanvar(&cfg)?, true),
        Command::Kernel { xmin, xmax, points } => (cmd_kernel(&cfg, xmin, xmax, points)?, true),
        Command::Sample => (cmd_sample(&cfg)?, true),
        Command::Verify { suite } => cmd_verify(&suite)?,
    };
    emit(&cfg, &render(&cfg, &report)?)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("rmt-linstats: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
