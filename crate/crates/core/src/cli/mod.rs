//! The `sphtx` experiment runner.
//!
//! Exit status: 0 on success, 2 when a check-style subcommand computes fine
//! but misses its tolerance, 1 on any error (with `{"error", "message"}`
//! JSON on standard error). Parameters come from built-in defaults, then a
//! `--config` TOML file, then flags, each layer overriding the previous.

pub mod config;
pub mod convergence;
pub mod function;
pub mod output;

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser};
use num_complex::Complex64;
use serde_json::{json, Value};

pub use config::{ExperimentConfig, Subcommand};
pub use convergence::{convergence_study, Study, StudyResult, StudySpec};
pub use function::FunctionSpec;

use crate::diff_ops::{weighted_laplacian, weighted_laplacian_factored, weighted_laplacian_fd, FdOptions, WeightedOpSpec};
use crate::error::{Error, Result};
use crate::inversion::{invert_cosine1, invert_funk, invert_general_between, invert_general_outside, InversionConfig};
use crate::spectral::MultiplierTable;
use crate::sphere::{build_grid, GridFunction};
use crate::stiefel::{check_identity, Identity, StiefelCheckParams, MIN_SAMPLES};
use crate::transforms::{
    cosine_transform, funk_transform, log_cosine_transform, log_sine_transform, sine_transform, Path,
    TransformParams,
};
use output::{float, Csv};

#[derive(Debug, Parser)]
#[command(name = "sphtx", version, about = "Spherical cosine, Funk, sine and Stiefel transforms: tables, transforms, inversions and checks")]
pub struct Cli {
    /// Flat TOML file of parameters; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Multiplier table of an operator (CSV).
    Multipliers(Flags),
    /// Forward transform of an input function (per-node CSV).
    Forward(Flags),
    /// Weighted Beltrami-Laplace operator by one path against the spectral one (per-node CSV).
    Diffop(Flags),
    /// Inversion round trip (JSON report, optional per-node CSV).
    Invert(Flags),
    /// Convergence study (CSV).
    Convergence(Flags),
    /// Frame-transform identity check (JSON report).
    StiefelCheck(Flags),
}

/// Flags shared by all subcommands; each maps to one config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Ambient dimension (functions live on S^{n-1}).
    #[arg(long)]
    pub n: Option<usize>,
    /// Frame size of Stiefel transforms.
    #[arg(long)]
    pub k: Option<usize>,
    /// Band limit.
    #[arg(long = "J")]
    pub max_degree: Option<usize>,
    /// Real part of λ.
    #[arg(long, visible_alias = "lambda-re", allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Imaginary part of λ.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_im: Option<f64>,
    /// Order ℓ of the weighted operator.
    #[arg(long)]
    pub ell: Option<u32>,
    /// Polar nodes of the sphere grid.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed of all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Evaluation path: quadrature|spectral|auto (forward, invert), spectral|factored|fd (diffop).
    #[arg(long)]
    pub path: Option<String>,
    /// Tolerance of check-style subcommands.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// cosine|sine|funk|log-cosine|log-sine|delta-op|beltrami (multipliers).
    #[arg(long)]
    pub operator: Option<String>,
    /// cosine|funk|logcos|sine|logsine (forward).
    #[arg(long)]
    pub transform: Option<String>,
    /// Input function: zonal:j=<j>,pole=<x,y,..> | const:<c> | random-even:J=<J>,seed=<s>.
    #[arg(long, visible_alias = "function")]
    pub input: Option<String>,
    /// funk|cosine1|general-between|general-outside (invert).
    #[arg(long)]
    pub theorem: Option<String>,
    /// 4.8|4.9|thm4.1-i|thm4.1-ii|4.13|4.14 (stiefel-check).
    #[arg(long)]
    pub identity: Option<String>,
    /// fd-beltrami|quadrature|mc-dual-funk (convergence).
    #[arg(long)]
    pub study: Option<String>,
    /// Comma-separated sweep values (convergence).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,
    /// Monte-Carlo replicates (convergence).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Highest band limit an inversion accepts.
    #[arg(long)]
    pub degree_ceiling: Option<usize>,
    /// Main output file; standard output when absent.
    #[arg(long, short = 'o', visible_alias = "out")]
    pub output: Option<PathBuf>,
    /// Per-node CSV of the inversion.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Subcommand, Flags) {
        match self {
            Command::Multipliers(f) => (Subcommand::Multipliers, f),
            Command::Forward(f) => (Subcommand::Forward, f),
            Command::Diffop(f) => (Subcommand::Diffop, f),
            Command::Invert(f) => (Subcommand::Invert, f),
            Command::Convergence(f) => (Subcommand::Convergence, f),
            Command::StiefelCheck(f) => (Subcommand::StiefelCheck, f),
        }
    }
}

impl Flags {
    fn into_config(self, subcommand: Subcommand) -> ExperimentConfig {
        ExperimentConfig {
            subcommand: Some(subcommand),
            n: self.n,
            k: self.k,
            lambda: self.lambda,
            lambda_im: self.lambda_im,
            ell: self.ell,
            max_degree: self.max_degree,
            resolution: self.resolution,
            samples: self.samples,
            seed: self.seed,
            h: self.h,
            path: self.path,
            tolerance: self.tolerance,
            operator: self.operator,
            transform: self.transform,
            input: self.input,
            theorem: self.theorem,
            identity: self.identity,
            study: self.study,
            values: self.values,
            replicates: self.replicates,
            degree_ceiling: self.degree_ceiling,
            output: self.output,
            csv: self.csv,
        }
    }
}

/// Text artifacts of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Main artifact, written to `output` or standard output.
    pub main: String,
    /// Per-node CSV written to `csv`, when requested.
    pub csv: Option<String>,
    /// False when a check-style subcommand missed its tolerance.
    pub passed: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;

const MAX_BAND: usize = 64;
const DEFAULT_SEED: u64 = 1;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Checks the numeric keys before any computation.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.subcommand.is_none() {
        return Err(invalid("no subcommand given"));
    }
    if let Some(n) = cfg.n {
        if n < 3 {
            return Err(invalid(format!("dimension n = {n} must be at least 3")));
        }
        if let Some(k) = cfg.k {
            if k == 0 || k >= n {
                return Err(invalid(format!("frame size k = {k} must satisfy 1 <= k <= n-1")));
            }
        }
    }
    for (name, x) in [("lambda", cfg.lambda), ("lambda-im", cfg.lambda_im), ("h", cfg.h), ("tolerance", cfg.tolerance)] {
        if x.is_some_and(|x| !x.is_finite()) {
            return Err(invalid(format!("{name} must be finite")));
        }
    }
    if cfg.max_degree.is_some_and(|j| j > MAX_BAND) {
        return Err(invalid(format!("band limit J must not exceed {MAX_BAND}")));
    }
    if cfg.resolution.is_some_and(|r| r < 4) {
        return Err(invalid("resolution must be at least 4"));
    }
    if let Some(s) = cfg.samples {
        if s < MIN_SAMPLES {
            return Err(Error::InsufficientSamples { got: s, min: MIN_SAMPLES });
        }
    }
    if cfg.h.is_some_and(|h| !(1e-4..=1e-2).contains(&h)) {
        return Err(invalid("finite-difference step h must lie in [1e-4, 1e-2]"));
    }
    if cfg.tolerance.is_some_and(|t| t <= 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if cfg.seed.is_some_and(|s| s > i64::MAX as u64) {
        return Err(invalid(format!("seed must not exceed {}", i64::MAX)));
    }
    if let Some(text) = &cfg.input {
        text.parse::<FunctionSpec>()?;
    }
    Ok(())
}

fn lambda(cfg: &ExperimentConfig, default: f64) -> Complex64 {
    Complex64::new(cfg.lambda.unwrap_or(default), cfg.lambda_im.unwrap_or(0.0))
}

fn input_spec(cfg: &ExperimentConfig, default_band: usize) -> Result<FunctionSpec> {
    match &cfg.input {
        Some(text) => text.parse(),
        None => Ok(FunctionSpec::RandomEven {
            max_degree: cfg.max_degree.unwrap_or(default_band),
            seed: None,
        }),
    }
}

fn sample_input(cfg: &ExperimentConfig, n: usize, default_band: usize) -> Result<GridFunction> {
    let spec = input_spec(cfg, default_band)?;
    let resolution = cfg.resolution.unwrap_or((spec.band_limit() + 2).max(6));
    let grid = Arc::new(build_grid(n, resolution)?);
    spec.sample(&grid, cfg.seed.unwrap_or(DEFAULT_SEED))
}

fn c_fields(z: Complex64) -> [String; 2] {
    [float(z.re), float(z.im)]
}

fn node_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn with_meta(mut value: Value, hash: &str, passed: Option<bool>) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert("version".into(), json!(output::VERSION));
        map.insert("config_hash".into(), json!(hash));
        if let Some(p) = passed {
            map.insert("passed".into(), json!(p));
        }
    }
    value
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Parse(e.to_string()))
}

fn multipliers(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let n = cfg.n.unwrap_or(3);
    let max_degree = cfg.max_degree.unwrap_or(8);
    let lambda = lambda(cfg, 1.0);
    let ell = cfg.ell.unwrap_or(1);
    let table = match cfg.operator.as_deref().unwrap_or("cosine") {
        "cosine" => MultiplierTable::cosine(n, max_degree, lambda)?,
        "sine" => MultiplierTable::sine(n, max_degree, lambda)?,
        "funk" => MultiplierTable::funk(n, max_degree)?,
        "log-cosine" | "logcos" => MultiplierTable::log_cosine(n, max_degree)?,
        "log-sine" | "logsine" => MultiplierTable::log_sine(n, max_degree)?,
        "delta-op" => MultiplierTable::delta_op(n, max_degree, lambda, ell)?,
        "beltrami" => MultiplierTable::beltrami(n, max_degree)?,
        other => return Err(Error::Parse(format!("unknown operator '{other}'"))),
    };
    let mut csv = Csv::new(hash, &[], &["operator", "n", "j", "lambda_re", "lambda_im", "ell", "value_re", "value_im"]);
    let name = table.tag.name();
    let (lre, lim) = match table.lambda {
        Some(l) => (float(l.re), float(l.im)),
        None => (String::new(), String::new()),
    };
    let ell = table.ell.map(|e| e.to_string()).unwrap_or_default();
    for (j, v) in table.values.iter().enumerate() {
        if j == 0 && table.mean_excluded {
            continue;
        }
        let [vre, vim] = c_fields(*v);
        csv.row(&[name.clone(), n.to_string(), j.to_string(), lre.clone(), lim.clone(), ell.clone(), vre, vim]);
    }
    Ok(RunOutput {
        main: csv.finish(),
        csv: None,
        passed: true,
    })
}

fn forward(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let n = cfg.n.unwrap_or(3);
    let path: Path = cfg.path.as_deref().unwrap_or("auto").parse()?;
    let lambda = lambda(cfg, 1.0);
    let transform = cfg.transform.as_deref().unwrap_or("cosine");
    let params = TransformParams::new(lambda, path);
    let apply: fn(&GridFunction, &TransformParams) -> Result<GridFunction> = match transform {
        "cosine" => cosine_transform,
        "sine" => sine_transform,
        "funk" => |f, p| funk_transform(f, p.path),
        "logcos" | "log-cosine" => |f, p| log_cosine_transform(f, p.path),
        "logsine" | "log-sine" => |f, p| log_sine_transform(f, p.path),
        other => return Err(Error::Parse(format!("unknown transform '{other}'"))),
    };
    let f = sample_input(cfg, n, 6)?;
    let g = apply(&f, &params)?;
    let mut columns = node_columns(n);
    columns.extend(["input_re", "input_im", "output_re", "output_im"].map(String::from));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = Csv::new(hash, &[format!("transform={transform} path={}", path.name())], &cols);
    for (i, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        let mut row: Vec<String> = f.grid().node(i).iter().map(|&x| float(x)).collect();
        row.extend(c_fields(*a));
        row.extend(c_fields(*b));
        csv.row(&row);
    }
    Ok(RunOutput {
        main: csv.finish(),
        csv: None,
        passed: true,
    })
}

fn diffop(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let n = cfg.n.unwrap_or(3);
    let spec = WeightedOpSpec::new(lambda(cfg, 1.0), cfg.ell.unwrap_or(1));
    let path = cfg.path.as_deref().unwrap_or("spectral");
    let f = sample_input(cfg, n, 6)?;
    let reference = weighted_laplacian(&f, &spec)?;
    let (value, default_tol) = match path {
        "spectral" => (reference.clone(), 1e-8),
        "factored" => (weighted_laplacian_factored(&f, &spec)?, 1e-8),
        "fd" => {
            let opts = FdOptions {
                h: cfg.h.unwrap_or(if spec.ell >= 2 { 1e-2 } else { 1e-3 }),
                richardson: spec.ell >= 2,
            };
            (weighted_laplacian_fd(&f, &spec, &opts)?, 1e-3)
        }
        other => return Err(Error::Parse(format!("unknown diffop path '{other}' (spectral, factored, fd)"))),
    };
    let tol = cfg.tolerance.unwrap_or(default_tol);
    let scale = reference.max_abs().max(1.0);
    let rel = value.max_abs_diff(&reference) / scale;
    let passed = rel <= tol;
    let mut columns = node_columns(n);
    columns.extend(["reference_re", "reference_im", "value_re", "value_im", "abs_diff"].map(String::from));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let comments = [format!(
        "path={path} max_relative_error={} tolerance={} passed={passed}",
        float(rel),
        float(tol)
    )];
    let mut csv = Csv::new(hash, &comments, &cols);
    for (i, (r, v)) in reference.values().iter().zip(value.values()).enumerate() {
        let mut row: Vec<String> = f.grid().node(i).iter().map(|&x| float(x)).collect();
        row.extend(c_fields(*r));
        row.extend(c_fields(*v));
        row.push(float((v - r).norm()));
        csv.row(&row);
    }
    Ok(RunOutput {
        main: csv.finish(),
        csv: None,
        passed,
    })
}

fn invert(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let n = cfg.n.unwrap_or(3);
    let theorem = cfg.theorem.as_deref().unwrap_or("funk");
    let path: Path = cfg.path.as_deref().unwrap_or("spectral").parse()?;
    let icfg = InversionConfig {
        degree_ceiling: cfg.degree_ceiling.unwrap_or(crate::inversion::DEFAULT_DEGREE_CEILING),
        funk_path: Path::Spectral,
    };
    let lambda = lambda(cfg, 0.5);
    let ell = cfg.ell.unwrap_or(1);
    let f = sample_input(cfg, n, 8)?;
    let odd = n % 2 == 1;
    let (mut outcome, default_tol) = match theorem {
        "funk" => (invert_funk(&funk_transform(&f, path)?, &icfg)?, if odd { 1e-6 } else { 1e-9 }),
        "cosine1" => {
            let phi = cosine_transform(&f, &TransformParams::real(1.0, path))?;
            (invert_cosine1(&phi, &icfg)?, if odd { 1e-6 } else { 1e-8 })
        }
        "general-between" | "between" => {
            let phi = cosine_transform(&f, &TransformParams::new(lambda + 2.0 * ell as f64, path))?;
            (invert_general_between(&phi, lambda, ell, &icfg)?, 1e-8)
        }
        "general-outside" | "outside" => {
            let phi = cosine_transform(&f, &TransformParams::new(lambda, path))?;
            (invert_general_outside(&phi, lambda, ell, &icfg)?, 1e-8)
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown theorem '{other}' (funk, cosine1, general-between, general-outside)"
            )))
        }
    };
    outcome.score(&f)?;
    let tol = cfg.tolerance.unwrap_or(default_tol);
    let scale = f.max_abs().max(1.0);
    let r = &outcome.report;
    let passed = r.max_error.is_some_and(|e| e <= tol * scale) && r.branch_agreement.is_none_or(|a| a <= tol * scale);
    let mut report = to_value(&outcome.report)?;
    if let Value::Object(map) = &mut report {
        map.insert("tolerance".into(), json!(tol));
        map.insert("input_max_abs".into(), json!(f.max_abs()));
    }
    let main = output::json(&with_meta(report, hash, Some(passed)));
    let csv = cfg.csv.as_ref().map(|_| {
        let mut columns = node_columns(n);
        columns.extend(["input_re", "input_im", "reconstruction_re", "reconstruction_im"].map(String::from));
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut csv = Csv::new(hash, &[format!("theorem={theorem}")], &cols);
        for (i, (a, b)) in f.values().iter().zip(outcome.reconstruction.values()).enumerate() {
            let mut row: Vec<String> = f.grid().node(i).iter().map(|&x| float(x)).collect();
            row.extend(c_fields(*a));
            row.extend(c_fields(*b));
            csv.row(&row);
        }
        csv.finish()
    });
    Ok(RunOutput { main, csv, passed })
}

fn convergence(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let study: Study = cfg.study.as_deref().unwrap_or("fd-beltrami").parse()?;
    let default_n = if study == Study::McDualFunk { 4 } else { 3 };
    let spec = StudySpec {
        study,
        values: cfg.values.clone().unwrap_or_else(|| study.default_values()),
        n: cfg.n.unwrap_or(default_n),
        k: cfg.k.unwrap_or(2),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        replicates: cfg.replicates.unwrap_or(convergence::DEFAULT_REPLICATES),
    };
    if study == Study::McDualFunk && spec.k >= spec.n {
        return Err(invalid(format!("frame size k = {} must satisfy 1 <= k <= n-1", spec.k)));
    }
    let r = convergence_study(&spec)?;
    let mut comments = vec![format!("study={}", study.name())];
    if let (Some(s), Some((lo, hi))) = (r.slope, r.target) {
        comments.push(format!("slope={} target=[{}, {}]", float(s), float(lo), float(hi)));
    }
    comments.push(format!("passed={}", r.passed));
    let mut csv = Csv::new(hash, &comments, &[study.parameter(), "error"]);
    for (x, e) in &r.rows {
        csv.row(&[float(*x), float(*e)]);
    }
    Ok(RunOutput {
        main: csv.finish(),
        csv: None,
        passed: r.passed,
    })
}

fn stiefel_check(cfg: &ExperimentConfig, hash: &str) -> Result<RunOutput> {
    let identity: Identity = cfg.identity.as_deref().unwrap_or("4.8").parse()?;
    let n = cfg.n.unwrap_or(4);
    let mut params = StiefelCheckParams::new(n, cfg.k.unwrap_or(2.min(n - 1)));
    params.lambda = lambda(cfg, 1.0);
    params.samples = cfg.samples.unwrap_or(params.samples);
    params.seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    params.spectral_degree = cfg.max_degree.unwrap_or(params.spectral_degree);
    let report = check_identity(identity, &params)?;
    let passed = report.passed();
    let mut value = to_value(&report)?;
    if let Value::Object(map) = &mut value {
        map.insert("spectral_passed".into(), json!(report.spectral_passed()));
        map.insert("mc_passed".into(), json!(report.mc_passed()));
    }
    Ok(RunOutput {
        main: output::json(&with_meta(value, hash, Some(passed))),
        csv: None,
        passed,
    })
}

/// Runs one experiment and returns its artifacts without writing them.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    validate(cfg)?;
    let hash = cfg.hash()?;
    match cfg.subcommand.ok_or_else(|| invalid("no subcommand given"))? {
        Subcommand::Multipliers => multipliers(cfg, &hash),
        Subcommand::Forward => forward(cfg, &hash),
        Subcommand::Diffop => diffop(cfg, &hash),
        Subcommand::Invert => invert(cfg, &hash),
        Subcommand::Convergence => convergence(cfg, &hash),
        Subcommand::StiefelCheck => stiefel_check(cfg, &hash),
    }
}

fn write_artifact(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Runs an experiment, writes its artifacts and returns the exit status.
pub fn run(cfg: &ExperimentConfig) -> Result<i32> {
    let out = execute(cfg)?;
    write_artifact(cfg.output.as_ref(), &out.main)?;
    if let (Some(path), Some(text)) = (cfg.csv.as_ref(), out.csv.as_ref()) {
        write_artifact(Some(path), text)?;
    }
    Ok(if out.passed { EXIT_OK } else { EXIT_TOLERANCE })
}

/// Error JSON printed on standard error.
pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::to_string(&json!({"error": kind, "message": message})).unwrap_or_default()
}

/// Parses a command line, merges it with the config file and runs it.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprintln!("{}", error_json("invalid-argument", e.to_string().trim()));
            return EXIT_ERROR;
        }
    };
    let (sub, flags) = cli.command.split();
    let result = cli
        .config
        .as_deref()
        .map(ExperimentConfig::load)
        .transpose()
        .and_then(|file| run(&file.unwrap_or_default().merged(flags.into_config(sub))));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            EXIT_ERROR
        }
    }
}
