//! `dirichlet`: command-line front end for the Dirichlet-improvability
//! numerics. Data goes to stdout (or `--out`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dirichlet_core::alpha::Alpha;
use dirichlet_core::critical::{critical_determinant, locus_csv, trace_critical_locus};
use dirichlet_core::dani::{PsiFamily, PsiSpec, RateFunction};
use dirichlet_core::experiments::{
    condition_csv, condition_table, construct_counterexample, zero_one_csv, zero_one_experiment,
};
use dirichlet_core::flow::{dirichlet_check, DEFAULT_GRID_STEP};
use dirichlet_core::hyperbolic::{distance_to_critical, point_of_lattice, reduce, HalfPlanePoint};
use dirichlet_core::lattice::known_critical_determinant;
use dirichlet_core::numfmt::sig12;
use dirichlet_core::{Lattice, NormDescriptor, NormSpec};

#[derive(Parser, Debug)]
#[command(name = "dirichlet", version, about = "Norm-sensitive Dirichlet improvability numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical determinant of a planar norm, optionally with its critical locus.
    Critical {
        /// Norm descriptor: inline JSON or a path to a JSON file.
        #[arg(long, default_value = r#"{"kind":"euclidean"}"#)]
        norm: String,
        /// Trace the hexagon configurations at this many angles.
        #[arg(long)]
        trace: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized shortest length δ of a unimodular lattice.
    Delta {
        /// Basis as row-major JSON, e.g. [[1,0.5],[0,1]].
        #[arg(long)]
        basis: String,
        #[arg(long, default_value = r#"{"kind":"euclidean"}"#)]
        norm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the trajectory of α for target hits up to flow time S.
    Check {
        /// α as p/q, an exact decimal, or quad:a,b,d,c for (a + b√d)/c.
        #[arg(long)]
        alpha: String,
        /// ψ as scaled:c=…, powergap:k=…, loggap:k=… (optional ,t_start=…) or table:<csv-file>.
        #[arg(long)]
        psi: String,
        #[arg(long, default_value = r#"{"kind":"euclidean"}"#)]
        norm: String,
        /// Flow-time horizon S.
        #[arg(long)]
        smax: f64,
        /// Start of the window that must be hit-free (default S/2).
        #[arg(long)]
        sstar: Option<f64>,
        /// Grid step (default: adaptive from 0.01).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a point of the upper half-plane into the standard fundamental domain.
    Reduce {
        /// The point as "x,y" with y > 0.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Locate a unimodular planar lattice on the modular surface.
    Locate {
        /// Basis as row-major JSON.
        #[arg(long)]
        basis: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the Dani correspondence t ↦ s ↦ r(s).
    Dani {
        #[arg(long)]
        psi: String,
        /// First flow time (default: s at t_start).
        #[arg(long)]
        from: Option<f64>,
        #[arg(long, default_value_t = 20.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo hit fractions over windows [S, 2S] for the Euclidean norm.
    Zeroone {
        #[arg(long)]
        psi: String,
        /// Number of sampled α.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Window starts S, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        windows: Vec<f64>,
        /// Seed of the sampler (required).
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        grid_step: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an α outside D(ψ) together with a per-stage certificate.
    Counterexample {
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial sums of the Euclidean and sup-norm series for several ψ.
    Table {
        /// One or more ψ specifications.
        #[arg(long, required = true)]
        psi: Vec<String>,
        /// Cutoffs K, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
        k: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Numeric(String),
}

impl From<dirichlet_core::Error> for CliError {
    fn from(e: dirichlet_core::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file.
fn json_arg(arg: &str) -> CliResult<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| invalid(format!("cannot read {arg}: {e}")))
    }
}

fn parse_norm(arg: &str) -> CliResult<NormDescriptor> {
    let spec: NormSpec =
        serde_json::from_str(&json_arg(arg)?).map_err(|e| invalid(format!("bad norm descriptor: {e}")))?;
    Ok(NormDescriptor::new(spec)?)
}

fn parse_basis(arg: &str) -> CliResult<Lattice> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&json_arg(arg)?).map_err(|e| invalid(format!("bad basis: {e}")))?;
    Ok(Lattice::from_rows(&rows)?)
}

fn parse_alpha(arg: &str) -> CliResult<Alpha> {
    arg.parse::<Alpha>().map_err(|e| invalid(format!("bad --alpha {arg:?}: {e}")))
}

/// Two numeric columns `t,ψ(t)`; lines that do not parse (headers,
/// comments) are skipped.
fn read_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let (mut ts, mut values) = (Vec::new(), Vec::new());
    for line in text.lines() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 2 {
            continue;
        }
        if let (Ok(t), Ok(v)) = (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            ts.push(t);
            values.push(v);
        }
    }
    Ok((ts, values))
}

fn parse_psi(arg: &str, m: u32, n: u32) -> CliResult<PsiSpec> {
    if let Some(path) = arg.strip_prefix("table:") {
        let (ts, values) = read_table(Path::new(path))?;
        return Ok(PsiSpec::new(PsiFamily::Tabulated { ts, values }, None, m, n)?);
    }
    Ok(PsiSpec::parse(arg, m, n)?)
}

fn critical_det_for(norm: &NormDescriptor) -> CliResult<f64> {
    match known_critical_determinant(norm) {
        Some(d) => Ok(d),
        None => Ok(critical_determinant(norm)?.delta),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be positive, got {v}")))
    }
}

#[derive(Serialize)]
struct DeltaReport {
    delta: f64,
    critical_determinant: f64,
    shortest_vector: dirichlet_core::ShortestVectorResult,
}

#[derive(Serialize)]
struct LocateReport {
    z_reduced: HalfPlanePoint,
    gamma: [[i64; 2]; 2],
    word: String,
    delta: f64,
    distance_to_critical: f64,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Critical { norm, trace, format, out } => {
            let norm = parse_norm(&norm)?;
            let crit = critical_determinant(&norm)?;
            let text = match (trace, format) {
                (Some(k), Format::Csv) => locus_csv(&trace_critical_locus(&norm, &crit, k)?),
                (Some(k), Format::Json) => to_json(&serde_json::json!({
                    "critical": crit,
                    "locus": trace_critical_locus(&norm, &crit, k)?,
                }))?,
                (None, Format::Csv) => format!("delta\n{}\n", sig12(crit.delta)),
                (None, Format::Json) => to_json(&crit)?,
            };
            emit(out.as_deref(), &text)
        }
        Command::Delta { basis, norm, out } => {
            let norm = parse_norm(&norm)?;
            let lattice = parse_basis(&basis)?;
            let crit = critical_det_for(&norm)?;
            let report = DeltaReport {
                delta: lattice.delta(&norm, crit)?,
                critical_determinant: crit,
                shortest_vector: lattice.shortest_vector(&norm)?,
            };
            emit(out.as_deref(), &to_json(&report)?)
        }
        Command::Check { alpha, psi, norm, smax, sstar, step, m, n, out } => {
            let alpha = parse_alpha(&alpha)?;
            let psi = parse_psi(&psi, m, n)?;
            let norm = parse_norm(&norm)?;
            check_positive("smax", smax)?;
            if let Some(h) = step {
                check_positive("step", h)?;
            }
            let rate = RateFunction::new(psi)?;
            let crit = critical_det_for(&norm)?;
            let s_star = sstar.unwrap_or(smax / 2.0);
            let report = dirichlet_check(&alpha, &rate, &norm, crit, s_star, smax, step)?;
            emit(out.as_deref(), &to_json(&report)?)
        }
        Command::Reduce { z, format } => {
            let (x, y) = z.split_once(',').ok_or_else(|| invalid(format!("--z must be \"x,y\", got {z:?}")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {v:?}")));
            let red = reduce(HalfPlanePoint::new(parse(x)?, parse(y)?)?)?;
            let text = match format {
                Format::Csv => {
                    let zr = red.z_reduced;
                    format!("{},{}\n{}\n", sig12(zr.x + 0.0), sig12(zr.y), red.word)
                }
                Format::Json => to_json(&red)?,
            };
            emit(None, &text)
        }
        Command::Locate { basis, out } => {
            let lattice = parse_basis(&basis)?;
            let red = point_of_lattice(&lattice)?;
            let report = LocateReport {
                z_reduced: red.z_reduced,
                gamma: red.gamma,
                word: red.word,
                delta: lattice.delta(&NormDescriptor::euclidean2(), dirichlet_core::hyperbolic::EUCLIDEAN_DELTA)?,
                distance_to_critical: distance_to_critical(&lattice)?,
            };
            emit(out.as_deref(), &to_json(&report)?)
        }
        Command::Dani { psi, from, to, step, m, n, out } => {
            check_positive("step", step)?;
            let rate = RateFunction::new(parse_psi(&psi, m, n)?)?;
            let from = from.unwrap_or(rate.s_start);
            if !(to >= from) {
                return Err(invalid(format!("--to {to} precedes --from {from}")));
            }
            let mut text = String::from("s,t,r\n");
            let count = ((to - from) / step + 1e-9).floor() as usize;
            for i in 0..=count {
                let s = from + step * i as f64;
                let t = rate.t_of_s(s)?;
                text.push_str(&format!("{},{},{}\n", sig12(s), sig12(t), sig12(rate.r(s)?)));
            }
            emit(out.as_deref(), &text)
        }
        Command::Zeroone { psi, n, windows, seed, grid_step, format, out } => {
            if n == 0 {
                return Err(invalid("--n must be at least 1"));
            }
            check_positive("grid-step", grid_step)?;
            let psi = parse_psi(&psi, 1, 1)?;
            let report = zero_one_experiment(&psi, n, &windows, seed, grid_step)?;
            let text = match format {
                Format::Csv => zero_one_csv(&report),
                Format::Json => to_json(&report)?,
            };
            emit(out.as_deref(), &text)
        }
        Command::Counterexample { psi, depth, out } => {
            let psi = parse_psi(&psi, 1, 1)?;
            let cert = construct_counterexample(&psi, depth)?;
            emit(out.as_deref(), &to_json(&cert)?)
        }
        Command::Table { psi, k, format, out } => {
            let psis = psi.iter().map(|p| parse_psi(p, 1, 1)).collect::<CliResult<Vec<_>>>()?;
            let rows = condition_table(&psis, &k)?;
            let text = match format {
                Format::Csv => condition_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
