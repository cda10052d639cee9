//! The `opconv` command line.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use opconv_core::matrix::DEFAULT_LOEWNER_TOL;
use opconv_core::means::MeanKind;
use opconv_core::outcome::{CheckOutcome, Verdict};
use opconv_core::posmaps::{MapDescriptor, PositiveMapSpec, TracialFunctional};
use opconv_core::verifier::{self, ids, reproduce_counterexample, FixedVariable};
use opconv_core::{CMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use opconv_core::funcalc::ScalarFunctionSpec;

use crate::campaign::run_campaign;
use crate::config::CampaignConfig;
use crate::error::{AppError, AppResult};
use crate::matrix_file;

pub const DEFAULT_REPORT_PATH: &str = "opconv-report.json";

/// Published value of `S # T` for the fixed 2x2 pair.
pub const REFERENCE_S_GEO_T: [[f64; 2]; 2] = [[1.85834, -0.63486], [-0.63486, 0.52569]];
/// Published eigenvalues of `(sqrt S + sqrt T)/2 - sqrt(S # T)`.
pub const REFERENCE_EIGENVALUES: (f64, f64) = (0.5786, -0.0159);
pub const ENTRY_TOL: f64 = 1e-4;
pub const EIGENVALUE_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "opconv", version, about = "Randomized verification of operator convexity inequalities")]
pub struct Cli {
    /// Master seed; fixes every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Loewner tolerance for verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Where to write the JSON output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print JSON to stdout instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a randomized campaign and write a report.
    Verify(VerifyArgs),
    /// Reproduce the 2x2 geometric-mean counterexample.
    Counterexample,
    /// Evaluate one check on matrices read from files.
    Check(Box<CheckArgs>),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON campaign config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long)]
    pub control_trials: Option<usize>,
    #[arg(long)]
    pub harsh: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Fixed {
    First,
    Second,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Check id, e.g. `main_convexity` or `f_mean_inequality`.
    pub check: String,
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    #[arg(long)]
    pub x2: Option<PathBuf>,
    #[arg(long)]
    pub y2: Option<PathBuf>,
    /// General (not necessarily Hermitian) matrix for the Lieb check.
    #[arg(long)]
    pub k: Option<PathBuf>,
    #[arg(long)]
    pub anchor: Option<PathBuf>,
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub f1: Option<String>,
    #[arg(long)]
    pub f2: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    /// Map descriptor; defaults to the identity.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub map2: Option<String>,
    #[arg(long)]
    pub mean: Option<String>,
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value = "first")]
    pub fixed: Fixed,
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Verify(args) => cmd_verify(&cli, args),
        Command::Counterexample => cmd_counterexample(&cli),
        Command::Check(args) => cmd_check(&cli, args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}

/// Campaign config from an optional file with CLI overrides applied.
pub fn verify_config(cli: &Cli, args: &VerifyArgs) -> AppResult<CampaignConfig> {
    let mut config = match &args.config {
        Some(path) => CampaignConfig::from_path(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tolerance = tol;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    if let Some(dims) = &args.dims {
        config.dims = dims.clone();
    }
    if let Some(trials) = args.trials {
        config.trials_per_check = trials;
    }
    if let Some(checks) = &args.checks {
        config.checks = checks.clone();
    }
    if let Some(n) = args.control_trials {
        config.control_trials = n;
    }
    config.harsh_mode |= args.harsh;
    config.validate()?;
    Ok(config)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> AppResult<i32> {
    let config = verify_config(cli, args)?;
    let report = run_campaign(&config)?;
    let path = config.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_REPORT_PATH));
    report.write(&path)?;
    let mut stdout = std::io::stdout().lock();
    if cli.json {
        let _ = writeln!(stdout, "{}", report.to_json());
    } else {
        for c in &report.checks {
            let t = &c.tally;
            let _ = writeln!(
                stdout,
                "{:<40} trials={:<7} pass={:<7} marginal={:<5} fail={:<5} error={:<5} worst={:.3e}",
                c.check_id,
                t.trials,
                t.pass,
                t.marginal,
                t.fail,
                t.error,
                t.worst_relative_margin.unwrap_or(f64::NAN)
            );
        }
        for c in &report.negative_controls {
            let _ = writeln!(
                stdout,
                "{:<40} trials={:<7} fail={:<5} detected={}",
                c.control_id, c.tally.trials, c.tally.fail, c.detected
            );
        }
        let _ = writeln!(
            stdout,
            "{} in {:.1}s, report at {}",
            if report.summary.ok { "OK" } else { "FAILED" },
            report.timing.wall_seconds,
            path.display()
        );
    }
    Ok(if report.summary.ok { 0 } else { 1 })
}

/// Entries as `[re, im]` pairs, row-major.
pub type Rows = Vec<Vec<[f64; 2]>>;

fn rows(m: &HermitianMatrix) -> Rows {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m.entry(i, j).re, m.entry(i, j).im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub s: Rows,
    pub t: Rows,
    pub s_geo_t: Rows,
    pub difference: Rows,
    /// Larger first.
    pub eigenvalues: [f64; 2],
    pub max_entry_deviation: f64,
    pub max_eigenvalue_deviation: f64,
    pub reproduced: bool,
    pub outcome: CheckOutcome,
}

pub fn counterexample_record(tol: f64) -> CounterexampleRecord {
    let c = reproduce_counterexample();
    let geo = c.s_geo_t.base();
    let mut max_entry_deviation: f64 = 0.0;
    for (i, row) in REFERENCE_S_GEO_T.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            max_entry_deviation = max_entry_deviation.max((geo.entry(i, j) - want).norm());
        }
    }
    let (l1, l2) = c.eigenvalues;
    let max_eigenvalue_deviation = (l1 - REFERENCE_EIGENVALUES.0).abs().max((l2 - REFERENCE_EIGENVALUES.1).abs());
    let mut outcome = c.outcome.clone();
    outcome.tolerance = tol;
    outcome.verdict = outcome.reclassified(tol);
    CounterexampleRecord {
        s: rows(c.s.base()),
        t: rows(c.t.base()),
        s_geo_t: rows(geo),
        difference: rows(&c.difference),
        eigenvalues: [l1, l2],
        max_entry_deviation,
        max_eigenvalue_deviation,
        reproduced: l2 < 0.0 && max_entry_deviation <= ENTRY_TOL,
        outcome,
    }
}

fn write_rows(out: &mut impl std::io::Write, name: &str, m: &Rows) {
    let _ = writeln!(out, "{name}:");
    for row in m {
        let cells: Vec<String> = row.iter().map(|[re, _]| format!("{re:>12.6}")).collect();
        let _ = writeln!(out, "  [{}]", cells.join(" "));
    }
}

fn cmd_counterexample(cli: &Cli) -> AppResult<i32> {
    let record = counterexample_record(cli.tol.unwrap_or(DEFAULT_LOEWNER_TOL));
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    if let Some(path) = &cli.out {
        write_text(path, &json)?;
    }
    let mut stdout = std::io::stdout().lock();
    if cli.json {
        let _ = writeln!(stdout, "{json}");
    } else {
        write_rows(&mut stdout, "S", &record.s);
        write_rows(&mut stdout, "T", &record.t);
        write_rows(&mut stdout, "S#T", &record.s_geo_t);
        write_rows(&mut stdout, "(sqrt S + sqrt T)/2 - sqrt(S#T)", &record.difference);
        let _ = writeln!(
            stdout,
            "eigenvalues: {:.6} {:.6}",
            record.eigenvalues[0], record.eigenvalues[1]
        );
        let _ = writeln!(stdout, "max |S#T - reference|: {:.2e}", record.max_entry_deviation);
        let _ = writeln!(stdout, "check: {:?} (margin {:.6})", record.outcome.verdict, record.outcome.margin);
    }
    Ok(if record.reproduced { 0 } else { 1 })
}

fn need<'a, T>(value: &'a Option<T>, flag: &str, check: &str) -> AppResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| AppError::Parse(format!("`{check}` needs --{flag}")))
}

fn function(text: &Option<String>, flag: &str, check: &str) -> AppResult<ScalarFunctionSpec> {
    Ok(need(text, flag, check)?.parse()?)
}

fn map(text: &Option<String>, in_dim: usize) -> AppResult<PositiveMapSpec> {
    let desc: MapDescriptor = match text {
        Some(t) => t.parse()?,
        None => MapDescriptor::Identity(None),
    };
    Ok(desc.build(in_dim)?)
}

fn positive(path: &Option<PathBuf>, flag: &str, check: &str) -> AppResult<PositiveDefiniteMatrix> {
    matrix_file::read_positive(need(path, flag, check)?)
}

fn hermitian(path: &Option<PathBuf>, flag: &str, check: &str) -> AppResult<HermitianMatrix> {
    matrix_file::read_hermitian(need(path, flag, check)?)
}

fn raw(path: &Option<PathBuf>, flag: &str, check: &str) -> AppResult<CMatrix> {
    matrix_file::read_raw(need(path, flag, check)?)
}

/// Evaluates a single check from CLI arguments.
pub fn evaluate_check(args: &CheckArgs, tol: f64) -> AppResult<CheckOutcome> {
    let id = args.check.strip_prefix("check_").unwrap_or(&args.check);
    let a = args;
    let outcome = match id {
        ids::MAIN_CONVEXITY | "proof_chain" => {
            let (f, g) = (function(&a.f, "f", id)?, function(&a.g, "g", id)?);
            let x = positive(&a.x, "x", id)?;
            let y = positive(&a.y, "y", id)?;
            let phi = map(&a.map, x.dim())?;
            if id == ids::MAIN_CONVEXITY {
                verifier::check_main_convexity(&g, &f, &phi, &x, &y, tol)?
            } else {
                let chain = verifier::check_proof_chain(&g, &f, &phi, &x, &y, tol)?;
                CheckOutcome::worst_of("proof_chain", chain.links.to_vec())
                    .with_detail("mean_ordering.margin", chain.mean_ordering.margin)
            }
        }
        ids::HARMONIC_SUBADDITIVITY => {
            let x = positive(&a.x, "x", id)?;
            let y = positive(&a.y, "y", id)?;
            verifier::check_harmonic_subadditivity(&map(&a.map, x.dim())?, &x, &y, tol)?
        }
        ids::F_MEAN_INEQUALITY => {
            let f = function(&a.f, "f", id)?;
            verifier::check_f_mean_inequality(&f, &positive(&a.x, "x", id)?, &positive(&a.y, "y", id)?, tol)?
        }
        ids::MEAN_SUBADDITIVITY => {
            let mean: MeanKind = need(&a.mean, "mean", id)?.parse()?;
            let x = positive(&a.x, "x", id)?;
            let y = positive(&a.y, "y", id)?;
            verifier::check_mean_subadditivity(mean, &map(&a.map, x.dim())?, &x, &y, tol)?
        }
        ids::GEOMETRIC_PATH => {
            let g = function(&a.g, "g", id)?;
            verifier::check_geometric_path(&g, &positive(&a.x, "x", id)?, &positive(&a.y, "y", id)?, tol)?
        }
        ids::TRACE_SWITCH => {
            let h = function(&a.h, "h", id)?;
            verifier::check_trace_switch(&positive(&a.x, "x", id)?, &positive(&a.y, "y", id)?, &h, tol)?
        }
        ids::RESOLVENT_DERIVATIVES => {
            let shift = *need(&a.shift, "shift", id)?;
            verifier::check_resolvent_derivatives(shift, &positive(&a.x, "x", id)?, &hermitian(&a.y, "y", id)?, tol)?
        }
        ids::SEPARATE_CONVEXITY => {
            let (f1, f2, g) = (function(&a.f1, "f1", id)?, function(&a.f2, "f2", id)?, function(&a.g, "g", id)?);
            let anchor = positive(&a.anchor, "anchor", id)?;
            let p0 = positive(&a.x, "x", id)?;
            let p1 = positive(&a.y, "y", id)?;
            let (x_dim, y_dim) = match a.fixed {
                Fixed::First => (anchor.dim(), p0.dim()),
                Fixed::Second => (p0.dim(), anchor.dim()),
            };
            let fixed = match a.fixed {
                Fixed::First => FixedVariable::First,
                Fixed::Second => FixedVariable::Second,
            };
            let phi = map(&a.map, x_dim)?;
            let psi = map(&a.map2, y_dim)?;
            verifier::check_separate_convexity_two_var(&f1, &f2, &g, &phi, &psi, fixed, &anchor, &p0, &p1, tol)?
        }
        ids::LIEB_CONVEXITY => {
            let (f1, f2) = (function(&a.f1, "f1", id)?, function(&a.f2, "f2", id)?);
            let x = positive(&a.x, "x", id)?;
            let y = hermitian(&a.y, "y", id)?;
            let partner = positive(&a.x2, "x2", id)?;
            let phi = map(&a.map, x.dim())?;
            let k = match &a.k {
                Some(_) => raw(&a.k, "k", id)?,
                None => CMatrix::identity(phi.out_dim(), phi.out_dim()),
            };
            let tau = TracialFunctional::new(a.tau)?;
            verifier::check_lieb_convexity(&f1, &f2, &phi, &tau, &k, &x, &y, &partner, tol)?
        }
        ids::JOINT_CONVEXITY => {
            let (f1, f2) = (function(&a.f1, "f1", id)?, function(&a.f2, "f2", id)?);
            let x1 = positive(&a.x, "x", id)?;
            let y1 = positive(&a.y, "y", id)?;
            let x2 = positive(&a.x2, "x2", id)?;
            let y2 = positive(&a.y2, "y2", id)?;
            let phi = map(&a.map, x1.dim())?;
            let psi = map(&a.map2, y1.dim())?;
            let tau = TracialFunctional::new(a.tau)?;
            verifier::check_joint_convexity(&f1, &f2, &phi, &psi, &tau, (&x1, &y1), (&x2, &y2), tol)?
        }
        other => return Err(AppError::Parse(format!("unknown check `{other}`"))),
    };
    Ok(outcome)
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> AppResult<i32> {
    let tol = cli.tol.unwrap_or(DEFAULT_LOEWNER_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(AppError::Parse(format!("tolerance {tol} must be positive and finite")));
    }
    let mut outcome = evaluate_check(args, tol)?;
    if let Some(seed) = cli.seed {
        outcome = outcome.with_seed(seed);
    }
    let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
    if let Some(path) = &cli.out {
        write_text(path, &json)?;
    }
    println!("{json}");
    Ok(if outcome.verdict == Verdict::Fail { 1 } else { 0 })
}

fn write_text(path: &Path, text: &str) -> AppResult<()> {
    std::fs::write(path, format!("{text}\n")).map_err(|e| AppError::io(path, e))
}
