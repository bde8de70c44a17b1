//! The `tvbn` command line.
//!
//! Results go to stdout as one JSON object (or text for the exact and
//! decomposition commands), diagnostics to stderr. Exit codes: 0 success,
//! 1 failed check or internal error, 2 input error, 3 enumeration budget
//! refused.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tvbn_core::estimator::{EstimateParams, EstimateReport, EstimatorError, UniformPhase};
use tvbn_core::inference::infer;
use tvbn_core::model::{gen_random_net, moralize, BayesNet, Structure};
use tvbn_core::oracle::{Oracle, OracleError, DEFAULT_BUDGET};
use tvbn_core::scalar::format_exact;
use tvbn_core::treedecomp::{decompose, TreeDecomposition};
use tvbn_core::{Exact, Scalar};

use crate::format::{parse_document, serialize_net, FormatError};
use crate::parallel::{estimate_tv_parallel, estimate_tv_uniform_parallel, RunError};
use crate::sets::parse_sets;

/// Factor tables above this many entries trigger a width warning.
const WIDE_FACTOR: f64 = (1u64 << 24) as f64;

#[derive(Parser, Debug)]
#[command(
    name = "tvbn",
    version,
    about = "Total variation distance between Bayes nets"
)]
pub struct Cli {
    /// Output style; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a net file.
    Validate {
        #[arg(long)]
        net: PathBuf,
        /// Require CPT rows to sum to exactly one.
        #[arg(long)]
        exact_arith: bool,
    },
    /// Answer Pr[X_i ∈ S_i for all i].
    Infer {
        #[arg(long)]
        net: PathBuf,
        /// Per-variable sets, e.g. `0:{0};3:{1,2}`.
        #[arg(long)]
        sets: String,
        #[arg(long)]
        exact_arith: bool,
    },
    /// Print a tree decomposition of the net's moral graph.
    Decompose {
        #[arg(long)]
        net: PathBuf,
    },
    /// Estimate d_TV(P, Q) to relative error eps.
    TvEstimate(EstimateArgs),
    /// Exact d_TV(P, Q) by enumeration.
    TvExact {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Estimate d_TV(P, uniform) to relative error eps.
    TvUniform {
        #[arg(long)]
        p: PathBuf,
        #[command(flatten)]
        accuracy: Accuracy,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Verify the exact identities behind the estimator.
    Check {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Generate a random net.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alphabet: usize,
        /// `path`, `tree`, or `random-dag:K`.
        #[arg(long)]
        structure: Structure,
        #[arg(long)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Accuracy {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    /// Use exactly this many samples.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    #[command(flatten)]
    accuracy: Accuracy,
    /// Rational arithmetic throughout.
    #[arg(long)]
    exact_arith: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Cache prefix normalizers across samples.
    #[arg(long)]
    memo: bool,
}

/// Why a command did not succeed.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Internal(_) | Failure::CheckFailed(_) => 1,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Model(_)
            | EstimatorError::Coupling(_)
            | EstimatorError::InvalidParams(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Estimator(e) => e.into(),
            RunError::Pool(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let format = cli.format;
    let emitted = match &cli.command {
        Command::Validate { net, exact_arith } => {
            validate(net, *exact_arith, format.unwrap_or(Format::Json), out)?
        }
        Command::Infer {
            net,
            sets,
            exact_arith,
        } => infer_cmd(
            net,
            sets,
            *exact_arith,
            format.unwrap_or(Format::Json),
            out,
            err,
        )?,
        Command::Decompose { net } => decompose_cmd(net, format.unwrap_or(Format::Text), out)?,
        Command::TvEstimate(args) => estimate_cmd(args, format.unwrap_or(Format::Json), out, err)?,
        Command::TvExact { p, q, budget } => {
            tv_exact(p, q, *budget, format.unwrap_or(Format::Text), out)?
        }
        Command::TvUniform {
            p,
            accuracy,
            threads,
        } => {
            let net = load(p)?.into_float()?;
            let params = params(accuracy)?;
            let report = estimate_tv_uniform_parallel(&net, &params, *threads)?;
            write_report(&report, format.unwrap_or(Format::Json), out)
        }
        Command::Check { p, q, budget } => {
            check(p, q, *budget, format.unwrap_or(Format::Text), out)?
        }
        Command::Gen {
            n,
            alphabet,
            structure,
            seed,
            out: path,
        } => gen(
            *n,
            *alphabet,
            *structure,
            *seed,
            path.as_deref(),
            format.unwrap_or(Format::Json),
            out,
            err,
        )?,
    };
    emitted.map_err(|e| Failure::Internal(format!("cannot write output: {e}")))
}

fn load(path: &Path) -> Result<crate::format::NetDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_pair<S: Scalar>(
    p: &Path,
    q: &Path,
    convert: impl Fn(crate::format::NetDocument) -> Result<BayesNet<S>, FormatError>,
) -> Result<(BayesNet<S>, BayesNet<S>), Failure> {
    let named = |path: &Path| {
        convert(load(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    };
    let (p, q) = (named(p)?, named(q)?);
    p.check_same_structure(&q)
        .map_err(|e| Failure::Input(e.to_string()))?;
    Ok((p, q))
}

fn params(a: &Accuracy) -> Result<EstimateParams, Failure> {
    let mut params = EstimateParams::new(a.eps, a.delta, a.seed)?;
    params.m_override = a.samples;
    Ok(params)
}

fn warn_width(err: &mut dyn Write, td: &TreeDecomposition, alphabet: usize) {
    let entries = (alphabet as f64).powi(td.max_bag_size() as i32);
    if entries > WIDE_FACTOR {
        let _ = writeln!(
            err,
            "warning: decomposition width {} over alphabet {alphabet} means factors of up to {entries:.3e} entries",
            td.width()
        );
    }
}

fn print_json(out: &mut dyn Write, value: &Value) -> std::io::Result<()> {
    writeln!(out, "{value}")
}

type Emitted = std::io::Result<()>;

fn validate(
    path: &Path,
    exact: bool,
    format: Format,
    out: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let doc = load(path)?;
    let report = if exact {
        doc.raw.validate()
    } else {
        doc.to_float_raw().validate()
    };
    let errors: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    let emitted = match format {
        Format::Json if errors.is_empty() => print_json(out, &json!({ "ok": true })),
        Format::Json => print_json(out, &json!({ "ok": false, "errors": errors })),
        Format::Text if errors.is_empty() => writeln!(out, "ok"),
        Format::Text => errors.iter().try_for_each(|e| writeln!(out, "{e}")),
    };
    if errors.is_empty() {
        Ok(emitted)
    } else {
        Err(Failure::Input(format!(
            "{} is not a valid net: {report}",
            path.display()
        )))
    }
}

fn infer_cmd(
    path: &Path,
    spec: &str,
    exact: bool,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let doc = load(path)?;
    let (n, l) = (doc.raw.parents.len(), doc.raw.alphabet);
    let sets = parse_sets(spec, n, l).map_err(|e| Failure::Input(e.to_string()))?;
    let query_failed = |e: tvbn_core::inference::InferenceError| Failure::Internal(e.to_string());
    let (decimal, fraction, width) = if exact {
        let net = doc.into_exact()?;
        let td = decompose(&moralize(&net));
        warn_width(err, &td, l);
        let v: Exact = infer(&net, &sets, &td).map_err(query_failed)?;
        (v.as_f64(), Some(format_exact(&v)), td.width())
    } else {
        let net = doc.into_float()?;
        let td = decompose(&moralize(&net));
        warn_width(err, &td, l);
        (
            infer(&net, &sets, &td).map_err(query_failed)?,
            None,
            td.width(),
        )
    };
    Ok(match format {
        Format::Json => {
            let mut v = json!({ "probability": decimal, "width": width });
            if let Some(f) = &fraction {
                v["exact"] = json!(f);
            }
            print_json(out, &v)
        }
        Format::Text => match &fraction {
            Some(f) => writeln!(out, "{f}\n{decimal}"),
            None => writeln!(out, "{decimal}"),
        },
    })
}

fn decompose_cmd(path: &Path, format: Format, out: &mut dyn Write) -> Result<Emitted, Failure> {
    let net = load(path)?.into_float()?;
    let td = decompose(&moralize(&net));
    Ok(match format {
        Format::Json => print_json(
            out,
            &json!({ "width": td.width(), "bags": td.bags, "edges": td.tree_edges }),
        ),
        Format::Text => (|| {
            writeln!(out, "width {}", td.width())?;
            for (i, bag) in td.bags.iter().enumerate() {
                let members: Vec<String> = bag.iter().map(ToString::to_string).collect();
                writeln!(out, "bag {i}: {}", members.join(" "))?;
            }
            for (a, b) in &td.tree_edges {
                writeln!(out, "edge {a} {b}")?;
            }
            Ok(())
        })(),
    })
}

fn estimate_cmd(
    args: &EstimateArgs,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let params = params(&args.accuracy)?.with_memo(args.memo);
    let report = if args.exact_arith {
        let (p, q) = load_pair(&args.p, &args.q, |d| d.into_exact())?;
        warn_width(err, &decompose(&moralize(&p)), p.alphabet() * p.alphabet());
        estimate_tv_parallel(&p, &q, &params, args.threads)?
    } else {
        let (p, q) = load_pair(&args.p, &args.q, |d| d.into_float())?;
        warn_width(err, &decompose(&moralize(&p)), p.alphabet() * p.alphabet());
        estimate_tv_parallel(&p, &q, &params, args.threads)?
    };
    Ok(write_report(&report, format, out))
}

/// The report as a JSON object with keys in a fixed order.
pub fn report_json(report: &EstimateReport) -> Value {
    let mut v = json!({
        "estimate": report.estimate,
        "m": report.m,
        "z": report.z,
        "alpha_hat": report.alpha_hat,
        "queries": report.queries,
        "seed": report.seed,
        "elapsed_ms": report.elapsed.as_secs_f64() * 1e3,
        "width": report.width,
    });
    if let Some(phase) = report.phase {
        v["phase"] = json!(match phase {
            UniformPhase::Additive => "additive",
            UniformPhase::Ratio => "ratio",
        });
    }
    v
}

fn write_report(report: &EstimateReport, format: Format, out: &mut dyn Write) -> Emitted {
    let v = report_json(report);
    match format {
        Format::Json => print_json(out, &v),
        Format::Text => v
            .as_object()
            .expect("report is an object")
            .iter()
            .try_for_each(|(k, v)| writeln!(out, "{k}: {v}")),
    }
}

fn tv_exact(
    p: &Path,
    q: &Path,
    budget: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let (p, q) = load_pair(p, q, |d| d.into_exact())?;
    let tv = Oracle::new(budget).tv(&p, &q)?;
    let fraction = format_exact(&tv);
    Ok(match format {
        Format::Text => writeln!(out, "{fraction}\n{}", tv.as_f64()),
        Format::Json => print_json(out, &json!({ "tv": fraction, "decimal": tv.as_f64() })),
    })
}

fn check(
    p: &Path,
    q: &Path,
    budget: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let (p, q) = load_pair(p, q, |d| d.into_exact())?;
    let report = Oracle::new(budget).identity_check(&p, &q)?;
    let emitted = match format {
        Format::Text => report.checks.iter().try_for_each(|c| {
            writeln!(
                out,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )
        }),
        Format::Json => {
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            print_json(
                out,
                &json!({
                    "ok": report.all_passed(),
                    "tv": format_exact(&report.tv),
                    "z": format_exact(&report.z),
                    "checks": checks,
                }),
            )
        }
    };
    if report.all_passed() {
        Ok(emitted)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        Err(Failure::CheckFailed(format!(
            "identities failed: {}",
            failed.join(", ")
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    n: usize,
    alphabet: usize,
    structure: Structure,
    seed: u64,
    path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Emitted, Failure> {
    let net =
        gen_random_net(n, alphabet, structure, seed).map_err(|e| Failure::Input(e.to_string()))?;
    let width = decompose(&moralize(&net)).width();
    let text = serialize_net(&net);
    let Some(path) = path else {
        let _ = writeln!(err, "width {width}");
        return Ok(out.write_all(text.as_bytes()));
    };
    std::fs::write(path, &text)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(match format {
        Format::Json => print_json(
            out,
            &json!({ "out": path.display().to_string(), "width": width }),
        ),
        Format::Text => writeln!(out, "width {width}"),
    })
}
