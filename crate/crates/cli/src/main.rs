//! `secant3`: decompose and certify tensors of border rank at most three.
//!
//! Exit codes: 0 ok, 2 verification failure (or a failed batch entry),
//! 3 invalid input, 4 randomized search exhausted.

mod batch;
mod request;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use request::{exit_code, run, Command, Request, Response};
use secant3::tensorspace::Mode;
use secant3::{Error, Result};

/// Mantissa bits of the float type behind numeric results.
const NATIVE_BITS: u32 = 53;

#[derive(Parser, Debug)]
#[command(
    name = "secant3",
    version,
    about = "Decompositions of partially symmetric tensors of border rank 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative residual accepted by numeric verification.
    #[arg(long, global = true, default_value_t = secant3::tensorspace::DEFAULT_VERIFY_TOL)]
    tol: f64,
    /// Verify in exact arithmetic (fails on approximate decompositions).
    #[arg(long, global = true, conflicts_with = "numeric")]
    exact: bool,
    /// Verify numerically.
    #[arg(long, global = true)]
    numeric: bool,
    /// Relative singular-value threshold for numeric ranks.
    #[arg(long, global = true)]
    rank_tau: Option<f64>,
    /// Retry budget of randomized steps.
    #[arg(long, global = true)]
    retries: Option<usize>,
    /// Include wall-clock timings in certificates (breaks byte-identical output).
    #[arg(long, global = true)]
    timings: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine output only: no summary line on stderr.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Rank bound for a format, or for a curvilinear scheme with --c and --alpha.
    Bound {
        /// Format JSON (inline or a path).
        #[arg(long)]
        format: String,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        alpha: Option<usize>,
    },
    /// Embed a product point.
    Embed {
        #[arg(long)]
        format: String,
        /// Point JSON: a list of per-factor coordinate lists.
        #[arg(long)]
        point: String,
    },
    /// Decompose a point given by a border or tangent presentation.
    Decompose {
        #[arg(long = "in")]
        input: String,
    },
    /// Decompose a point in the span of a curvilinear scheme.
    Curvilinear {
        #[arg(long = "in")]
        input: String,
    },
    /// Generate a witness of border rank 3 and rank x on (P^1)^k.
    Witness {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        x: usize,
    },
    /// Decompose a binary form given by its coordinates on the rational normal curve.
    Sylvester {
        #[arg(long = "in")]
        input: String,
    },
    /// Verify a decomposition against a tensor.
    Verify {
        #[arg(long)]
        p: String,
        #[arg(long)]
        dec: String,
    },
    /// Rank-3 families converging to a point of a degree-3 jet span.
    Family {
        #[arg(long = "in")]
        input: String,
        /// Epsilon values (repeatable); defaults to 1e-1 .. 1e-4.
        #[arg(long)]
        eps: Vec<f64>,
    },
    /// Run a manifest of requests.
    Batch {
        #[arg(long = "in")]
        input: String,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        workers: Option<usize>,
        /// Embed each entry's full output in the report.
        #[arg(long)]
        full: bool,
    },
}

/// Inline JSON when it starts with `{` or `[`, otherwise a file path.
fn load(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

fn precision_from_env() -> Result<(Option<u32>, Option<String>)> {
    let Ok(raw) = std::env::var("SECANT3_PRECISION") else {
        return Ok((None, None));
    };
    let bits: u32 = raw.trim().parse().ok().filter(|&b| b >= 1).ok_or_else(|| {
        Error::InvalidInput(format!(
            "SECANT3_PRECISION must be a positive bit count, got {raw:?}"
        ))
    })?;
    if bits > NATIVE_BITS {
        let note = format!("SECANT3_PRECISION={bits} exceeds the {NATIVE_BITS}-bit float backend; using {NATIVE_BITS}");
        return Ok((Some(NATIVE_BITS), Some(note)));
    }
    Ok((Some(bits), None))
}

fn with_input(command: Command, text: String, what: &str) -> Result<Request> {
    let input = parse_json(&text, what)?;
    let mut r = Request::new(command, input);
    r.source = Some(text);
    Ok(r)
}

fn build(cli: &Cli, precision: Option<u32>) -> Result<Request> {
    let mut req = match &cli.command {
        Sub::Bound { format, c, alpha } => {
            let f = parse_json(&load(format)?, "format")?;
            let mut r = Request::new(Command::Bound, json!({ "format": f }));
            r.c = *c;
            r.alpha = *alpha;
            r
        }
        Sub::Embed { format, point } => {
            let f = parse_json(&load(format)?, "format")?;
            let x = parse_json(&load(point)?, "point")?;
            Request::new(Command::Embed, json!({ "format": f, "point": x }))
        }
        Sub::Decompose { input } => {
            with_input(Command::Decompose, load(input)?, "decompose input")?
        }
        Sub::Curvilinear { input } => {
            with_input(Command::Curvilinear, load(input)?, "curvilinear input")?
        }
        Sub::Sylvester { input } => {
            with_input(Command::Sylvester, load(input)?, "sylvester input")?
        }
        Sub::Family { input, eps } => {
            let mut r = with_input(Command::Family, load(input)?, "family input")?;
            r.eps = eps.clone();
            r
        }
        Sub::Witness { k, x } => {
            let mut r = Request::new(Command::Witness, Value::Null);
            r.k = Some(*k);
            r.x = Some(*x);
            r
        }
        Sub::Verify { p, dec } => {
            let p = parse_json(&load(p)?, "tensor")?;
            let d = parse_json(&load(dec)?, "decomposition")?;
            Request::new(Command::Verify, json!({ "p": p, "dec": d }))
        }
        Sub::Batch { .. } => unreachable!("batch is dispatched separately"),
    };
    let c = &cli.common;
    req.seed = c.seed;
    req.tol = c.tol;
    req.mode = if c.exact {
        Some(Mode::Exact)
    } else if c.numeric {
        Some(Mode::Numeric)
    } else {
        None
    };
    req.rank_tau = c.rank_tau;
    req.retries = c.retries;
    req.timings = c.timings;
    req.precision = precision;
    Ok(req)
}

fn emit(common: &Common, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("JSON values serialize") + "\n";
    match &common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let (precision, note) = precision_from_env()?;
    if let (Some(note), false) = (note, cli.common.json) {
        eprintln!("note: {note}");
    }
    if let Sub::Batch {
        input,
        workers,
        full,
    } = &cli.command
    {
        let manifest = parse_json(&load(input)?, "manifest")?;
        secant3::wire::check_schema(&manifest)?;
        let entries = match manifest.get("entries").unwrap_or(&manifest) {
            Value::Array(a) => a.clone(),
            _ => {
                return Err(Error::InvalidInput(
                    "manifest: expected an \"entries\" list".into(),
                ))
            }
        };
        let report = batch::run_batch(entries, *workers, precision, *full)?;
        emit(
            &cli.common,
            &serde_json::to_value(&report).expect("report serializes"),
        )?;
        if !cli.common.json {
            eprintln!(
                "batch: {}/{} passed, {}/{} certificates within bound",
                report.passed, report.total, report.bound_compliant, report.certified
            );
        }
        return Ok(if report.ok() { 0 } else { 2 });
    }
    let req = build(cli, precision)?;
    let Response {
        doc,
        summary,
        failed,
    } = run(&req)?;
    emit(&cli.common, &doc)?;
    if !cli.common.json {
        eprintln!("{summary}");
    }
    Ok(if failed { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
