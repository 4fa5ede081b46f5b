use serde::Serialize;
use serde_json::Value;

use secant3::par::{self, Exec};
use secant3::{Error, Result};

use crate::request::{exit_code, run, Request};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryReport {
    pub index: usize,
    pub command: Option<String>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BatchReport {
    pub schema: &'static str,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Entries with a certificate whose size is within its bound.
    pub bound_compliant: usize,
    pub certified: usize,
    pub entries: Vec<EntryReport>,
}

impl BatchReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn run_entry(index: usize, entry: Value, precision: Option<u32>, keep_output: bool) -> EntryReport {
    let command = entry
        .get("command")
        .and_then(Value::as_str)
        .map(str::to_string);
    let mut report = EntryReport {
        index,
        command,
        exit_code: 0,
        size: None,
        bound: None,
        error: None,
        output: None,
    };
    let req: Result<Request> = serde_json::from_value(entry)
        .map_err(|e| Error::InvalidInput(format!("entry {index}: {e}")));
    let result = req.and_then(|mut r| {
        r.precision = r.precision.or(precision);
        run(&r)
    });
    match result {
        Ok(resp) => {
            let cert = resp.doc.get("certificate");
            report.size = cert
                .and_then(|c| c.get("size"))
                .and_then(Value::as_u64)
                .map(|v| v as usize);
            report.bound = cert
                .and_then(|c| c.get("bound"))
                .and_then(Value::as_u64)
                .map(|v| v as usize);
            report.exit_code = if resp.failed { 2 } else { 0 };
            if keep_output {
                report.output = Some(resp.doc);
            }
        }
        Err(e) => {
            report.exit_code = exit_code(&e);
            report.error = Some(e.to_string());
        }
    }
    report
}

/// Runs every entry of the manifest, in parallel when `workers != Some(1)`.
/// `workers` caps the thread count.
pub fn run_batch(
    entries: Vec<Value>,
    workers: Option<usize>,
    precision: Option<u32>,
    keep_output: bool,
) -> Result<BatchReport> {
    let indexed: Vec<(usize, Value)> = entries.into_iter().enumerate().collect();
    let exec = if workers == Some(1) {
        Exec::Sequential
    } else {
        Exec::Auto
    };
    let go = || {
        par::map(exec, indexed, |(i, e)| {
            run_entry(i, e, precision, keep_output)
        })
    };
    let reports = run_in_pool(workers, go)?;
    let passed = reports.iter().filter(|r| r.exit_code == 0).count();
    let certified = reports
        .iter()
        .filter(|r| r.size.is_some() && r.bound.is_some())
        .count();
    let bound_compliant = reports
        .iter()
        .filter(|r| matches!((r.size, r.bound), (Some(s), Some(b)) if s <= b))
        .count();
    Ok(BatchReport {
        schema: secant3::wire::SCHEMA,
        total: reports.len(),
        passed,
        failed: reports.len() - passed,
        bound_compliant,
        certified,
        entries: reports,
    })
}

#[cfg(feature = "parallel")]
fn run_in_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_in_pool<R: Send>(_workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}
