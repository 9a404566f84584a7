//! Verification suite: a registry of named checks, a parallel runner with
//! per-instance seeded randomness, and JSON or text reports.

mod checks;
mod config;

pub use checks::CHECK_NAMES;
pub use config::{default_tolerances, SuiteConfig, Sweep};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Pass when `metric ≤ tolerance`.
    Le,
    /// Pass when `metric ≥ tolerance`.
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub index: usize,
    pub params: Value,
    pub metric: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
    /// Wall-clock time; kept out of the serialized report so reports are reproducible.
    #[serde(skip)]
    pub runtime_ms: f64,
}

/// Generator for one check instance, derived from `(seed, name, index)` by SHA-256.
pub fn instance_rng(seed: u64, name: &str, index: usize) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    h.update([0u8]);
    h.update((index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a SuiteConfig,
    pub name: &'static str,
}

impl Ctx<'_> {
    /// Runs one instance. Errors become failing results with a null metric.
    pub fn run(
        &self,
        index: usize,
        params: Value,
        tol_key: &str,
        comparison: Comparison,
        body: impl FnOnce(&mut ChaCha8Rng) -> Result<f64>,
    ) -> CheckResult {
        self.run_with(index, params, tol_key, comparison, |rng| Ok((body(rng)?, Vec::new())))
    }

    /// Like [`Ctx::run`], with extra `(key, value)` pairs appended to the params echo.
    pub fn run_with(
        &self,
        index: usize,
        mut params: Value,
        tol_key: &str,
        comparison: Comparison,
        body: impl FnOnce(&mut ChaCha8Rng) -> Result<(f64, Vec<(&'static str, Value)>)>,
    ) -> CheckResult {
        let tolerance = self.cfg.tolerance(tol_key);
        let mut rng = instance_rng(self.cfg.seed, self.name, index);
        let start = Instant::now();
        let outcome = body(&mut rng);
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        if let Some(q) = tol_key.strip_prefix(self.name).and_then(|q| q.strip_prefix('.')) {
            params["quantity"] = Value::from(q);
        }
        let metric = match outcome {
            Ok((m, extra)) => {
                for (k, v) in extra {
                    params[k] = v;
                }
                m
            }
            Err(e) => {
                params["error"] = Value::from(e.to_string());
                f64::NAN
            }
        };
        let pass = match comparison {
            Comparison::Le => metric <= tolerance,
            Comparison::Ge => metric >= tolerance,
        };
        CheckResult { name: self.name.to_string(), index, params, metric, comparison, tolerance, pass, runtime_ms }
    }
}

/// Names selected by an optional glob; a pattern matching nothing is a usage error.
pub fn select_checks(filter: Option<&str>) -> Result<Vec<&'static str>> {
    let Some(pattern) = filter else {
        return Ok(CHECK_NAMES.to_vec());
    };
    let glob = glob::Pattern::new(pattern).map_err(|e| Error::Usage(format!("bad filter `{pattern}`: {e}")))?;
    let names: Vec<_> = CHECK_NAMES.iter().copied().filter(|n| glob.matches(n)).collect();
    if names.is_empty() {
        return Err(Error::Usage(format!("filter `{pattern}` matches no check; known: {}", CHECK_NAMES.join(", "))));
    }
    Ok(names)
}

/// Runs the selected checks concurrently; results are sorted by name, then index.
pub fn run_suite(cfg: &SuiteConfig, filter: Option<&str>) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let names = select_checks(filter)?;
    Ok(run_named(cfg, &names))
}

pub(crate) fn run_named(cfg: &SuiteConfig, names: &[&'static str]) -> Vec<CheckResult> {
    let mut results: Vec<CheckResult> = names
        .par_iter()
        .flat_map_iter(|&name| checks::run_check(&Ctx { cfg, name }))
        .collect();
    results.sort_by(|a, b| a.name.cmp(&b.name).then(a.index.cmp(&b.index)));
    results
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(Error::Usage(format!("unknown format `{other}`, expected json or text"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Text => "txt",
        }
    }
}

pub fn render_report(results: &[CheckResult], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(results)? + "\n"),
        ReportFormat::Text => Ok(render_text(results)),
    }
}

fn render_text(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let mut s = String::new();
    writeln!(s, "{:<width$}  {:>5}  {:>12}  {:>2}  {:>9}  {:<6}  params", "check", "index", "metric", "", "tolerance", "result").unwrap();
    for r in results {
        let cmp = match r.comparison {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
        };
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        writeln!(s, "{:<width$}  {:>5}  {:>12.3e}  {cmp}  {:>9.1e}  {verdict:<6}  {}", r.name, r.index, r.metric, r.tolerance, r.params).unwrap();
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    writeln!(s, "{} checks, {} passed, {} failed", results.len(), results.len() - failed, failed).unwrap();
    s
}

/// Writes `report.json` or `report.txt` into `dir`.
pub fn emit_report(results: &[CheckResult], format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    if results.is_empty() {
        return Err(Error::Usage("no results to report".into()));
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("report.{}", format.extension()));
    fs::write(&path, render_report(results, format)?)?;
    Ok(path)
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}
