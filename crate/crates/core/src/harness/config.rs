use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Parameter lists that the sweep-driven checks iterate over.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub p: Vec<i64>,
    pub theta: Vec<f64>,
    pub tau: Vec<Complex64>,
    pub n: Vec<i64>,
    pub grid: Vec<usize>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            p: vec![1, 2, 3],
            theta: vec![0.0, 0.18, 0.3, 0.45],
            tau: vec![Complex64::new(0.0, 1.0), Complex64::new(0.3, 1.1)],
            n: vec![8],
            grid: vec![256],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides keyed by tolerance name (`check` or `check.quantity`).
    pub tolerances: BTreeMap<String, f64>,
    pub sweep: Sweep,
    pub output_dir: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20240607, tolerances: default_tolerances(), sweep: Sweep::default(), output_dir: PathBuf::from("nctlab-out") }
    }
}

/// Default tolerance for every named quantity.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("weyl-law", 1e-10),
        ("commutation", 1e-10),
        ("quantization-iso", 1e-12),
        ("rational-center", 1e-12),
        ("rational-center.irrational", 0.1),
        ("wbz-roundtrip", 1e-8),
        ("quasiperiodicity-closure", 1e-9),
        ("quasiperiodicity-closure.nabla", 1e-8),
        ("constraint-dichotomy", 1e-8),
        ("constraint-dichotomy.violated", 0.05),
        ("herm-classical", 1e-8),
        ("herm-deformed", 1e-8),
        ("herm-deformed.tail", 1e-10),
        ("herm-deformed.mismatch", 0.01),
        ("module-action-oracle", 1e-9),
        ("theta-functional", 1e-10),
        ("holo-dimension", 1e-8),
        ("holo-dimension.gram", 1e-6),
        ("holo-dimension.count", 0.5),
        ("chern-homogeneous", 1e-12),
        ("chern-grassmannian", 1e-6),
        ("chern-grassmannian.order", 0.5),
        ("projection-validity", 1e-10),
        ("determinism", 0.5),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| Error::Parse(format!("{key}: cannot parse `{s}`"))))
        .collect()
}

impl SuiteConfig {
    /// Parses `key = value` lines; `#` starts a comment and lists are comma separated.
    /// Keys: `seed`, `output_dir`, `sweep.{p,theta,tau,n,grid}`, `tol.<name>`.
    /// Unlisted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => cfg.seed = value.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "sweep.p" => cfg.sweep.p = parse_list(key, value, |s| s.parse().ok())?,
                "sweep.theta" => cfg.sweep.theta = parse_list(key, value, |s| s.parse().ok())?,
                "sweep.tau" => cfg.sweep.tau = parse_list(key, value, |s| Complex64::from_str(s).ok())?,
                "sweep.n" => cfg.sweep.n = parse_list(key, value, |s| s.parse().ok())?,
                "sweep.grid" => cfg.sweep.grid = parse_list(key, value, |s| s.parse().ok())?,
                _ => match key.strip_prefix("tol.") {
                    Some(name) if cfg.tolerances.contains_key(name) => {
                        let v = value.parse().map_err(|e| Error::Parse(format!("{key}: {e}")))?;
                        cfg.tolerances.insert(name.to_string(), v);
                    }
                    _ => return Err(usage(format!("unknown config key `{key}`"))),
                },
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(usage(format!("tolerance {k} must be positive, got {v}")));
        }
        let s = &self.sweep;
        for (name, empty) in [("p", s.p.is_empty()), ("theta", s.theta.is_empty()), ("tau", s.tau.is_empty()), ("n", s.n.is_empty()), ("grid", s.grid.is_empty())] {
            if empty {
                return Err(usage(format!("sweep.{name} must be nonempty")));
            }
        }
        if let Some(p) = s.p.iter().find(|&&p| !(1..=8).contains(&p)) {
            return Err(usage(format!("sweep.p entries must lie in 1..=8, got {p}")));
        }
        if let Some(t) = s.theta.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(usage(format!("sweep.theta entries must lie in [0,1), got {t}")));
        }
        if let Some(t) = s.tau.iter().find(|t| !(t.im > 0.0 && t.re.is_finite() && t.im.is_finite())) {
            return Err(usage(format!("sweep.tau entries need Im > 0, got {t}")));
        }
        if let Some(n) = s.n.iter().find(|&&n| !(1..=32).contains(&n)) {
            return Err(usage(format!("sweep.n entries must lie in 1..=32, got {n}")));
        }
        if let Some(g) = s.grid.iter().find(|&&g| g < 32 || g % 4 != 0) {
            return Err(usage(format!("sweep.grid entries must be multiples of 4 and at least 32, got {g}")));
        }
        Ok(())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| panic!("no tolerance registered for `{key}`"))
    }
}
