//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{NoiseModel, SlabSpec};
use crate::error::{Error, FieldError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RiskBoundary,
    LowerBound,
    BayesFdr,
    Contraction,
    Coverage,
    VbFit,
    VbScaling,
    Mmle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::RiskBoundary,
        ExperimentKind::LowerBound,
        ExperimentKind::BayesFdr,
        ExperimentKind::Contraction,
        ExperimentKind::Coverage,
        ExperimentKind::VbFit,
        ExperimentKind::VbScaling,
        ExperimentKind::Mmle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::RiskBoundary => "risk-boundary",
            ExperimentKind::LowerBound => "lower-bound",
            ExperimentKind::BayesFdr => "bayes-fdr",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::VbFit => "vb-fit",
            ExperimentKind::VbScaling => "vb-scaling",
            ExperimentKind::Mmle => "mmle",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| field_error("kind", format!("unknown experiment kind '{s}'")))
    }
}

pub(crate) fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config(vec![FieldError { field: field.into(), message: message.into() }])
}

/// Parsed configuration: the kind plus raw string values, which each
/// experiment interprets and validates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub values: BTreeMap<String, String>,
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                let key = normalize_key(k);
                if out.insert(key.clone(), v.trim().to_string()).is_some() {
                    errors.push(FieldError {
                        field: key,
                        message: format!("duplicate key on line {}", lineno + 1),
                    });
                }
            }
            _ => errors.push(FieldError {
                field: format!("line {}", lineno + 1),
                message: format!("expected 'key = value', got '{line}'"),
            }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(errors))
    }
}

/// Keys are case-insensitive and accept `-` for `_`.
pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self { kind, values: BTreeMap::new() }
    }

    /// Read a config file. A `kind` entry, if present, must match `kind`.
    pub fn from_file(kind: ExperimentKind, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field_error("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(kind, &text)
    }

    pub fn from_text(kind: ExperimentKind, text: &str) -> Result<Self> {
        let mut values = parse_pairs(text)?;
        if let Some(k) = values.remove("kind") {
            let declared: ExperimentKind = k.parse()?;
            if declared != kind {
                return Err(field_error(
                    "kind",
                    format!("config declares '{declared}' but '{kind}' was requested"),
                ));
            }
        }
        Ok(Self { kind, values })
    }

    /// Set (or replace) a value, e.g. from a command-line override.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }
}

/// Field-by-field typed access that accumulates every problem before
/// failing.
pub struct Fields<'a> {
    values: &'a BTreeMap<String, String>,
    pub errors: Vec<FieldError>,
    used: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    pub fn new(values: &'a BTreeMap<String, String>) -> Self {
        Self { values, errors: Vec::new(), used: Vec::new() }
    }

    pub fn error(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError { field: field.into(), message: message.into() });
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a str> {
        self.used.push(key);
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_with<T>(&mut self, key: &'static str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Option<T> {
        let raw = self.raw(key)?;
        match f(raw) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.error(key, msg);
                None
            }
        }
    }

    /// Required value; records "missing" when absent.
    pub fn required<T: FromStr>(&mut self, key: &'static str) -> Option<T> {
        let v = self.optional(key);
        if v.is_none() && !self.values.contains_key(key) {
            self.error(key, "required field is missing");
        }
        v
    }

    pub fn optional<T: FromStr>(&mut self, key: &'static str) -> Option<T> {
        self.parse_with(key, |s| s.parse::<T>().map_err(|_| format!("cannot parse '{s}'")))
    }

    pub fn or<T: FromStr>(&mut self, key: &'static str, default: T) -> T {
        self.optional(key).unwrap_or(default)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &'static str, default: Option<Vec<T>>) -> Vec<T> {
        let parsed = self.parse_with(key, |s| {
            s.split(',')
                .map(|item| item.trim().parse::<T>().map_err(|_| format!("cannot parse list item '{}'", item.trim())))
                .collect::<std::result::Result<Vec<T>, String>>()
        });
        match (parsed, default) {
            (Some(v), _) if !v.is_empty() => v,
            (Some(_), _) => {
                self.error(key, "list is empty");
                Vec::new()
            }
            (None, Some(d)) if !self.values.contains_key(key) => d,
            (None, None) if !self.values.contains_key(key) => {
                self.error(key, "required field is missing");
                Vec::new()
            }
            (None, _) => Vec::new(),
        }
    }

    pub fn count(&mut self, key: &'static str, default: Option<usize>) -> usize {
        match default {
            Some(d) => self.optional::<Count>(key).map_or(d, |c| c.0),
            None => self.required::<Count>(key).map_or(0, |c| c.0),
        }
    }

    pub fn counts(&mut self, key: &'static str, default: Option<Vec<usize>>) -> Vec<usize> {
        let d = default.map(|v| v.into_iter().map(Count).collect());
        self.list::<Count>(key, d).into_iter().map(|c| c.0).collect()
    }

    pub fn has_error(&self, key: &str) -> bool {
        self.errors.iter().any(|e| e.field == key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn slab(&mut self, key: &'static str, default: SlabSpec) -> SlabSpec {
        self.parse_with(key, |s| SlabSpec::parse(s).map_err(|e| e.to_string())).unwrap_or(default)
    }

    pub fn noise(&mut self, key: &'static str) -> NoiseModel {
        self.parse_with(key, parse_noise).unwrap_or(NoiseModel::Gaussian)
    }

    /// Record errors for keys nobody asked for (typos).
    pub fn finish(mut self) -> Result<()> {
        let unknown: Vec<String> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(&k.as_str()))
            .cloned()
            .collect();
        for k in unknown {
            self.error(&k, "unknown key for this experiment");
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.errors))
        }
    }
}

/// A nonnegative integer written as `100000`, `1e5` or `2^16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Count(pub usize);

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let bad = || format!("expected a nonnegative integer, got '{s}'");
        if let Ok(v) = s.parse::<usize>() {
            return Ok(Count(v));
        }
        if let Some((base, exp)) = s.split_once('^') {
            let base: usize = base.trim().parse().map_err(|_| bad())?;
            let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
            return base.checked_pow(exp).map(Count).ok_or_else(bad);
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
            Ok(Count(v as usize))
        } else {
            Err(bad())
        }
    }
}

/// `gaussian` or `subbotin:ζ`.
pub fn parse_noise(s: &str) -> std::result::Result<NoiseModel, String> {
    let s = s.trim().to_ascii_lowercase();
    if s == "gaussian" {
        return Ok(NoiseModel::Gaussian);
    }
    if let Some(z) = s.strip_prefix("subbotin:") {
        let zeta: f64 = z.trim().parse().map_err(|_| format!("bad Subbotin shape '{z}'"))?;
        return NoiseModel::subbotin(zeta).map_err(|e| e.to_string());
    }
    Err(format!("unknown noise '{s}' (expected gaussian or subbotin:<zeta>)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# header\nn = 100  # inline\n s=5\n\nb = -1, 0 ,1\n";
        let mut cfg = ExperimentConfig::from_text(ExperimentKind::RiskBoundary, text).unwrap();
        assert_eq!(cfg.values["n"], "100");
        cfg.set("n", "200");
        let mut f = Fields::new(&cfg.values);
        assert_eq!(f.required::<usize>("n"), Some(200));
        assert_eq!(f.list::<f64>("b", None), vec![-1.0, 0.0, 1.0]);
        assert!(f.finish().is_err()); // `s` was never read
    }

    #[test]
    fn reports_missing_and_bad_fields() {
        let cfg = ExperimentConfig::from_text(ExperimentKind::Mmle, "n = abc").unwrap();
        let mut f = Fields::new(&cfg.values);
        let _: Option<usize> = f.required("n");
        let _: Option<usize> = f.required("s");
        let err = f.finish().unwrap_err().to_string();
        assert!(err.contains("n: cannot parse"));
        assert!(err.contains("s: required field is missing"));
    }

    #[test]
    fn count_forms() {
        assert_eq!("1e5".parse::<Count>().unwrap().0, 100_000);
        assert_eq!("2^16".parse::<Count>().unwrap().0, 65_536);
        assert_eq!(" 42 ".parse::<Count>().unwrap().0, 42);
        assert!("1.5".parse::<Count>().is_err());
        assert!("-3".parse::<Count>().is_err());
    }

    #[test]
    fn rejects_malformed_lines_and_kind_mismatch() {
        assert!(parse_pairs("just words").is_err());
        assert!(parse_pairs("a = 1\na = 2").is_err());
        assert!(ExperimentConfig::from_text(ExperimentKind::Mmle, "kind = coverage").is_err());
    }
}
