//! Machine-readable verification reports (JSON) and plot data (CSV).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Identity,
    Bound,
    Fit,
    Decay,
}

/// How `value` must compare with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => value <= threshold,
            Relation::Ge => value >= threshold,
            Relation::Lt => value < threshold,
            Relation::Gt => value > threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub status: Status,
}

impl Check {
    /// A NaN value always fails.
    pub fn new(
        name: impl Into<String>,
        kind: CheckKind,
        value: f64,
        relation: Relation,
        threshold: f64,
    ) -> Self {
        let ok = !value.is_nan() && relation.holds(value, threshold);
        Check {
            name: name.into(),
            kind,
            value,
            threshold,
            relation,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn le(name: impl Into<String>, kind: CheckKind, value: f64, threshold: f64) -> Self {
        Self::new(name, kind, value, Relation::Le, threshold)
    }

    pub fn ge(name: impl Into<String>, kind: CheckKind, value: f64, threshold: f64) -> Self {
        Self::new(name, kind, value, Relation::Ge, threshold)
    }

    pub fn lt(name: impl Into<String>, kind: CheckKind, value: f64, threshold: f64) -> Self {
        Self::new(name, kind, value, Relation::Lt, threshold)
    }

    pub fn gt(name: impl Into<String>, kind: CheckKind, value: f64, threshold: f64) -> Self {
        Self::new(name, kind, value, Relation::Gt, threshold)
    }

    /// Boolean property encoded as `value = 1` (holds) or `0`.
    pub fn holds(name: impl Into<String>, kind: CheckKind, ok: bool) -> Self {
        Self::new(name, kind, if ok { 1.0 } else { 0.0 }, Relation::Ge, 1.0)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}/{}", self.name);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub grid: String,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: u64, grid: impl Into<String>) -> Self {
        Provenance {
            seed,
            grid: grid.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
    /// Suite-specific tables; object keys are kept sorted.
    pub details: serde_json::Value,
}

impl VerificationReport {
    pub fn new(
        suite: impl Into<String>,
        checks: Vec<Check>,
        provenance: Provenance,
        details: serde_json::Value,
    ) -> Self {
        let passed = checks.iter().all(Check::passed);
        VerificationReport {
            suite: suite.into(),
            passed,
            checks,
            provenance,
            details,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn write_checks_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv(path, CHECK_COLUMNS, &self.checks)
    }
}

pub const CHECK_COLUMNS: &[&str] = &["name", "kind", "value", "threshold", "relation", "status"];

/// CSV with an explicit header row, written even when `rows` is empty.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_is_conjunction() {
        let p = Provenance::new(1, "1d:16");
        let ok = VerificationReport::new(
            "x",
            vec![Check::le("a", CheckKind::Bound, 1.0, 2.0)],
            p.clone(),
            serde_json::Value::Null,
        );
        assert!(ok.passed);
        let bad = VerificationReport::new(
            "x",
            vec![
                Check::le("a", CheckKind::Bound, 1.0, 2.0),
                Check::ge("b", CheckKind::Fit, f64::NAN, 0.0),
            ],
            p,
            serde_json::Value::Null,
        );
        assert!(!bad.passed);
        assert_eq!(bad.failures().count(), 1);
    }

    #[test]
    fn empty_checks_give_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let r =
            VerificationReport::new("x", vec![], Provenance::new(0, ""), serde_json::Value::Null);
        r.write_checks_csv(&path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "name,kind,value,threshold,relation,status\n"
        );
    }
}
