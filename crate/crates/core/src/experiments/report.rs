//! Seed-stamped experiment reports.
//!
//! Report bodies contain no timestamps or host information, so re-running a
//! command with the same configuration reproduces them byte for byte.

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::qmath::rng::GAUSSIAN_TRANSFORM;

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of an experiment or check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Comparison against a bound with an unknown constant; never a failure.
    Heuristic,
    /// The bound is vacuous (at least 1) at these parameters.
    Inactive,
    /// The check is undefined at these parameters and was not run.
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Self::Fail
    }

    /// Combined verdict: fails if any part fails.
    pub fn all(parts: impl IntoIterator<Item = Verdict>) -> Self {
        let mut out = Self::Pass;
        for v in parts {
            if v == Self::Fail {
                return Self::Fail;
            }
            if v != Self::Pass && out == Self::Pass {
                out = v;
            }
        }
        out
    }
}

/// One CSV line: `seed, trial, s, t, value`. Empty fields are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub seed: u64,
    pub trial: Option<u64>,
    pub s: Option<String>,
    pub t: Option<String>,
    pub value: f64,
}

impl CsvRow {
    pub fn trial(seed: u64, trial: u64, s: Option<String>, t: Option<String>, value: f64) -> Self {
        Self {
            seed,
            trial: Some(trial),
            s,
            t,
            value,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub master_seed: u64,
    pub config: Value,
    pub gaussian_transform: String,
    pub verdict: Verdict,
    pub results: Value,
    #[serde(skip)]
    pub rows: Vec<CsvRow>,
}

impl ExperimentReport {
    pub fn new(command: &str, master_seed: u64, config: impl Serialize, results: impl Serialize, verdict: Verdict) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            library_version: crate::VERSION.to_string(),
            command: command.to_string(),
            master_seed,
            config: serde_json::to_value(config)?,
            gaussian_transform: GAUSSIAN_TRANSFORM.to_string(),
            verdict,
            results: serde_json::to_value(results)?,
            rows: Vec::new(),
        })
    }

    pub fn with_rows(mut self, rows: Vec<CsvRow>) -> Self {
        self.rows = rows;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Comment lines (`# key: value`) placed above the CSV header.
    pub fn csv_stamp(&self) -> Result<Vec<String>> {
        Ok(vec![
            format!("# schema_version: {}", self.schema_version),
            format!("# library_version: {}", self.library_version),
            format!("# command: {}", self.command),
            format!("# master_seed: {}", self.master_seed),
            format!("# config: {}", serde_json::to_string(&self.config)?),
            format!("# gaussian_transform: {}", self.gaussian_transform),
            format!("# verdict: {}", serde_json::to_value(self.verdict)?.as_str().unwrap_or("")),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_combination() {
        assert_eq!(Verdict::all([Verdict::Pass, Verdict::Heuristic]), Verdict::Heuristic);
        assert_eq!(Verdict::all([Verdict::Heuristic, Verdict::Fail]), Verdict::Fail);
        assert_eq!(Verdict::all([]), Verdict::Pass);
    }

    #[test]
    fn report_is_stamped() {
        let r = ExperimentReport::new("x", 7, serde_json::json!({"d": 4}), 1.5, Verdict::Pass).unwrap();
        let json = r.to_json().unwrap();
        assert!(json.contains("\"master_seed\": 7"));
        assert!(json.contains("\"verdict\": \"pass\""));
        assert!(r.csv_stamp().unwrap()[3].ends_with('7'));
    }
}
