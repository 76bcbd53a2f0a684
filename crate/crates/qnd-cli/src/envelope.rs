//! Result envelopes and serialization helpers.
//!
//! Every JSON artifact carries the tool version, the command, the effective
//! configuration (which re-parses to an equivalent [`RunConfig`]), the seed
//! when one was used, and a self-describing payload. Timestamps are opt-in:
//! by default outputs are pure functions of (config, seed) so repeated runs
//! are byte-identical.

use serde::Serialize;

use qnd_core::bayes::MeasurementRecord;
use qnd_core::resonator::DesignReport;

use crate::config::RunConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Render a float with 17 significant digits so the exact f64 round-trips
/// through CSV.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a> {
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: &'a RunConfig,
    pub payload: Payload,
}

impl<'a> Envelope<'a> {
    pub fn new(command: &'static str, config: &'a RunConfig, payload: Payload) -> Self {
        Self { version: TOOL_VERSION, command, seed: None, timestamp: None, config, payload }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_timestamp(mut self, stamp: bool) -> Self {
        if stamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            self.timestamp = Some(format!("{now}"));
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Report(DesignReport),
    Curve {
        columns: Vec<&'static str>,
        rows: Vec<Vec<f64>>,
    },
    Posterior(PosteriorPayload),
    Validation {
        passed: bool,
        checks: Vec<CheckRow>,
    },
}

#[derive(Debug, Serialize)]
pub struct PosteriorPayload {
    /// Outcome the posterior conditions on.
    pub x: f64,
    /// Homodyne angle actually used (after auto-optimal resolution).
    pub zeta: f64,
    /// Marginal outcome density at `x`.
    pub marginal_density: f64,
    pub prior_mean: f64,
    pub prior_variance: f64,
    pub posterior_mean: f64,
    pub posterior_variance: f64,
    pub posterior_skewness: f64,
    /// 68% central credible interval.
    pub interval_68: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_record: Option<MeasurementRecord>,
    /// Present only in single-file JSON mode: one `[n, prior, posterior]`
    /// triple per photon number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<(usize, f64, f64)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

/// Render rows of floats as CSV with a fixed header. UTF-8, comma-separated,
/// LF line endings, 17 significant digits.
pub fn curve_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Distribution CSV: `n,prior,posterior`.
pub fn distribution_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("n,prior,posterior\n");
    for (n, prior, post) in rows {
        out.push_str(&format!("{n},{},{}\n", fmt_f64(*prior), fmt_f64(*post)));
    }
    out
}

/// Validation table CSV: `check,status,measured,tolerance`.
pub fn validation_csv(checks: &[CheckRow]) -> String {
    let mut out = String::from("check,status,measured,tolerance\n");
    for c in checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        out.push_str(&format!("{},{status},{},{}\n", c.check, fmt_f64(c.measured), fmt_f64(c.tolerance)));
    }
    out
}

/// Human-readable validation table.
pub fn validation_table(checks: &[CheckRow]) -> String {
    let width = checks.iter().map(|c| c.check.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:<6}  {:>13}  {:>13}\n", "check", "status", "measured", "tolerance");
    for c in checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        out.push_str(&format!(
            "{:<width$}  {:<6}  {:>13.6e}  {:>13.6e}\n",
            c.check, status, c.measured, c.tolerance
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.5, 1.0 / 3.0, 196_078.431_372_549, 8.53794244923e-7, -0.0, 1e-300] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }

    #[test]
    fn csv_shape() {
        let csv = curve_csv(&["a", "b"], &[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "a,b");
        assert!(lines[1].starts_with("1.0000000000000000e0,"));
    }

    #[test]
    fn envelope_is_deterministic() {
        let config = RunConfig::default();
        let e1 = Envelope::new("estimate", &config, Payload::Curve { columns: vec![], rows: vec![] });
        let e2 = Envelope::new("estimate", &config, Payload::Curve { columns: vec![], rows: vec![] });
        assert_eq!(e1.to_json(), e2.to_json());
        assert!(!e1.to_json().contains("timestamp"));
    }
}
