use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentId;

pub const SCHEMA_VERSION: u32 = 1;

/// One measured number. `value` is `None` when the measurement is not finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub subject: String,
    pub name: String,
    pub value: Option<f64>,
    pub method: String,
    pub tolerance: Option<f64>,
}

/// A pass/fail comparison of a measured value against a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub expected: String,
    pub method: String,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub id: ExperimentId,
    pub status: Status,
    pub error: Option<String>,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
}

impl ExperimentRecord {
    pub fn metric(&self, subject: &str, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.subject == subject && m.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub pass: bool,
    pub experiments: Vec<ExperimentRecord>,
}

impl Report {
    pub fn experiment(&self, id: ExperimentId) -> Option<&ExperimentRecord> {
        self.experiments.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("experiment,subject,name,value,method,tolerance\n");
        for e in &self.experiments {
            for m in &e.metrics {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    e.id,
                    csv_field(&m.subject),
                    csv_field(&m.name),
                    opt(m.value),
                    csv_field(&m.method),
                    opt(m.tolerance)
                )
                .unwrap();
            }
        }
        out
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("experiment,name,pass,value,expected,method,tolerance\n");
        for e in &self.experiments {
            for c in &e.checks {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    e.id,
                    csv_field(&c.name),
                    c.pass,
                    opt(c.value),
                    csv_field(&c.expected),
                    csv_field(&c.method),
                    opt(c.tolerance)
                )
                .unwrap();
            }
        }
        out
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Accumulates the metrics and checks of one experiment.
#[derive(Debug, Default)]
pub struct Recorder {
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
}

impl Recorder {
    pub fn metric(&mut self, subject: &str, name: &str, value: f64, method: &str, tolerance: Option<f64>) {
        self.metrics.push(Metric {
            subject: subject.into(),
            name: name.into(),
            value: finite(value),
            method: method.into(),
            tolerance,
        });
    }

    pub fn check(
        &mut self,
        name: &str,
        pass: bool,
        value: f64,
        expected: String,
        method: &str,
        tolerance: Option<f64>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            value: finite(value),
            expected,
            method: method.into(),
            tolerance,
        });
    }

    /// `|value − target| ≤ rel · |target|`.
    pub fn check_relative(&mut self, name: &str, value: f64, target: f64, rel: f64, method: &str) {
        let pass = (value - target).abs() <= rel * target.abs();
        self.check(
            name,
            pass,
            value,
            format!("{target} ± {}%", rel * 100.0),
            method,
            Some(rel),
        );
    }

    pub fn check_range(&mut self, name: &str, value: f64, lo: f64, hi: f64, method: &str) {
        self.check(
            name,
            (lo..=hi).contains(&value),
            value,
            format!("[{lo}, {hi}]"),
            method,
            None,
        );
    }

    pub fn into_record(self, id: ExperimentId) -> ExperimentRecord {
        let status = if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        ExperimentRecord {
            id,
            status,
            error: None,
            metrics: self.metrics,
            checks: self.checks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_become_null() {
        let mut r = Recorder::default();
        r.metric("s", "inf", f64::INFINITY, "m", None);
        r.check_relative("c", 1.0, 1.05, 0.1, "m");
        let rec = r.into_record(ExperimentId::Tube);
        assert_eq!(rec.metrics[0].value, None);
        assert_eq!(rec.status, Status::Pass);
        let json = serde_json::to_string(&rec).unwrap();
        let back: ExperimentRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn csv_quotes_fields() {
        let mut r = Recorder::default();
        r.metric("a,b", "x", 1.5, "say \"hi\"", Some(0.1));
        let report = Report {
            schema_version: SCHEMA_VERSION,
            version: "0".into(),
            config_hash: String::new(),
            seed: 0,
            pass: true,
            experiments: vec![r.into_record(ExperimentId::Riccati)],
        };
        let csv = report.metrics_csv();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "riccati,\"a,b\",x,1.5e0,\"say \"\"hi\"\"\",1e-1"
        );
    }
}
