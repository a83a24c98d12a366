//! Experiment configuration, orchestration and reports.
//!
//! [`run_suite`] runs the configured experiments in a work pool and collects
//! their records in configuration order, so the report does not depend on
//! scheduling. Wall-clock timings are kept out of the report and written to
//! a separate file.

mod config;
mod experiments;
mod report;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    BuserConfig, CheegerBoundConfig, ExperimentConfig, ExperimentId, Lemma31Config, OutputConfig, Prop25Config,
    ReportFormat, RiccatiConfig, SolverSettings, SpectralConfig, TubeConfig,
};
pub use experiments::random_connected_graph;
pub use report::{Check, ExperimentRecord, Metric, Recorder, Report, Status, SCHEMA_VERSION};

use crate::error::Result;

/// Soft runtime budget for a full suite.
pub const SUITE_BUDGET_SECONDS: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Csv,
    Svg,
    Off,
}

/// A file produced by an experiment besides its report record.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub kind: ArtifactKind,
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub id: ExperimentId,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix: f64,
    pub total_seconds: f64,
    pub budget_seconds: f64,
    pub over_budget: bool,
    pub experiments: Vec<Timing>,
}

impl Timings {
    pub fn seconds(&self, id: ExperimentId) -> Option<f64> {
        self.experiments.iter().find(|t| t.id == id).map(|t| t.seconds)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
    pub timings: Timings,
}

/// Validates the configuration, then runs every listed experiment. A failing
/// experiment is recorded with status `error`; it does not stop the others.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutput> {
    config.validate()?;
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let start = Instant::now();
    let results: Vec<(ExperimentRecord, Vec<Artifact>, f64)> = config
        .experiments
        .par_iter()
        .map(|&id| {
            let t0 = Instant::now();
            let (record, artifacts) = match experiments::run(id, config) {
                Ok(o) => (o.recorder.into_record(id), o.artifacts),
                Err(e) => (
                    ExperimentRecord {
                        id,
                        status: Status::Error,
                        error: Some(e.to_string()),
                        metrics: Vec::new(),
                        checks: Vec::new(),
                    },
                    Vec::new(),
                ),
            };
            (record, artifacts, t0.elapsed().as_secs_f64())
        })
        .collect();
    let total_seconds = start.elapsed().as_secs_f64();

    let mut records = Vec::with_capacity(results.len());
    let mut artifacts = Vec::new();
    let mut timing = Vec::with_capacity(results.len());
    for (record, arts, seconds) in results {
        timing.push(Timing { id: record.id, seconds });
        records.push(record);
        artifacts.extend(arts);
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        pass: records.iter().all(|r| r.status == Status::Pass),
        experiments: records,
    };
    Ok(SuiteOutput {
        report,
        artifacts,
        timings: Timings {
            started_unix,
            total_seconds,
            budget_seconds: SUITE_BUDGET_SECONDS,
            over_budget: total_seconds > SUITE_BUDGET_SECONDS,
            experiments: timing,
        },
    })
}

/// Writes the report in the configured format, the artifacts it enables and
/// `timings.json`. Returns the paths written, in order.
pub fn write_outputs(out: &SuiteOutput, output: &OutputConfig) -> Result<Vec<PathBuf>> {
    let dir = &output.dir;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    match output.format {
        ReportFormat::Json => put("report.json", &out.report.to_json())?,
        ReportFormat::Csv => {
            put("metrics.csv", &out.report.metrics_csv())?;
            put("checks.csv", &out.report.checks_csv())?;
        }
    }
    for a in &out.artifacts {
        let enabled = match a.kind {
            ArtifactKind::Csv => true,
            ArtifactKind::Svg => output.svg,
            ArtifactKind::Off => output.export_meshes,
        };
        if enabled {
            put(&a.name, &a.contents)?;
        }
    }
    let mut timings = serde_json::to_string_pretty(&out.timings)?;
    timings.push('\n');
    put("timings.json", &timings)?;
    Ok(written)
}

/// Reads a report back, rejecting unknown fields and other schema versions.
pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    let report: Report = serde_json::from_str(&text)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(crate::error::Error::Data(format!(
            "report schema {} is not the supported {SCHEMA_VERSION}",
            report.schema_version
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_is_an_empty_passing_report() {
        let cfg = ExperimentConfig {
            experiments: Vec::new(),
            ..Default::default()
        };
        let out = run_suite(&cfg).unwrap();
        assert!(out.report.pass);
        assert!(out.report.experiments.is_empty());
        assert!(out.artifacts.is_empty());
    }

    #[test]
    fn written_report_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig {
            experiments: vec![ExperimentId::CheegerBound],
            ..Default::default()
        };
        cfg.cheeger_bound.graphs = 5;
        cfg.output.dir = dir.path().to_path_buf();
        let out = run_suite(&cfg).unwrap();
        let written = write_outputs(&out, &cfg.output).unwrap();
        assert_eq!(written[0], dir.path().join("report.json"));
        assert_eq!(read_report(&written[0]).unwrap(), out.report);

        let text = std::fs::read_to_string(&written[0]).unwrap();
        let path = dir.path().join("edited.json");
        std::fs::write(
            &path,
            text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1),
        )
        .unwrap();
        assert!(read_report(&path).is_err());
        std::fs::write(&path, text.replacen("\"seed\"", "\"extra\": 0,\n  \"seed\"", 1)).unwrap();
        assert!(read_report(&path).is_err());
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let mut cfg = ExperimentConfig::default();
        cfg.tube.bins = 1;
        assert!(matches!(run_suite(&cfg), Err(crate::Error::Config(_))));
    }
}
