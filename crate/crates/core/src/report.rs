//! Metric aggregation: per-run metrics files and the combined report table.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{RunMeta, TrajectoryMetrics};

/// Metrics of one trajectory within a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub id: String,
    #[serde(flatten)]
    pub metrics: TrajectoryMetrics,
}

/// Aggregate figures of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trajectory_count: usize,
    pub success_rate: f64,
    pub mean_lifting_ratio: f64,
}

/// The metrics document `eval` writes per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub meta: RunMeta,
    pub trajectories: Vec<TrajectoryEntry>,
    pub aggregate: Aggregate,
}

impl MetricsFile {
    pub fn new(meta: RunMeta, trajectories: Vec<TrajectoryEntry>) -> Self {
        let aggregate = aggregate(&trajectories);
        Self { meta, trajectories, aggregate }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Success rate and mean lifting ratio over a run's trajectories.
pub fn aggregate(trajectories: &[TrajectoryEntry]) -> Aggregate {
    let n = trajectories.len();
    if n == 0 {
        return Aggregate { trajectory_count: 0, success_rate: 0.0, mean_lifting_ratio: 0.0 };
    }
    let successes = trajectories.iter().filter(|t| t.metrics.success).count();
    let ratio_sum: f64 = trajectories.iter().map(|t| t.metrics.lifting_ratio).sum();
    Aggregate {
        trajectory_count: n,
        success_rate: successes as f64 / n as f64,
        mean_lifting_ratio: ratio_sum / n as f64,
    }
}

/// One row of the combined report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub mode: String,
    pub task_weight: f64,
    pub swarm: usize,
    pub iterations: usize,
    pub success_rate: f64,
    pub lifting_ratio: f64,
}

/// Combined report over several metrics files, rows in a stable order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

/// Build the combined report: one row per metrics file, ordered by
/// (mode, task weight, swarm, iterations).
pub fn build_report(files: &[MetricsFile]) -> Result<Report> {
    if files.is_empty() {
        return Err(Error::Validation("report needs at least one metrics file".into()));
    }
    let mut rows: Vec<ReportRow> = files
        .iter()
        .map(|f| ReportRow {
            mode: f.meta.mode.clone(),
            task_weight: f.meta.task_weight,
            swarm: f.meta.swarm_size,
            iterations: f.meta.iterations,
            success_rate: f.aggregate.success_rate,
            lifting_ratio: f.aggregate.mean_lifting_ratio,
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.mode.as_str(), a.task_weight, a.swarm, a.iterations)
            .partial_cmp(&(b.mode.as_str(), b.task_weight, b.swarm, b.iterations))
            .expect("metric keys are finite")
    });
    Ok(Report { rows })
}

/// Render the report as CSV.
pub fn report_csv(report: &Report) -> String {
    let mut out = String::from("mode,task_weight,swarm,iterations,success_rate,lifting_ratio\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.mode, r.task_weight, r.swarm, r.iterations, r.success_rate, r.lifting_ratio
        ));
    }
    out
}
