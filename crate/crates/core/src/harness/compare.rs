//! Cross-run comparison tables and the cumulative violation series.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::config::Variant;
use super::metrics::RunMetrics;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("runs come from different worlds: {0} vs {1}")]
    IncompatibleRuns(String, String),
    #[error("comparison needs at least 2 metric sets, got {0}")]
    TooFewRuns(usize),
}

/// Metric columns, in report order.
pub const METRICS: [&str; 6] = [
    "types_detected",
    "solutions_per_violation",
    "evals_to_first_violation",
    "evals_to_all_types",
    "violations_found",
    "type_diversity",
];

fn metric(m: &RunMetrics, name: &str) -> Option<f64> {
    match name {
        "types_detected" => Some(m.types_detected as f64),
        "solutions_per_violation" => Some(m.solutions_per_violation),
        "evals_to_first_violation" => m.evals_to_first_violation.map(|v| v as f64),
        "evals_to_all_types" => m.evals_to_all_types.map(|v| v as f64),
        "violations_found" => Some(m.violations_found as f64),
        "type_diversity" => Some(m.type_diversity),
        _ => unreachable!("unknown metric {name}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub metric: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub avg: Option<f64>,
    /// Runs where the metric never materialized (e.g. no violation at all).
    pub never: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub rows: Vec<Summary>,
    /// `avg - reference avg` per metric; the reference is the first variant.
    pub deltas: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub world_digest: String,
    pub variants: Vec<VariantSummary>,
    #[serde(skip)]
    pub cumulative_csv: String,
}

fn summarize(runs: &[&RunMetrics], name: &str) -> Summary {
    let values: Vec<f64> = runs.iter().filter_map(|m| metric(m, name)).collect();
    let (min, max, avg) = if values.is_empty() {
        (None, None, None)
    } else {
        (
            Some(values.iter().copied().fold(f64::INFINITY, f64::min)),
            Some(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            Some(values.iter().sum::<f64>() / values.len() as f64),
        )
    };
    Summary {
        metric: name.to_string(),
        min,
        max,
        avg,
        never: runs.len() - values.len(),
    }
}

pub fn compare(metrics: &[RunMetrics]) -> Result<ComparisonReport, CompareError> {
    if metrics.len() < 2 {
        return Err(CompareError::TooFewRuns(metrics.len()));
    }
    let world = &metrics[0].world_digest;
    if let Some(other) = metrics.iter().find(|m| &m.world_digest != world) {
        return Err(CompareError::IncompatibleRuns(world.clone(), other.world_digest.clone()));
    }

    let mut order: Vec<Variant> = Vec::new();
    for m in metrics {
        if !order.contains(&m.variant) {
            order.push(m.variant);
        }
    }
    let mut variants: Vec<VariantSummary> = order
        .iter()
        .map(|&v| {
            let runs: Vec<&RunMetrics> = metrics.iter().filter(|m| m.variant == v).collect();
            VariantSummary {
                variant: v,
                seeds: runs.iter().map(|m| m.master_seed).collect(),
                rows: METRICS.iter().map(|name| summarize(&runs, name)).collect(),
                deltas: Vec::new(),
            }
        })
        .collect();
    let reference: Vec<Option<f64>> = variants[0].rows.iter().map(|r| r.avg).collect();
    for v in &mut variants {
        v.deltas = v
            .rows
            .iter()
            .zip(&reference)
            .map(|(r, base)| Some(r.avg? - (*base)?))
            .collect();
    }

    Ok(ComparisonReport {
        world_digest: world.clone(),
        variants,
        cumulative_csv: cumulative_csv(metrics),
    })
}

/// One row per evaluation, one column per run: violations found so far.
pub fn cumulative_csv(metrics: &[RunMetrics]) -> String {
    let mut out = String::from("evaluation");
    for m in metrics {
        let _ = write!(out, ",{}_seed{}", m.variant, m.master_seed);
    }
    out.push('\n');
    let horizon = metrics.iter().map(|m| m.solutions_generated).max().unwrap_or(0);
    let mut cursors = vec![0usize; metrics.len()];
    for e in 1..=horizon {
        let _ = write!(out, "{e}");
        for (m, c) in metrics.iter().zip(cursors.iter_mut()) {
            while *c < m.violation_evals.len() && m.violation_evals[*c] <= e {
                *c += 1;
            }
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "never".to_string(), |x| format!("{x:.2}"))
}

impl ComparisonReport {
    /// Markdown table: one block of rows per variant.
    pub fn render(&self) -> String {
        let mut out = format!("world {}\n\n", &self.world_digest[..12.min(self.world_digest.len())]);
        out.push_str("| variant | runs | metric | min | max | avg | never | delta |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for v in &self.variants {
            for (row, delta) in v.rows.iter().zip(&v.deltas) {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | {} |",
                    v.variant,
                    v.seeds.len(),
                    row.metric,
                    cell(row.min),
                    cell(row.max),
                    cell(row.avg),
                    row.never,
                    delta.map_or_else(|| "-".to_string(), |d| format!("{d:+.2}")),
                );
            }
        }
        out
    }
}
