//! Run metrics, recomputed purely from log events.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::Variant;
use super::log::{Event, RunLog};
use crate::evolve::FitnessStats;
use crate::fitness::solution_distance;
use crate::genome::{Origin, SolutionDraft, SolutionId};
use crate::sut::ViolationType;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub evaluations: usize,
    pub fitness: FitnessStats,
    pub best_criticality: f64,
    pub mean_diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub variant: Variant,
    pub master_seed: u64,
    pub world_digest: String,
    pub config_digest: String,
    pub types_detected: usize,
    pub solutions_generated: usize,
    pub violations_found: usize,
    pub solutions_per_violation: f64,
    /// 1-based index of the first violating evaluation; `None` means never.
    pub evals_to_first_violation: Option<usize>,
    /// Evaluation at which the last type of the final set first appeared.
    pub evals_to_all_types: Option<usize>,
    /// Mean pairwise distance between the first solution found for each type.
    pub type_diversity: f64,
    pub violation_types: Vec<ViolationType>,
    /// 1-based indices of every violating evaluation.
    pub violation_evals: Vec<usize>,
    pub differential_seeds: usize,
    pub stagnation_events: usize,
    pub generations: Vec<GenerationStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("malformed log: {0}")]
    MalformedLog(String),
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, MetricsError> {
    Err(MetricsError::MalformedLog(msg.into()))
}

pub fn compute_metrics(log: &RunLog) -> Result<RunMetrics, MetricsError> {
    let mut events = log.events.iter();
    let (variant, master_seed, world_digest, config_digest) = match events.next() {
        Some(Event::Config {
            config,
            config_digest,
            world_digest,
        }) => (config.variant, config.master_seed, world_digest.clone(), config_digest.clone()),
        _ => return malformed("first event must be the config"),
    };

    let mut seq = 0;
    let mut generation = 0;
    let mut pending_violation: Option<SolutionId> = None;
    let mut violation_evals = Vec::new();
    let mut first_of_type: BTreeMap<ViolationType, (usize, String)> = BTreeMap::new();
    let mut differential_seeds = 0;
    let mut stagnation_events = 0;
    let mut generations = Vec::new();

    for event in events {
        match event {
            Event::Config { .. } => return malformed("config event after the first line"),
            Event::Evaluation {
                generation: g,
                seq: s,
                solution_id,
                origin,
                violated,
                ..
            } => {
                if let Some(id) = pending_violation.take() {
                    return malformed(format!("evaluation {seq} of {id} violated but has no violation event"));
                }
                if *s != seq + 1 {
                    return malformed(format!("evaluation seq {s} follows {seq}"));
                }
                if *g < generation {
                    return malformed(format!("generation {g} after {generation}"));
                }
                seq = *s;
                generation = *g;
                if *origin == Origin::SeedDifferential {
                    differential_seeds += 1;
                }
                if *violated {
                    pending_violation = Some(*solution_id);
                }
            }
            Event::Violation { seq: s, record, solution } => {
                match pending_violation.take() {
                    Some(id) if id == record.solution_id && *s == seq => {}
                    _ => return malformed(format!("violation for {} does not follow its evaluation", record.solution_id)),
                }
                violation_evals.push(seq);
                first_of_type
                    .entry(record.violation_type())
                    .or_insert_with(|| (seq, solution.clone()));
            }
            Event::Seeding { generation: g, .. } | Event::Stagnation { generation: g, .. } => {
                if *g < generation {
                    return malformed(format!("generation {g} after {generation}"));
                }
                if matches!(event, Event::Stagnation { .. }) {
                    stagnation_events += 1;
                }
            }
            Event::Generation {
                generation: g,
                evaluations,
                fitness,
                best_criticality,
                mean_diversity,
                ..
            } => {
                if *evaluations != seq {
                    return malformed(format!("generation {g} reports {evaluations} evaluations, log has {seq}"));
                }
                generation = *g;
                generations.push(GenerationStats {
                    generation: *g,
                    evaluations: *evaluations,
                    fitness: *fitness,
                    best_criticality: *best_criticality,
                    mean_diversity: *mean_diversity,
                });
            }
            Event::Finished { evaluations, .. } => {
                if *evaluations != seq {
                    return malformed(format!("finished with {evaluations} evaluations, log has {seq}"));
                }
            }
        }
    }
    if let Some(id) = pending_violation {
        return malformed(format!("evaluation of {id} violated but has no violation event"));
    }

    let representatives = first_of_type
        .values()
        .map(|(_, json)| {
            serde_json::from_str::<SolutionDraft>(json)
                .map(|d| d.into_solution(Origin::SeedInitial, 0))
                .map_err(|e| MetricsError::MalformedLog(format!("violating solution does not parse: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut pair_sum = 0.0;
    let mut pairs = 0usize;
    for (i, a) in representatives.iter().enumerate() {
        for b in &representatives[i + 1..] {
            pair_sum += solution_distance(a, b);
            pairs += 1;
        }
    }

    let violations_found = violation_evals.len();
    Ok(RunMetrics {
        variant,
        master_seed,
        world_digest,
        config_digest,
        types_detected: first_of_type.len(),
        solutions_generated: seq,
        violations_found,
        solutions_per_violation: seq as f64 / violations_found.max(1) as f64,
        evals_to_first_violation: violation_evals.first().copied(),
        evals_to_all_types: first_of_type.values().map(|(s, _)| *s).max(),
        type_diversity: if pairs == 0 { 0.0 } else { pair_sum / pairs as f64 },
        violation_types: first_of_type.keys().copied().collect(),
        violation_evals,
        differential_seeds,
        stagnation_events,
        generations,
    })
}
