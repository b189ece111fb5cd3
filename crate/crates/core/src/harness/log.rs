//! Append-only JSONL run log.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::RunConfig;
use crate::evolve::FitnessStats;
use crate::genome::{Origin, SolutionId};
use crate::seeding::RoundStep;
use crate::sut::ViolationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedingPhase {
    Initial,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Deadline,
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    /// Always first.
    Config {
        config: Box<RunConfig>,
        config_digest: String,
        world_digest: String,
    },
    Evaluation {
        generation: usize,
        /// 1-based evaluation index within the run.
        seq: usize,
        solution_id: SolutionId,
        origin: Origin,
        criticality: f64,
        /// Against the archive right after this solution's batch joined it.
        diversity: f64,
        violated: bool,
    },
    Violation {
        seq: usize,
        record: ViolationRecord,
        /// Canonical serialization of the violating solution.
        solution: String,
    },
    Seeding {
        generation: usize,
        phase: SeedingPhase,
        requested: usize,
        accepted: Vec<SolutionId>,
        shortfall: bool,
        steps: Vec<SeedingStep>,
    },
    Stagnation {
        generation: usize,
        top_k: Vec<SolutionId>,
    },
    Generation {
        generation: usize,
        evaluations: usize,
        population: Vec<SolutionId>,
        fitness: FitnessStats,
        best_criticality: f64,
        mean_diversity: f64,
        crossover_pairs: usize,
        mutations: usize,
    },
    Finished {
        evaluations: usize,
        generations: usize,
        reason: StopReason,
    },
}

/// Provider exchange as logged. Mirrors [`RoundStep`] with the raw text kept
/// so downstream state is reproducible from the log alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingStep {
    pub kind: crate::seeding::PromptKind,
    pub prompt_digest: String,
    pub requested: usize,
    pub provider_name: String,
    pub attempt: usize,
    pub raw_response_digest: String,
    pub raw_response: String,
    pub parsed_count: usize,
    pub returned: usize,
    pub accepted: Vec<SolutionId>,
    pub rejected: Vec<SolutionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl From<&RoundStep> for SeedingStep {
    fn from(s: &RoundStep) -> Self {
        Self {
            kind: s.kind,
            prompt_digest: s.prompt_digest.clone(),
            requested: s.requested,
            provider_name: s.batch.provider_name.clone(),
            attempt: s.batch.attempt,
            raw_response_digest: s.batch.raw_response_digest.clone(),
            raw_response: s.batch.raw_response.clone(),
            parsed_count: s.batch.parsed_count,
            returned: s.batch.solutions.len(),
            accepted: s.accepted.clone(),
            rejected: s.rejected.clone(),
            threshold: Some(s.threshold),
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub events: Vec<Event>,
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&event_line(e));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, LogError> {
        let mut events = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(&line).map_err(|source| LogError::Parse { line: i + 1, source })?;
            events.push(event);
        }
        Ok(Self { events })
    }
}

pub fn event_line(event: &Event) -> String {
    serde_json::to_string(event).expect("events serialize")
}

/// Writes each event as soon as it is produced and keeps a copy.
pub struct LogWriter<'a> {
    sink: Option<&'a mut (dyn Write + Send)>,
    log: RunLog,
}

impl<'a> LogWriter<'a> {
    pub fn new(sink: Option<&'a mut (dyn Write + Send)>) -> Self {
        Self {
            sink,
            log: RunLog::default(),
        }
    }

    pub fn append(&mut self, event: Event) -> std::io::Result<()> {
        if let Some(sink) = self.sink.as_mut() {
            writeln!(sink, "{}", event_line(&event))?;
        }
        self.log.events.push(event);
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        match self.sink.as_mut() {
            Some(sink) => sink.flush(),
            None => Ok(()),
        }
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn into_log(self) -> RunLog {
        self.log
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sut::{Quadrant, Violation, ViolationType};

    #[test]
    fn events_round_trip() {
        let config = RunConfig::default();
        let log = RunLog {
            events: vec![
                Event::Config {
                    config_digest: config.config_digest(),
                    world_digest: config.world_digest(),
                    config: Box::new(config),
                },
                Event::Evaluation {
                    generation: 0,
                    seq: 1,
                    solution_id: SolutionId(0xabc),
                    origin: Origin::Random,
                    criticality: 0.1 + 0.2,
                    diversity: 1.0 / 3.0,
                    violated: true,
                },
                Event::Violation {
                    seq: 1,
                    record: ViolationRecord {
                        solution_id: SolutionId(0xabc),
                        violation: Violation {
                            violation_type: ViolationType {
                                segment: 2,
                                quadrant: Quadrant::Left,
                            },
                            tick: 17,
                            sv_at_tick: 0.5,
                            npc: 1,
                        },
                        generation: 0,
                        wall_clock_ms: None,
                    },
                    solution: "{}".into(),
                },
                Event::Finished {
                    evaluations: 1,
                    generations: 1,
                    reason: StopReason::Budget,
                },
            ],
        };
        let text = log.to_jsonl();
        assert_eq!(RunLog::from_jsonl(&text).unwrap(), log);
        assert!(text.lines().next().unwrap().starts_with(r#"{"event":"config""#));
        assert!(RunLog::from_jsonl("{\"event\":\"nope\"}").is_err());
    }
}
