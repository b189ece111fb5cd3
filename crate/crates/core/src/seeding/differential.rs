//! Differential seeds: new provider solutions that must sit far enough from
//! everything already seen.

use std::collections::HashSet;

use serde::Serialize;

use super::batch::{provider_generate, RetryPolicy, SeedBatch};
use super::mock::median_sorted;
use super::prompt::{PromptBuilder, PromptKind};
use super::provider::Provider;
use super::SeedingError;
use crate::fitness::solution_distance;
use crate::genome::{Origin, Solution, SolutionId};
use crate::sut::WorldConfig;

/// Mean solution distance from `s` to every reference solution.
pub fn mean_reference_distance(s: &Solution, reference: &[&Solution]) -> f64 {
    reference.iter().map(|r| solution_distance(s, r)).sum::<f64>() / reference.len() as f64
}

/// Median pairwise distance within `reference`, or `fallback` when it has
/// fewer than two members.
pub fn default_threshold(reference: &[&Solution], fallback: f64) -> f64 {
    let mut pairwise: Vec<f64> = reference
        .iter()
        .enumerate()
        .flat_map(|(i, a)| reference[i + 1..].iter().map(move |b| solution_distance(a, b)))
        .collect();
    if pairwise.is_empty() {
        return fallback;
    }
    pairwise.sort_by(f64::total_cmp);
    median_sorted(&pairwise)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub accepted: Vec<Solution>,
    pub rejected: Vec<Solution>,
    /// `d_i` for each batch member, in batch order.
    pub distances: Vec<f64>,
}

/// Accepts `s_i` iff its mean distance to `reference` is at least `threshold`.
pub fn differential_filter(batch: &[Solution], reference: &[&Solution], threshold: f64) -> Result<FilterOutcome, SeedingError> {
    if reference.is_empty() {
        return Err(SeedingError::EmptyReference);
    }
    let mut out = FilterOutcome {
        accepted: Vec::new(),
        rejected: Vec::new(),
        distances: Vec::with_capacity(batch.len()),
    };
    for s in batch {
        let d = mean_reference_distance(s, reference);
        out.distances.push(d);
        if d >= threshold {
            out.accepted.push(s.clone());
        } else {
            out.rejected.push(s.clone());
        }
    }
    Ok(out)
}

/// Shared plumbing for provider-backed seeding.
pub struct SeedingContext<'a> {
    pub builder: &'a PromptBuilder,
    pub provider: &'a dyn Provider,
    pub world: &'a WorldConfig,
    pub retry: RetryPolicy,
    pub max_attempts: usize,
    pub generation: usize,
}

/// One provider exchange inside a round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundStep {
    pub kind: PromptKind,
    pub prompt_digest: String,
    pub requested: usize,
    #[serde(flatten)]
    pub batch: SeedBatch,
    pub accepted: Vec<SolutionId>,
    pub rejected: Vec<SolutionId>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundOutcome {
    pub accepted: Vec<Solution>,
    pub attempts: usize,
    pub shortfall: bool,
    pub steps: Vec<RoundStep>,
}

/// Feedback request, then regeneration requests over the rejected set until `n`
/// seeds are accepted, nothing is rejected, or the attempt budget runs out.
pub fn differential_seed_round(
    se: &[&Solution],
    sn: &[&Solution],
    n: usize,
    ctx: &SeedingContext<'_>,
    threshold: f64,
) -> Result<RoundOutcome, SeedingError> {
    if n == 0 {
        return Ok(RoundOutcome::default());
    }
    if se.is_empty() {
        return Err(SeedingError::Prompt(super::prompt::PromptError::NoViolatingExamples));
    }
    let reference: Vec<&Solution> = se.iter().chain(sn).copied().collect();
    let mut seen: HashSet<SolutionId> = reference.iter().map(|s| s.id()).collect();
    let mut outcome = RoundOutcome::default();
    let mut rejected: Vec<Solution> = Vec::new();

    while outcome.attempts < ctx.max_attempts.max(1) {
        let want = n - outcome.accepted.len();
        let prompt = if outcome.attempts == 0 {
            ctx.builder.feedback_fitting(se, sn, want)?
        } else {
            let r: Vec<&Solution> = rejected.iter().collect();
            ctx.builder.regeneration_fitting(&r, se, want)?
        };
        outcome.attempts += 1;
        let batch = provider_generate(
            &prompt,
            ctx.provider,
            ctx.world,
            &ctx.retry,
            Origin::SeedDifferential,
            ctx.generation,
            outcome.attempts,
        )?;
        let fresh: Vec<Solution> = batch
            .solutions
            .iter()
            .filter(|s| !seen.contains(&s.id()))
            .cloned()
            .collect();
        let filtered = differential_filter(&fresh, &reference, threshold)?;
        let mut accepted_ids = Vec::new();
        for s in filtered.accepted {
            if outcome.accepted.len() < n && seen.insert(s.id()) {
                accepted_ids.push(s.id());
                outcome.accepted.push(s);
            }
        }
        // Copies of known solutions count as rejected too.
        rejected = batch
            .solutions
            .iter()
            .filter(|s| !accepted_ids.contains(&s.id()))
            .cloned()
            .collect();
        outcome.steps.push(RoundStep {
            kind: prompt.kind,
            prompt_digest: prompt.digest(),
            requested: want,
            batch,
            accepted: accepted_ids,
            rejected: rejected.iter().map(Solution::id).collect(),
            threshold,
        });
        if outcome.accepted.len() >= n || rejected.is_empty() {
            break;
        }
    }
    outcome.shortfall = outcome.accepted.len() < n;
    Ok(outcome)
}
