//! Turning provider text into validated solutions.

use std::collections::HashSet;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::prompt::PromptSpec;
use super::provider::{Provider, ProviderError};
use super::SeedingError;
use crate::genome::{repair, validate, Origin, Solution, SolutionDraft};
use crate::sut::WorldConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedBatch {
    #[serde(skip)]
    pub solutions: Vec<Solution>,
    pub provider_name: String,
    pub attempt: usize,
    pub raw_response_digest: String,
    /// Number of array elements the response contained.
    pub parsed_count: usize,
    pub raw_response: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    /// Delay before the first retry; doubles each time.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

/// First JSON array in `text` whose elements are all objects with a
/// `chromosomes` field. Markdown fences need no special handling.
pub fn extract_solution_array(text: &str) -> Option<Vec<Value>> {
    for (pos, _) in text.match_indices('[') {
        let mut values = serde_json::Deserializer::from_str(&text[pos..]).into_iter::<Value>();
        if let Some(Ok(Value::Array(items))) = values.next() {
            let looks_right = !items.is_empty()
                && items
                    .iter()
                    .all(|v| v.as_object().is_some_and(|o| o.contains_key("chromosomes")));
            if looks_right {
                return Some(items);
            }
        }
    }
    None
}

/// Repairs every parsable element; drops the rest and in-batch duplicates.
pub fn solutions_from_values(values: Vec<Value>, world: &WorldConfig, origin: Origin, generation: usize) -> Vec<Solution> {
    let mut seen = HashSet::new();
    values
        .into_iter()
        .filter_map(|v| serde_json::from_value::<SolutionDraft>(v).ok())
        .filter_map(|d| repair(&d.into_solution(origin, generation), world).ok())
        .filter(|s| validate(s, world).is_valid() && seen.insert(s.id()))
        .collect()
}

/// Calls the provider, retrying timeouts and unparsable replies with
/// exponential backoff.
pub fn provider_generate(
    prompt: &PromptSpec,
    provider: &dyn Provider,
    world: &WorldConfig,
    retry: &RetryPolicy,
    origin: Origin,
    generation: usize,
    attempt: usize,
) -> Result<SeedBatch, SeedingError> {
    let mut delay = retry.backoff;
    let mut tries = 0;
    loop {
        let outcome = match provider.generate(prompt) {
            Ok(text) => match extract_solution_array(&text) {
                Some(values) => {
                    let parsed_count = values.len();
                    let solutions = solutions_from_values(values, world, origin, generation);
                    return Ok(SeedBatch {
                        solutions,
                        provider_name: provider.name().to_string(),
                        attempt,
                        raw_response_digest: hex::encode(Sha256::digest(text.as_bytes())),
                        parsed_count,
                        raw_response: text,
                    });
                }
                None => SeedingError::ParseFailure,
            },
            Err(ProviderError::Timeout) => SeedingError::ProviderTimeout,
            Err(other) => return Err(SeedingError::Provider(other)),
        };
        if tries >= retry.max_retries {
            return Err(outcome);
        }
        tries += 1;
        std::thread::sleep(delay);
        delay *= 2;
    }
}
