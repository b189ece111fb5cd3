//! Provider-driven seeding: prompt construction, provider calls, stagnation
//! detection and the differential-seed distance filter.

pub mod batch;
pub mod differential;
pub mod mock;
pub mod prompt;
pub mod provider;
pub mod stagnation;

use thiserror::Error;

pub use batch::{extract_solution_array, provider_generate, RetryPolicy, SeedBatch};
pub use differential::{
    default_threshold, differential_filter, differential_seed_round, mean_reference_distance, FilterOutcome, RoundOutcome, RoundStep,
    SeedingContext,
};
pub use mock::{mock_generate, MockConfig, MockProvider};
pub use prompt::{PromptBuilder, PromptError, PromptKind, PromptSpec, DEFAULT_OBJECTIVES};
pub use provider::{Provider, ProviderError, ProviderKind, ProviderSettings, RemoteProvider};
pub use stagnation::{detect_stagnation, StagnationState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedingError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("provider deadline exceeded after retries")]
    ProviderTimeout,
    #[error("no solution array in provider response after retries")]
    ParseFailure,
    #[error(transparent)]
    Provider(ProviderError),
    #[error("differential filter needs at least one reference solution")]
    EmptyReference,
}
