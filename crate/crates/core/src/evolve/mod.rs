//! Selection and variation operators.

mod baseline;
mod selection;
mod survivors;
mod variation;

use thiserror::Error;

pub use baseline::{baseline_variation, uniform_crossover, value_mutation, BaselineConfig};
pub use selection::{
    adaptive_selection, crossover_probability, mutation_probability, threshold_from_stats,
    variation_threshold, AdaptiveParams, FitnessStats, VariationPlan,
};
pub use survivors::survivor_selection;
pub use variation::{
    adaptive_crossover, adaptive_mutation, chromosome_diversity, parameter_mutation, random_gene,
    random_solution, rank_profiles, single_point_crossover, structural_mutation, ChromosomeScores, MutationConfig,
    Objective, RankProfile, Ranks, StructuralOp,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvolveError {
    #[error("population of {0} is too small for variation (need at least 2)")]
    PopulationTooSmall(usize),
    #[error("selected chromosome has fewer than 2 genes")]
    DegenerateChromosome,
    #[error("rank profile does not cover every chromosome")]
    MissingRanks,
}
