//! Adaptive multi-objective evolutionary search for safety-violating
//! scenarios.
//!
//! The engine evolves multi-participant trajectories against a surrogate
//! system under test, minimizing the distance to a safety violation while
//! keeping generated scenarios diverse. A text-generation provider seeds the
//! first population and, when the search stagnates, proposes differential
//! seeds that move away from what has already been found.
//!
//! Modules, bottom-up:
//! - [`genome`]: scenario encoding, validation, repair and identity.
//! - [`sut`]: the surrogate executor and violation taxonomy.
//! - [`fitness`]: objectives, archive, Pareto sorting and crowding.
//! - [`evolve`]: adaptive selection/variation and the fixed-threshold baseline.
//! - [`seeding`]: prompts, providers, stagnation and differential seeds.
//! - [`harness`]: the run loop, JSONL logs, metrics and comparisons.

pub mod evolve;
pub mod fitness;
pub mod genome;
pub mod harness;
pub mod rng;
pub mod seeding;
pub mod sut;
