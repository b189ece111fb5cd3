//! Deterministic offline provider.
//!
//! Output is a pure function of the prompt text and a seed. Starting prompts
//! get trajectories whose start points are stratified over the four world
//! quadrants and that head for a point on the ego route at roughly the right
//! time. Feedback prompts get the same kind of trajectory, resampled until it
//! sits far enough from every embedded example.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use super::prompt::{PromptKind, PromptSpec, PromptWorld};
use super::provider::{Provider, ProviderError};
use crate::fitness::solution_distance;
use crate::genome::{Chromosome, Gene, Origin, ParticipantKind, Point, Solution, SolutionDraft};
use crate::rng::{purpose, stream};
use crate::sut::WorldConfig;

/// Tunables for the mock's behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MockConfig {
    /// Std-dev, in ticks, of the arrival time error on starting prompts.
    pub initial_jitter: f64,
    /// Same, on feedback prompts.
    pub feedback_jitter: f64,
    /// Max distance between the aimed point and the ego route.
    pub aim_offset: f64,
    /// Feedback candidates must beat `margin_factor * median pairwise ED` of
    /// the embedded examples.
    pub margin_factor: f64,
    /// Floor of the margin.
    pub min_margin: f64,
    pub max_resamples: usize,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            initial_jitter: 4.0,
            feedback_jitter: 1.0,
            aim_offset: 1.5,
            margin_factor: 1.25,
            min_margin: 1.0,
            max_resamples: 256,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockProvider {
    seed: u64,
    config: MockConfig,
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            config: MockConfig::default(),
        }
    }

    pub fn with_config(seed: u64, config: MockConfig) -> Self {
        Self { seed, config }
    }
}

impl Provider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn generate(&self, prompt: &PromptSpec) -> Result<String, ProviderError> {
        Ok(mock_generate_with(prompt, self.seed, &self.config))
    }
}

pub fn mock_generate(prompt: &PromptSpec, seed: u64) -> String {
    mock_generate_with(prompt, seed, &MockConfig::default())
}

pub fn mock_generate_with(prompt: &PromptSpec, seed: u64, config: &MockConfig) -> String {
    let digest = Sha256::digest(prompt.rendered_text.as_bytes());
    let mut key = [0u8; 8];
    key.copy_from_slice(&digest[..8]);
    let mut rng = stream(seed, &[purpose::PROVIDER, u64::from_be_bytes(key)]);
    let world = PromptWorld::parse_from(&prompt.rendered_text)
        .map(|w| w.to_world())
        .unwrap_or_default();
    let n = prompt.requested_count;

    let solutions: Vec<Solution> = match prompt.kind {
        PromptKind::Starting | PromptKind::TaskUnderstanding => {
            let base = rng.random_range(0..1024);
            let mut counter = 0;
            (0..n)
                .map(|_| {
                    let count = rng.random_range(1..=world.chromosomes_max);
                    let chromosomes = (0..count)
                        .map(|_| {
                            let start = stratified_start(&world, base, counter);
                            counter += 1;
                            aimed_chromosome(&mut rng, &world, start, config.initial_jitter, config.aim_offset)
                        })
                        .collect();
                    Solution::new(chromosomes, Origin::SeedInitial, 0)
                })
                .collect()
        }
        PromptKind::FeedbackRule1 | PromptKind::FeedbackRule2 => {
            let examples: Vec<Solution> = prompt
                .embedded_examples
                .iter()
                .filter_map(|e| serde_json::from_str::<SolutionDraft>(e).ok())
                .map(|d| d.into_solution(Origin::SeedInitial, 0))
                .collect();
            let margin = feedback_margin(&examples, config);
            (0..n)
                .map(|_| differential_candidate(&mut rng, &world, &examples, margin, config))
                .collect()
        }
    };
    let body: Vec<String> = solutions.iter().map(Solution::to_canonical_json).collect();
    format!(
        "Here are {} solutions.\n```json\n[{}]\n```\n",
        solutions.len(),
        body.join(",\n")
    )
}

/// Point `index` of a per-quadrant Halton sequence, cycling the quadrants.
fn stratified_start(world: &WorldConfig, base: usize, index: usize) -> Point {
    let quadrant = index % 4;
    let k = base + index / 4 + 1;
    let (u, v) = (radical_inverse(k, 2), radical_inverse(k, 3));
    let half_x = (world.x_bounds[1] - world.x_bounds[0]) / 2.0;
    let half_y = (world.y_bounds[1] - world.y_bounds[0]) / 2.0;
    let x0 = world.x_bounds[0] + if quadrant % 2 == 1 { half_x } else { 0.0 };
    let y0 = world.y_bounds[0] + if quadrant >= 2 { half_y } else { 0.0 };
    Point::new(x0 + u * half_x, y0 + v * half_y)
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while k > 0 {
        inv += (k % base) as f64 * f;
        k /= base;
        f /= base as f64;
    }
    inv
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Straight-line trajectory from `start` that passes near the ego route at a
/// chosen tick, give or take `jitter` ticks.
fn aimed_chromosome(rng: &mut ChaCha8Rng, world: &WorldConfig, start: Point, jitter: f64, aim_offset: f64) -> Chromosome {
    let per = world.ticks_per_gene as usize;
    let ticks = world.ticks();
    let cruise = 0.95 * world.speed_max;
    let first = per.min(ticks - 1);
    let reachable: Vec<usize> = (first..ticks)
        .filter(|&t| start.distance(world.ego_path[t]) + aim_offset <= cruise * t as f64)
        .collect();
    let tau = if reachable.is_empty() {
        ticks - 1
    } else {
        reachable[rng.random_range(0..reachable.len())]
    };
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = aim_offset * rng.random::<f64>().sqrt();
    let aim = world.clamp(world.ego_path[tau] + Point::new(angle.cos(), angle.sin()) * radius);
    let noise = Normal::new(0.0, jitter.max(0.0)).expect("finite jitter");
    let arrival = (tau as f64 + noise.sample(rng)).round().max(1.0);
    let arrival = arrival.max(start.distance(aim) / cruise);

    let velocity = (aim - start) * (1.0 / arrival);
    let genes_n = world.genes_max.max(2);
    let positions: Vec<Point> = (0..genes_n)
        .map(|k| {
            let p = world.clamp(start + velocity * (k * per) as f64);
            Point::new(round3(p.x), round3(p.y))
        })
        .collect();
    let genes = positions
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let speed = match positions.get(k + 1) {
                Some(&next) => ((p.distance(next) / per as f64 * 1000.0).ceil() + 2.0) / 1000.0,
                None => 0.0,
            };
            Gene::at(p, speed.min(world.speed_max))
        })
        .collect();
    let kind = if velocity.norm() <= 1.0 {
        ParticipantKind::Pedestrian
    } else {
        ParticipantKind::Vehicle
    };
    Chromosome::new(kind, genes)
}

fn feedback_margin(examples: &[Solution], config: &MockConfig) -> f64 {
    let mut pairwise: Vec<f64> = examples
        .iter()
        .enumerate()
        .flat_map(|(i, a)| examples[i + 1..].iter().map(move |b| solution_distance(a, b)))
        .collect();
    if pairwise.is_empty() {
        return config.min_margin;
    }
    pairwise.sort_by(f64::total_cmp);
    (config.margin_factor * median_sorted(&pairwise)).max(config.min_margin)
}

pub(crate) fn median_sorted(values: &[f64]) -> f64 {
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

fn mean_distance(s: &Solution, examples: &[Solution]) -> f64 {
    if examples.is_empty() {
        return f64::INFINITY;
    }
    examples.iter().map(|e| solution_distance(s, e)).sum::<f64>() / examples.len() as f64
}

/// Start point from which some tick of the ego route is reachable at cruise
/// speed: a random tick, then a random point inside its reach disk.
fn reachable_start(rng: &mut ChaCha8Rng, world: &WorldConfig, aim_offset: f64) -> Point {
    let per = world.ticks_per_gene as usize;
    let tick = rng.random_range(per.min(world.ticks() - 1)..world.ticks());
    let reach = (0.95 * world.speed_max * tick as f64 - aim_offset).max(0.0);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = reach * rng.random::<f64>().sqrt();
    world.clamp(world.ego_path[tick] + Point::new(angle.cos(), angle.sin()) * radius)
}

/// Keeps the first candidate strictly beyond `margin`, else the farthest seen.
fn differential_candidate(
    rng: &mut ChaCha8Rng,
    world: &WorldConfig,
    examples: &[Solution],
    margin: f64,
    config: &MockConfig,
) -> Solution {
    let mut best: Option<(f64, Solution)> = None;
    for _ in 0..config.max_resamples.max(1) {
        let count = rng.random_range(1..=world.chromosomes_max);
        let chromosomes = (0..count)
            .map(|_| {
                let start = reachable_start(rng, world, config.aim_offset);
                aimed_chromosome(rng, world, start, config.feedback_jitter, config.aim_offset)
            })
            .collect();
        let candidate = Solution::new(chromosomes, Origin::SeedDifferential, 0);
        let d = mean_distance(&candidate, examples);
        if d > margin {
            return candidate;
        }
        if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
            best = Some((d, candidate));
        }
    }
    best.expect("at least one candidate").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::validate;
    use crate::seeding::batch::extract_solution_array;
    use crate::seeding::prompt::{PromptBuilder, DEFAULT_OBJECTIVES};

    fn builder() -> PromptBuilder {
        PromptBuilder::new(&WorldConfig::default(), DEFAULT_OBJECTIVES)
    }

    fn parse(text: &str) -> Vec<Solution> {
        extract_solution_array(text)
            .unwrap()
            .into_iter()
            .map(|v| serde_json::from_value::<SolutionDraft>(v).unwrap().into_solution(Origin::SeedInitial, 0))
            .collect()
    }

    #[test]
    fn same_prompt_and_seed_give_identical_text() {
        let p = builder().initial(&[], 6).unwrap();
        assert_eq!(mock_generate(&p, 9), mock_generate(&p, 9));
        assert_ne!(mock_generate(&p, 9), mock_generate(&p, 10));
    }

    #[test]
    fn starting_output_is_valid_and_complete() {
        let world = WorldConfig::default();
        let p = builder().initial(&[], 10).unwrap();
        for seed in 0..20 {
            let sols = parse(&mock_generate(&p, seed));
            assert_eq!(sols.len(), 10);
            for s in &sols {
                assert!(validate(s, &world).is_valid(), "{:?}", validate(s, &world));
                assert!(s.chromosomes().iter().all(|c| c.len() == world.genes_max));
            }
        }
    }

    #[test]
    fn starting_points_cover_every_quadrant() {
        let world = WorldConfig::default();
        let cx = (world.x_bounds[0] + world.x_bounds[1]) / 2.0;
        let cy = (world.y_bounds[0] + world.y_bounds[1]) / 2.0;
        let p = builder().initial(&[], 10).unwrap();
        for seed in 0..50 {
            let sols = parse(&mock_generate(&p, seed));
            let mut seen = std::collections::BTreeSet::new();
            for s in &sols {
                for c in s.chromosomes() {
                    let g = c.genes()[0];
                    seen.insert((g.x >= cx, g.y >= cy));
                }
            }
            assert!(seen.len() >= 4, "seed {seed}: {seen:?}");
        }
    }

    #[test]
    fn feedback_output_differs_from_a_lone_example() {
        let p0 = builder().initial(&[], 1).unwrap();
        let se = parse(&mock_generate(&p0, 1)).remove(0);
        let p = builder().feedback(&[&se], &[], 5).unwrap();
        for seed in 0..10 {
            let sols = parse(&mock_generate(&p, seed));
            assert_eq!(sols.len(), 5);
            for s in &sols {
                assert!(solution_distance(s, &se) > 0.0);
                assert!(validate(s, &WorldConfig::default()).is_valid());
            }
        }
    }

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }
}
