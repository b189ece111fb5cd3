//! Rank-aware crossover and mutation.
//!
//! Chromosomes are scored individually on both objectives and ranked across
//! the whole generation. Crossover spreads a parent's strongest chromosome;
//! mutation nudges strong chromosomes and restructures weak ones.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::EvolveError;
use crate::fitness::{trajectory_distance, Archive, Objectives};
use crate::genome::{repair_chromosomes, Chromosome, Gene, Origin, ParticipantKind, Point, Solution};
use crate::sut::WorldConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Criticality,
    Diversity,
}

/// Normalized ranks in `[0, 1)`, 0 = best in the generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranks {
    pub criticality: f64,
    pub diversity: f64,
}

impl Ranks {
    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Criticality => self.criticality,
            Objective::Diversity => self.diversity,
        }
    }

    pub fn best(&self) -> f64 {
        self.criticality.min(self.diversity)
    }

    /// Objective this entity ranks highest on; criticality wins ties.
    pub fn best_objective(&self) -> Objective {
        if self.diversity < self.criticality {
            Objective::Diversity
        } else {
            Objective::Criticality
        }
    }
}

/// Where a solution and each of its chromosomes stand in the generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub solution: Ranks,
    pub chromosomes: Vec<Ranks>,
}

/// Diversity score of one chromosome: mean trajectory distance to every
/// chromosome of every other archived solution.
pub fn chromosome_diversity(owner: &Solution, chromosome: &Chromosome, archive: &Archive) -> f64 {
    let (sum, n) = archive
        .iter()
        .filter(|s| s.id() != owner.id())
        .flat_map(|s| s.chromosomes())
        .fold((0.0, 0usize), |(sum, n), other| {
            (sum + trajectory_distance(chromosome, other), n + 1)
        });
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Raw per-chromosome scores for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromosomeScores {
    pub solution: Objectives,
    pub chromosomes: Vec<Objectives>,
}

fn normalized_ranks(values: &[f64], ascending: bool) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        (if ascending { ord } else { ord.reverse() }).then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos as f64 / n as f64;
    }
    ranks
}

/// Ranks every solution and chromosome of a generation on each objective.
pub fn rank_profiles(scores: &[ChromosomeScores]) -> Vec<RankProfile> {
    let sol_crit: Vec<f64> = scores.iter().map(|s| s.solution.criticality).collect();
    let sol_div: Vec<f64> = scores.iter().map(|s| s.solution.diversity).collect();
    let sol_crit_rank = normalized_ranks(&sol_crit, true);
    let sol_div_rank = normalized_ranks(&sol_div, false);

    let flat: Vec<Objectives> = scores.iter().flat_map(|s| s.chromosomes.iter().copied()).collect();
    let crit_rank = normalized_ranks(&flat.iter().map(|o| o.criticality).collect::<Vec<_>>(), true);
    let div_rank = normalized_ranks(&flat.iter().map(|o| o.diversity).collect::<Vec<_>>(), false);

    let mut cursor = 0;
    scores
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let chromosomes = (cursor..cursor + s.chromosomes.len())
                .map(|k| Ranks {
                    criticality: crit_rank[k],
                    diversity: div_rank[k],
                })
                .collect();
            cursor += s.chromosomes.len();
            RankProfile {
                solution: Ranks {
                    criticality: sol_crit_rank[i],
                    diversity: sol_div_rank[i],
                },
                chromosomes,
            }
        })
        .collect()
}

/// Classic single-point crossover: heads swap tails at `cut`.
pub fn single_point_crossover(a: &[Gene], b: &[Gene], cut: usize) -> (Vec<Gene>, Vec<Gene>) {
    let mut left = a[..cut].to_vec();
    left.extend_from_slice(&b[cut..]);
    let mut right = b[..cut].to_vec();
    right.extend_from_slice(&a[cut..]);
    (left, right)
}

fn repaired(chromosomes: &[Chromosome], world: &WorldConfig, origin: Origin, generation: usize) -> Solution {
    let fixed = repair_chromosomes(chromosomes, world)
        .expect("variation keeps chromosomes non-empty and finite");
    Solution::new(fixed, origin, generation)
}

/// Crosses `parent_a`'s best chromosome (on the objective `parent_a` ranks
/// highest on) with a random chromosome of `parent_b` at a random cut in
/// `[1, min_len - 1]`. Offspring are repaired.
pub fn adaptive_crossover<R: Rng + ?Sized>(
    parent_a: &Solution,
    profile_a: &RankProfile,
    parent_b: &Solution,
    rng: &mut R,
    world: &WorldConfig,
    generation: usize,
) -> Result<(Solution, Solution), EvolveError> {
    let objective = profile_a.solution.best_objective();
    let ia = profile_a
        .chromosomes
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.get(objective).total_cmp(&y.get(objective)))
        .map(|(i, _)| i)
        .ok_or(EvolveError::MissingRanks)?;
    if profile_a.chromosomes.len() != parent_a.chromosomes().len() {
        return Err(EvolveError::MissingRanks);
    }
    let ib = rng.random_range(0..parent_b.chromosomes().len());
    let (ca, cb) = (&parent_a.chromosomes()[ia], &parent_b.chromosomes()[ib]);
    if ca.len() < 2 || cb.len() < 2 {
        return Err(EvolveError::DegenerateChromosome);
    }
    let alpha = ca.len().min(cb.len()) - 1;
    let cut = rng.random_range(1..=alpha);
    let (ga, gb) = single_point_crossover(ca.genes(), cb.genes(), cut);

    let mut child_a = parent_a.chromosomes().to_vec();
    child_a[ia] = Chromosome::new(ca.kind(), ga);
    let mut child_b = parent_b.chromosomes().to_vec();
    child_b[ib] = Chromosome::new(cb.kind(), gb);
    Ok((
        repaired(&child_a, world, Origin::Crossover, generation),
        repaired(&child_b, world, Origin::Crossover, generation),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutationConfig {
    /// Chromosomes ranked within this top fraction on any objective get
    /// parameter mutation; the rest get structural mutation.
    pub top_fraction: f64,
    /// Standard deviation of coordinate noise.
    pub sigma: f64,
    /// Chance that a gene is perturbed during parameter mutation.
    pub gene_probability: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            top_fraction: 0.25,
            sigma: 1.0,
            gene_probability: 0.5,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.top_fraction) {
            return Err(format!("mutation.top_fraction must lie in [0, 1], got {}", self.top_fraction));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(format!("mutation.sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(0.0..=1.0).contains(&self.gene_probability) {
            return Err(format!(
                "mutation.gene_probability must lie in [0, 1], got {}",
                self.gene_probability
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralOp {
    Reverse,
    Insert,
    Replace,
}

/// Waypoint drawn uniformly from the world with a uniform speed.
pub fn random_gene<R: Rng + ?Sized>(rng: &mut R, world: &WorldConfig) -> Gene {
    Gene::new(
        rng.random_range(world.x_bounds[0]..=world.x_bounds[1]),
        rng.random_range(world.y_bounds[0]..=world.y_bounds[1]),
        rng.random_range(0.0..=world.speed_max),
    )
}

/// Uniform-random valid solution: random chromosome and gene counts, random
/// waypoints, then repaired for reachability.
pub fn random_solution<R: Rng + ?Sized>(rng: &mut R, world: &WorldConfig, generation: usize) -> Solution {
    let count = rng.random_range(1..=world.chromosomes_max);
    let chromosomes: Vec<Chromosome> = (0..count)
        .map(|_| {
            let kind = if rng.random_bool(0.25) {
                ParticipantKind::Pedestrian
            } else {
                ParticipantKind::Vehicle
            };
            let len = rng.random_range(2..=world.genes_max.max(2));
            Chromosome::new(kind, (0..len).map(|_| random_gene(rng, world)).collect())
        })
        .collect();
    repaired(&chromosomes, world, Origin::Random, generation)
}

/// Applies one structural change; the result still needs repair.
pub fn structural_mutation<R: Rng + ?Sized>(
    genes: &[Gene],
    op: StructuralOp,
    rng: &mut R,
    world: &WorldConfig,
) -> Vec<Gene> {
    let mut out = genes.to_vec();
    match op {
        StructuralOp::Reverse => {
            let i = rng.random_range(0..out.len() - 1);
            let j = rng.random_range(i + 1..out.len());
            out[i..=j].reverse();
        }
        StructuralOp::Insert => {
            let at = rng.random_range(0..=out.len());
            out.insert(at, random_gene(rng, world));
        }
        StructuralOp::Replace => {
            let at = rng.random_range(0..out.len());
            out[at] = random_gene(rng, world);
        }
    }
    out
}

/// Gaussian nudges on coordinates; speeds are left to repair.
pub fn parameter_mutation<R: Rng + ?Sized>(genes: &[Gene], config: &MutationConfig, rng: &mut R) -> Vec<Gene> {
    let noise = Normal::new(0.0, config.sigma).expect("sigma validated as finite and non-negative");
    genes
        .iter()
        .map(|g| {
            if rng.random_bool(config.gene_probability) {
                let p = g.position() + Point::new(noise.sample(rng), noise.sample(rng));
                Gene::at(p, g.speed)
            } else {
                *g
            }
        })
        .collect()
}

/// Mutates every chromosome of `parent` according to its standing.
pub fn adaptive_mutation<R: Rng + ?Sized>(
    parent: &Solution,
    profile: &RankProfile,
    rng: &mut R,
    config: &MutationConfig,
    world: &WorldConfig,
    generation: usize,
) -> Solution {
    let ops = [StructuralOp::Reverse, StructuralOp::Insert, StructuralOp::Replace];
    let chromosomes: Vec<Chromosome> = parent
        .chromosomes()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let elite = profile
                .chromosomes
                .get(i)
                .is_some_and(|r| r.best() < config.top_fraction);
            let genes = if elite {
                parameter_mutation(c.genes(), config, rng)
            } else {
                let op = *ops.choose(rng).expect("non-empty op table");
                structural_mutation(c.genes(), op, rng, world)
            };
            Chromosome::new(c.kind(), genes)
        })
        .collect();
    repaired(&chromosomes, world, Origin::Mutation, generation)
}
