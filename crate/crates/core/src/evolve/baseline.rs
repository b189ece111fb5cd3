//! Fixed-threshold NSGA-II style variation used as the comparison baseline.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use super::variation::random_gene;
use super::EvolveError;
use crate::genome::{repair_chromosomes, Chromosome, Origin, Solution};
use crate::sut::WorldConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// A pair crosses iff its uniform draw exceeds this.
    pub crossover_threshold: f64,
    /// A member mutates iff its uniform draw exceeds this.
    pub mutation_threshold: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            crossover_threshold: 0.8,
            mutation_threshold: 0.3,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("crossover_threshold", self.crossover_threshold),
            ("mutation_threshold", self.mutation_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("baseline.{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Swaps each index-paired gene with probability 1/2, over index-paired
/// chromosomes.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &Solution,
    b: &Solution,
    rng: &mut R,
) -> (Vec<Chromosome>, Vec<Chromosome>) {
    let mut left = a.chromosomes().to_vec();
    let mut right = b.chromosomes().to_vec();
    for (ca, cb) in left.iter_mut().zip(right.iter_mut()) {
        let mut ga = ca.genes().to_vec();
        let mut gb = cb.genes().to_vec();
        for (x, y) in ga.iter_mut().zip(gb.iter_mut()) {
            if rng.random_bool(0.5) {
                std::mem::swap(x, y);
            }
        }
        *ca = Chromosome::new(ca.kind(), ga);
        *cb = Chromosome::new(cb.kind(), gb);
    }
    (left, right)
}

/// Redraws the coordinates of one random gene uniformly within bounds.
pub fn value_mutation<R: Rng + ?Sized>(s: &Solution, rng: &mut R, world: &WorldConfig) -> Vec<Chromosome> {
    let mut chromosomes = s.chromosomes().to_vec();
    let ci = rng.random_range(0..chromosomes.len());
    let mut genes = chromosomes[ci].genes().to_vec();
    let gi = rng.random_range(0..genes.len());
    let fresh = random_gene(rng, world);
    genes[gi].x = fresh.x;
    genes[gi].y = fresh.y;
    chromosomes[ci] = Chromosome::new(chromosomes[ci].kind(), genes);
    chromosomes
}

/// Random disjoint pairing, uniform draws against fixed thresholds,
/// uniform crossover and value mutation.
pub fn baseline_variation<R: Rng + ?Sized>(
    population: &[Solution],
    rng: &mut R,
    config: &BaselineConfig,
    world: &WorldConfig,
    generation: usize,
) -> Result<Vec<Solution>, EvolveError> {
    if population.len() < 2 {
        return Err(EvolveError::PopulationTooSmall(population.len()));
    }
    let finish = |chromosomes: Vec<Chromosome>, origin| {
        let fixed = repair_chromosomes(&chromosomes, world)
            .expect("variation keeps chromosomes non-empty and finite");
        Solution::new(fixed, origin, generation)
    };
    let mut offspring = Vec::new();
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.shuffle(rng);
    for pair in order.chunks_exact(2) {
        let draw: f64 = rng.sample(Open01);
        if draw > config.crossover_threshold {
            let (l, r) = uniform_crossover(&population[pair[0]], &population[pair[1]], rng);
            offspring.push(finish(l, Origin::Crossover));
            offspring.push(finish(r, Origin::Crossover));
        }
    }
    for member in population {
        let draw: f64 = rng.sample(Open01);
        if draw > config.mutation_threshold {
            offspring.push(finish(value_mutation(member, rng, world), Origin::Mutation));
        }
    }
    Ok(offspring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{validate, Gene, ParticipantKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn population(n: usize) -> Vec<Solution> {
        (0..n)
            .map(|i| {
                let x = 10.0 + 5.0 * i as f64;
                Solution::new(
                    vec![Chromosome::new(
                        ParticipantKind::Vehicle,
                        vec![Gene::new(x, 20.0, 2.0), Gene::new(x, 25.0, 2.0), Gene::new(x, 30.0, 0.0)],
                    )],
                    Origin::Random,
                    0,
                )
            })
            .collect()
    }

    #[test]
    fn deterministic_per_seed() {
        let world = WorldConfig::default();
        let pop = population(8);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            baseline_variation(&pop, &mut rng, &BaselineConfig::default(), &world, 1).unwrap()
        };
        assert_eq!(run(42), run(42));
        assert!(run(42).iter().all(|s| validate(s, &world).is_valid()));
    }

    #[test]
    fn unreachable_crossover_threshold_disables_crossover() {
        let world = WorldConfig::default();
        let cfg = BaselineConfig {
            crossover_threshold: 1.0,
            mutation_threshold: 1.0,
        };
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = baseline_variation(&population(10), &mut rng, &cfg, &world, 1).unwrap();
            assert!(out.is_empty());
        }
    }

    #[test]
    fn zero_mutation_threshold_mutates_everyone() {
        let world = WorldConfig::default();
        let cfg = BaselineConfig {
            crossover_threshold: 1.0,
            mutation_threshold: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let out = baseline_variation(&population(10), &mut rng, &cfg, &world, 1).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|s| s.origin() == Origin::Mutation));
    }

    #[test]
    fn uniform_crossover_conserves_genes_per_index() {
        let pop = population(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (l, r) = uniform_crossover(&pop[0], &pop[1], &mut rng);
        for k in 0..3 {
            let mut got = [l[0].genes()[k].x, r[0].genes()[k].x];
            got.sort_by(f64::total_cmp);
            assert_eq!(got, [10.0, 15.0]);
        }
    }

    #[test]
    fn too_small_population_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = baseline_variation(&population(1), &mut rng, &BaselineConfig::default(), &WorldConfig::default(), 0);
        assert_eq!(err, Err(EvolveError::PopulationTooSmall(1)));
    }
}
