//! The search loop.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::log::{Event, LogWriter, RunLog, SeedingPhase, SeedingStep, StopReason};
use super::metrics::{compute_metrics, MetricsError, RunMetrics};
use crate::evolve::{
    adaptive_crossover, adaptive_mutation, adaptive_selection, baseline_variation, chromosome_diversity,
    random_solution, rank_profiles, structural_mutation, survivor_selection, ChromosomeScores, EvolveError,
    FitnessStats, StructuralOp,
};
use crate::fitness::{diversity, fitness_vectors, Archive, FitnessVector, Objectives};
use crate::genome::{repair_chromosomes, Chromosome, Origin, Solution, SolutionId};
use crate::rng::{purpose, stream};
use crate::seeding::{
    default_threshold, PromptError, differential_seed_round, provider_generate, MockProvider, PromptBuilder, Provider,
    ProviderKind, RemoteProvider, RetryPolicy, SeedingContext, SeedingError, StagnationState,
};
use crate::sut::{detect_violation, execute, Violation, ViolationRecord, WorldConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("provider failure: {0}")]
    Provider(#[from] SeedingError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("variation failure: {0}")]
    Evolve(#[from] EvolveError),
    #[error("log write failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Provider named by the config: the offline mock keyed by the master seed,
/// or the HTTP client configured from the environment.
pub fn provider_for(config: &RunConfig) -> Result<Box<dyn Provider>, RunError> {
    match config.seeding.provider.kind {
        ProviderKind::Mock => Ok(Box::new(MockProvider::new(config.master_seed))),
        ProviderKind::Remote => RemoteProvider::from_env(config.seeding.provider.clone())
            .map(|p| Box::new(p) as Box<dyn Provider>)
            .map_err(|e| RunError::Provider(SeedingError::Provider(e))),
    }
}

/// Runs with the configured provider and keeps the log in memory.
pub fn run(config: &RunConfig) -> Result<(RunMetrics, RunLog), RunError> {
    let provider = provider_for(config)?;
    run_with(config, provider.as_ref(), None)
}

/// Runs with an explicit provider, streaming each event to `sink` as it
/// happens so a failed run still leaves its log behind.
pub fn run_with<'a>(
    config: &'a RunConfig,
    provider: &'a dyn Provider,
    sink: Option<&'a mut (dyn Write + Send)>,
) -> Result<(RunMetrics, RunLog), RunError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count())
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let mut engine = Engine::new(config, provider, LogWriter::new(sink));
    let outcome = pool.install(|| engine.run());
    engine.log.flush()?;
    outcome?;
    let log = engine.log.into_log();
    let metrics = compute_metrics(&log)?;
    Ok((metrics, log))
}

/// Everything known about an evaluated solution.
#[derive(Debug, Clone)]
struct Evaluated {
    solution: Arc<Solution>,
    criticality: f64,
    /// Closest approach of each participant, minus the safety radius.
    chromosome_criticality: Vec<f64>,
    violation: Option<Violation>,
}

fn evaluate(solution: &Solution, world: &WorldConfig) -> Evaluated {
    let trace = execute(solution, world);
    let chromosome_criticality = trace
        .npcs
        .iter()
        .map(|track| {
            track
                .iter()
                .zip(&trace.ego)
                .map(|(p, e)| p.distance(*e) - world.safety_radius)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let criticality = trace.sv.iter().copied().fold(f64::INFINITY, f64::min);
    Evaluated {
        solution: Arc::new(solution.clone()),
        criticality,
        chromosome_criticality,
        violation: detect_violation(&trace, world),
    }
}

struct Engine<'a> {
    config: &'a RunConfig,
    world: &'a WorldConfig,
    provider: &'a dyn Provider,
    builder: PromptBuilder,
    retry: RetryPolicy,
    log: LogWriter<'a>,
    archive: Archive,
    evaluated: HashMap<SolutionId, Evaluated>,
    evaluations: usize,
    generation: usize,
    started: Instant,
}

impl<'a> Engine<'a> {
    fn new(config: &'a RunConfig, provider: &'a dyn Provider, log: LogWriter<'a>) -> Self {
        let p = &config.seeding.provider;
        Self {
            config,
            world: &config.world,
            provider,
            builder: PromptBuilder::new(&config.world, config.seeding.objectives_text.clone())
                .with_limits(p.char_limit, p.batch_limit),
            retry: RetryPolicy {
                max_retries: p.max_retries,
                backoff: Duration::from_millis(p.backoff_ms),
            },
            log,
            archive: Archive::new(config.archive_capacity),
            evaluated: HashMap::new(),
            evaluations: 0,
            generation: 0,
            started: Instant::now(),
        }
    }

    fn remaining(&self) -> usize {
        self.config.budget.max_evaluations - self.evaluations
    }

    fn past_deadline(&self) -> bool {
        self.config
            .budget
            .deadline_secs
            .is_some_and(|d| self.started.elapsed().as_secs_f64() >= d)
    }

    fn elapsed_ms(&self) -> Option<u64> {
        self.config
            .record_wall_clock
            .then(|| self.started.elapsed().as_millis() as u64)
    }

    fn rng(&self, purpose: u64) -> ChaCha8Rng {
        stream(self.config.master_seed, &[purpose, self.generation as u64])
    }

    fn run(&mut self) -> Result<(), RunError> {
        let config = self.config;
        self.log.append(Event::Config {
            config: Box::new(config.clone()),
            config_digest: config.config_digest(),
            world_digest: config.world_digest(),
        })?;

        let initial = self.initial_population()?;
        let mut population = self.evaluate_batch(initial)?;
        let mut stagnation = StagnationState::new(config.seeding.stagnation_t, config.stagnation_k());
        self.log_generation(&population, 0, 0)?;

        let reason = loop {
            if self.remaining() == 0 {
                break StopReason::Budget;
            }
            if self.past_deadline() {
                break StopReason::Deadline;
            }
            self.generation += 1;
            let (offspring, pairs, mutations) = self.variation(&population)?;
            let offspring = self.fresh_or_top_up(offspring, &population)?;
            let offspring = self.evaluate_batch(offspring)?;

            let pool: Vec<SolutionId> = population.iter().chain(&offspring).copied().collect();
            let objectives = self.objectives(&pool);
            let keep = survivor_selection(&objectives, &pool, config.population_size);
            population = keep.iter().map(|&i| pool[i]).collect();

            let top_k = self.top_k(stagnation.k());
            if stagnation.observe(top_k.iter().copied().collect()) {
                self.log.append(Event::Stagnation {
                    generation: self.generation,
                    top_k: top_k.clone(),
                })?;
                if config.variant.differential_seeds() && self.remaining() > 0 {
                    population = self.differential_round(population)?;
                }
            }
            self.log_generation(&population, pairs, mutations)?;
        };
        self.log.append(Event::Finished {
            evaluations: self.evaluations,
            generations: self.generation + 1,
            reason,
        })?;
        Ok(())
    }

    fn initial_population(&mut self) -> Result<Vec<Solution>, RunError> {
        let n = self.config.population_size;
        let mut rng = self.rng(purpose::INIT);
        if !self.config.variant.provider_init() {
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let s = random_solution(&mut rng, self.world, 0);
                if seen.insert(s.id()) {
                    out.push(s);
                }
            }
            return Ok(out);
        }

        let limit = self.builder.batch_limit();
        let mut seeds: Vec<Solution> = Vec::new();
        let mut steps = Vec::new();
        let mut seen = HashSet::new();
        while seeds.len() < n && steps.len() < n.div_ceil(limit) {
            let want = (n - seeds.len()).min(limit);
            // Later chunks show the earlier seeds so that each prompt differs.
            let examples: Vec<&Solution> = seeds.iter().collect();
            let prompt = self.builder.initial_fitting(&examples, want)?;
            let batch = provider_generate(&prompt, self.provider, self.world, &self.retry, Origin::SeedInitial, 0, 1)?;
            let mut accepted = Vec::new();
            for s in &batch.solutions {
                if seeds.len() < n && seen.insert(s.id()) {
                    accepted.push(s.id());
                    seeds.push(s.clone());
                }
            }
            let rejected = batch.solutions.iter().map(Solution::id).filter(|id| !accepted.contains(id)).collect();
            steps.push(SeedingStep {
                kind: prompt.kind,
                prompt_digest: prompt.digest(),
                requested: want,
                provider_name: batch.provider_name.clone(),
                attempt: batch.attempt,
                raw_response_digest: batch.raw_response_digest.clone(),
                raw_response: batch.raw_response.clone(),
                parsed_count: batch.parsed_count,
                returned: batch.solutions.len(),
                accepted,
                rejected,
                threshold: None,
            });
        }
        self.log.append(Event::Seeding {
            generation: 0,
            phase: SeedingPhase::Initial,
            requested: n,
            accepted: seeds.iter().map(Solution::id).collect(),
            shortfall: seeds.len() < n,
            steps,
        })?;
        // Short provider batches are topped up with mutated copies.
        let mut tries = 0;
        while seeds.len() < n {
            let s = if seeds.is_empty() || tries > 50 * n {
                random_solution(&mut rng, self.world, 0)
            } else {
                let parent = seeds.choose(&mut rng).expect("non-empty");
                self.structural_variant(parent, &mut rng)
            };
            tries += 1;
            if seen.insert(s.id()) {
                seeds.push(s);
            }
        }
        Ok(seeds)
    }

    fn structural_variant(&self, parent: &Solution, rng: &mut ChaCha8Rng) -> Solution {
        let ops = [StructuralOp::Reverse, StructuralOp::Insert, StructuralOp::Replace];
        let ci = rng.random_range(0..parent.chromosomes().len());
        let c = &parent.chromosomes()[ci];
        let op = *ops.choose(rng).expect("non-empty");
        let genes = structural_mutation(c.genes(), op, rng, self.world);
        let mut chromosomes = parent.chromosomes().to_vec();
        chromosomes[ci] = Chromosome::new(c.kind(), genes);
        let fixed = repair_chromosomes(&chromosomes, self.world).expect("mutation keeps chromosomes well-formed");
        Solution::new(fixed, Origin::Mutation, self.generation)
    }

    /// Executes new solutions (in parallel), archives them and logs each
    /// evaluation in order. Solutions beyond the remaining budget are dropped.
    fn evaluate_batch(&mut self, batch: Vec<Solution>) -> Result<Vec<SolutionId>, RunError> {
        let mut batch = batch;
        batch.truncate(self.remaining());
        let world = self.world;
        let results: Vec<Evaluated> = batch.par_iter().map(|s| evaluate(s, world)).collect();
        for e in &results {
            self.archive.push(Arc::clone(&e.solution));
        }
        let mut ids = Vec::with_capacity(results.len());
        for e in results {
            self.evaluations += 1;
            let id = e.solution.id();
            let div = diversity(&e.solution, &self.archive, 0.0);
            self.log.append(Event::Evaluation {
                generation: self.generation,
                seq: self.evaluations,
                solution_id: id,
                origin: e.solution.origin(),
                criticality: e.criticality,
                diversity: div,
                violated: e.violation.is_some(),
            })?;
            if let Some(violation) = e.violation {
                self.log.append(Event::Violation {
                    seq: self.evaluations,
                    record: ViolationRecord {
                        solution_id: id,
                        violation,
                        generation: self.generation,
                        wall_clock_ms: self.elapsed_ms(),
                    },
                    solution: e.solution.to_canonical_json(),
                })?;
            }
            ids.push(id);
            self.evaluated.insert(id, e);
        }
        Ok(ids)
    }

    fn entry(&self, id: SolutionId) -> &Evaluated {
        &self.evaluated[&id]
    }

    fn objectives(&self, ids: &[SolutionId]) -> Vec<Objectives> {
        let (evaluated, archive) = (&self.evaluated, &self.archive);
        ids.par_iter()
            .map(|id| {
                let e = &evaluated[id];
                Objectives::new(e.criticality, diversity(&e.solution, archive, 0.0))
            })
            .collect()
    }

    fn fitness(&self, ids: &[SolutionId]) -> Vec<FitnessVector> {
        fitness_vectors(&self.objectives(ids))
    }

    /// The `k` most critical solutions evaluated so far, ties by id.
    fn top_k(&self, k: usize) -> Vec<SolutionId> {
        let mut all: Vec<(f64, SolutionId)> = self.evaluated.iter().map(|(id, e)| (e.criticality, *id)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let set: BTreeSet<SolutionId> = all.iter().take(k).map(|&(_, id)| id).collect();
        set.into_iter().collect()
    }

    fn variation(&self, population: &[SolutionId]) -> Result<(Vec<Solution>, usize, usize), RunError> {
        let members: Vec<Solution> = population.iter().map(|id| (*self.entry(*id).solution).clone()).collect();
        if !self.config.variant.adaptive() {
            let mut rng = self.rng(purpose::BASELINE);
            let out = baseline_variation(&members, &mut rng, &self.config.baseline, self.world, self.generation)?;
            let crosses = out.iter().filter(|s| s.origin() == Origin::Crossover).count() / 2;
            let mutations = out.len() - 2 * crosses;
            return Ok((out, crosses, mutations));
        }

        let objectives = self.objectives(population);
        let fitness = fitness_vectors(&objectives);
        let plan = adaptive_selection(&fitness, &self.config.adaptive)?;
        let (evaluated, archive) = (&self.evaluated, &self.archive);
        let scores: Vec<ChromosomeScores> = population
            .par_iter()
            .zip(&objectives)
            .map(|(id, o)| {
                let e = &evaluated[id];
                ChromosomeScores {
                    solution: *o,
                    chromosomes: e
                        .solution
                        .chromosomes()
                        .iter()
                        .zip(&e.chromosome_criticality)
                        .map(|(c, &crit)| Objectives::new(crit, chromosome_diversity(&e.solution, c, archive)))
                        .collect(),
                }
            })
            .collect();
        let profiles = rank_profiles(&scores);

        let mut out = Vec::new();
        let mut rng = self.rng(purpose::CROSSOVER);
        for &(i, j, _) in &plan.crossover_pairs {
            let (a, b) = adaptive_crossover(&members[i], &profiles[i], &members[j], &mut rng, self.world, self.generation)?;
            out.push(a);
            out.push(b);
        }
        let mut rng = self.rng(purpose::MUTATION);
        for &(i, _) in &plan.mutation_singles {
            out.push(adaptive_mutation(
                &members[i],
                &profiles[i],
                &mut rng,
                &self.config.mutation,
                self.world,
                self.generation,
            ));
        }
        Ok((out, plan.crossover_pairs.len(), plan.mutation_singles.len()))
    }

    /// Drops offspring already evaluated (or repeated); if nothing new is
    /// left, falls back to structural variants of random members.
    fn fresh_or_top_up(&self, offspring: Vec<Solution>, population: &[SolutionId]) -> Result<Vec<Solution>, RunError> {
        let mut seen: HashSet<SolutionId> = HashSet::new();
        let mut fresh: Vec<Solution> = offspring
            .into_iter()
            .filter(|s| !self.evaluated.contains_key(&s.id()) && seen.insert(s.id()))
            .collect();
        if fresh.is_empty() {
            let mut rng = self.rng(purpose::TOP_UP);
            for _ in 0..50 * self.config.population_size {
                let parent = &self.entry(*population.choose(&mut rng).expect("non-empty population")).solution;
                let s = self.structural_variant(parent, &mut rng);
                if !self.evaluated.contains_key(&s.id()) && seen.insert(s.id()) {
                    fresh.push(s);
                    break;
                }
            }
            if fresh.is_empty() {
                fresh.push(random_solution(&mut rng, self.world, self.generation));
            }
        }
        Ok(fresh)
    }

    fn differential_round(&mut self, population: Vec<SolutionId>) -> Result<Vec<SolutionId>, RunError> {
        let cfg = &self.config.seeding;

        // SE: the first solution of each violation type, newest types last.
        let mut firsts: Vec<(usize, SolutionId)> = Vec::new();
        let mut types = HashSet::new();
        for event in &self.log.log().events {
            if let Event::Violation { seq, record, .. } = event {
                if types.insert(record.violation_type()) {
                    firsts.push((*seq, record.solution_id));
                }
            }
        }
        let mut se_ids: Vec<SolutionId> = firsts.iter().rev().take(cfg.se_limit).map(|(_, id)| *id).collect();
        se_ids.reverse();
        if se_ids.is_empty() {
            // Nothing violated yet: the most critical members stand in.
            let mut by_crit = population.clone();
            by_crit.sort_by(|a, b| {
                self.entry(*a)
                    .criticality
                    .total_cmp(&self.entry(*b).criticality)
                    .then(a.cmp(b))
            });
            se_ids = by_crit.into_iter().take(cfg.se_limit.min(self.config.stagnation_k())).collect();
        }
        // SN: the weakest non-violating members.
        let fitness = self.fitness(&population);
        let mut weakest: Vec<usize> = (0..population.len()).collect();
        weakest.sort_by(|&a, &b| fitness[a].scalar.total_cmp(&fitness[b].scalar).then(population[a].cmp(&population[b])));
        let se_set: HashSet<SolutionId> = se_ids.iter().copied().collect();
        let sn_ids: Vec<SolutionId> = weakest
            .iter()
            .map(|&i| population[i])
            .filter(|id| self.entry(*id).violation.is_none() && !se_set.contains(id))
            .take(cfg.sn_limit)
            .collect();

        let se: Vec<Solution> = se_ids.iter().map(|id| (*self.entry(*id).solution).clone()).collect();
        let sn: Vec<Solution> = sn_ids.iter().map(|id| (*self.entry(*id).solution).clone()).collect();
        let se_refs: Vec<&Solution> = se.iter().collect();
        let sn_refs: Vec<&Solution> = sn.iter().collect();
        let reference: Vec<&Solution> = se_refs.iter().chain(&sn_refs).copied().collect();
        let threshold = cfg
            .threshold
            .unwrap_or_else(|| default_threshold(&reference, cfg.fallback_threshold));
        let n = self.config.seeds_per_round().min(self.remaining()).min(self.config.population_size);

        let ctx = SeedingContext {
            builder: &self.builder,
            provider: self.provider,
            world: self.world,
            retry: self.retry,
            max_attempts: cfg.max_regeneration_attempts,
            generation: self.generation,
        };
        let outcome = differential_seed_round(&se_refs, &sn_refs, n, &ctx, threshold)?;
        let seeds: Vec<Solution> = outcome
            .accepted
            .into_iter()
            .filter(|s| !self.evaluated.contains_key(&s.id()))
            .collect();
        self.log.append(Event::Seeding {
            generation: self.generation,
            phase: SeedingPhase::Differential,
            requested: n,
            accepted: seeds.iter().map(Solution::id).collect(),
            shortfall: outcome.shortfall,
            steps: outcome.steps.iter().map(SeedingStep::from).collect(),
        })?;
        let seed_ids = self.evaluate_batch(seeds)?;
        if seed_ids.is_empty() {
            return Ok(population);
        }

        // Seeds replace the lowest-scalar survivors.
        let doomed: HashSet<SolutionId> = weakest.iter().take(seed_ids.len()).map(|&i| population[i]).collect();
        let mut next: Vec<SolutionId> = population.into_iter().filter(|id| !doomed.contains(id)).collect();
        next.extend(seed_ids);
        Ok(next)
    }

    fn log_generation(&mut self, population: &[SolutionId], pairs: usize, mutations: usize) -> Result<(), RunError> {
        let objectives = self.objectives(population);
        let fitness = fitness_vectors(&objectives);
        let scalars: Vec<f64> = fitness.iter().map(|f| f.scalar).collect();
        let best_criticality = objectives.iter().map(|o| o.criticality).fold(f64::INFINITY, f64::min);
        let mean_diversity = objectives.iter().map(|o| o.diversity).sum::<f64>() / objectives.len() as f64;
        self.log.append(Event::Generation {
            generation: self.generation,
            evaluations: self.evaluations,
            population: population.to_vec(),
            fitness: FitnessStats::from_scalars(&scalars),
            best_criticality,
            mean_diversity,
            crossover_pairs: pairs,
            mutations,
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Variant;
    use crate::seeding::{PromptSpec, ProviderError};

    fn small(variant: Variant, budget: usize) -> RunConfig {
        let mut c = RunConfig {
            variant,
            population_size: 8,
            master_seed: 7,
            workers: Some(2),
            ..RunConfig::default()
        };
        c.budget.max_evaluations = budget;
        c
    }

    #[test]
    fn budget_of_one_population_runs_one_generation() {
        let (m, log) = run(&small(Variant::Full, 8)).unwrap();
        assert_eq!(m.solutions_generated, 8);
        assert_eq!(m.generations.len(), 1);
        assert!(matches!(
            log.events.last(),
            Some(Event::Finished {
                evaluations: 8,
                generations: 1,
                reason: StopReason::Budget
            })
        ));
    }

    #[test]
    fn population_stays_at_n_for_every_variant() {
        for variant in Variant::ALL {
            let (m, log) = run(&small(variant, 300)).unwrap();
            assert_eq!(m.solutions_generated, 300, "{variant}");
            for e in &log.events {
                if let Event::Generation { population, .. } = e {
                    assert_eq!(population.len(), 8, "{variant}");
                    let unique: HashSet<_> = population.iter().collect();
                    assert_eq!(unique.len(), 8, "{variant}");
                }
            }
        }
    }

    #[test]
    fn no_seeds_never_requests_differential_seeds() {
        let (m, log) = run(&small(Variant::NoSeeds, 600)).unwrap();
        assert!(m.stagnation_events > 0);
        assert_eq!(m.differential_seeds, 0);
        assert!(!log.events.iter().any(|e| matches!(
            e,
            Event::Seeding {
                phase: SeedingPhase::Differential,
                ..
            }
        )));
    }

    #[test]
    fn full_runs_inject_differential_seeds() {
        let (m, _) = run(&small(Variant::Full, 600)).unwrap();
        assert!(m.stagnation_events > 0);
        assert!(m.differential_seeds > 0);
    }

    #[test]
    fn same_seed_gives_byte_identical_logs() {
        let c = small(Variant::Full, 200);
        let mut a: Vec<u8> = Vec::new();
        let mut b: Vec<u8> = Vec::new();
        let provider = MockProvider::new(c.master_seed);
        let (_, log_a) = run_with(&c, &provider, Some(&mut a)).unwrap();
        run_with(&c, &provider, Some(&mut b)).unwrap();
        assert_eq!(a, b);
        assert_eq!(String::from_utf8(a).unwrap(), log_a.to_jsonl());
    }

    #[test]
    fn replayed_log_gives_the_same_metrics() {
        let (m, log) = run(&small(Variant::RandomInit, 300)).unwrap();
        let replayed = RunLog::from_jsonl(&log.to_jsonl()).unwrap();
        assert_eq!(compute_metrics(&replayed).unwrap(), m);
    }

    struct Failing;

    impl Provider for Failing {
        fn name(&self) -> &str {
            "failing"
        }

        fn generate(&self, _: &PromptSpec) -> Result<String, ProviderError> {
            Err(ProviderError::Transport("connection refused".into()))
        }
    }

    #[test]
    fn provider_failure_leaves_the_log_behind() {
        let c = small(Variant::Full, 100);
        let mut sink: Vec<u8> = Vec::new();
        let err = run_with(&c, &Failing, Some(&mut sink)).unwrap_err();
        assert!(matches!(err, RunError::Provider(_)));
        let log = RunLog::from_jsonl(std::str::from_utf8(&sink).unwrap()).unwrap();
        assert!(matches!(log.events[0], Event::Config { .. }));
    }

    #[test]
    fn random_variants_do_not_need_a_provider() {
        let c = small(Variant::Baseline, 50);
        let (m, _) = run_with(&c, &Failing, None).unwrap();
        assert_eq!(m.solutions_generated, 50);
    }
}
