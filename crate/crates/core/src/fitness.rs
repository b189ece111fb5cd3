//! Objectives and Pareto machinery.
//!
//! Two objectives drive the search: criticality (minimum violation distance
//! over a replay, lower is better) and diversity (mean trajectory distance to
//! previously executed scenarios, higher is better).

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{Chromosome, Solution, SolutionId};
use crate::sut::ExecutionTrace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitnessError {
    #[error("execution trace has no ticks")]
    EmptyTrace,
}

/// Raw objective pair for one solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub criticality: f64,
    pub diversity: f64,
}

impl Objectives {
    pub const fn new(criticality: f64, diversity: f64) -> Self {
        Self { criticality, diversity }
    }

    /// Pareto dominance: no worse on both, strictly better on one.
    pub fn dominates(&self, other: &Objectives) -> bool {
        self.criticality <= other.criticality
            && self.diversity >= other.diversity
            && (self.criticality < other.criticality || self.diversity > other.diversity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    pub criticality: f64,
    pub diversity: f64,
    /// Scalarized fitness in `[0, 1]`, higher is better.
    pub scalar: f64,
}

impl FitnessVector {
    pub fn objectives(&self) -> Objectives {
        Objectives::new(self.criticality, self.diversity)
    }
}

/// Builds fitness vectors for a whole generation (scalars are relative).
pub fn fitness_vectors(objectives: &[Objectives]) -> Vec<FitnessVector> {
    scalar_fitness(objectives)
        .into_iter()
        .zip(objectives)
        .map(|(scalar, o)| FitnessVector {
            criticality: o.criticality,
            diversity: o.diversity,
            scalar,
        })
        .collect()
}

/// Minimum violation distance over all ticks.
pub fn criticality(trace: &ExecutionTrace) -> Result<f64, FitnessError> {
    if trace.sv.is_empty() {
        return Err(FitnessError::EmptyTrace);
    }
    Ok(trace.sv.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Sum of per-waypoint distances over the shared prefix of two trajectories.
pub fn trajectory_distance(a: &Chromosome, b: &Chromosome) -> f64 {
    a.genes()
        .iter()
        .zip(b.genes())
        .map(|(ga, gb)| ga.position().distance(gb.position()))
        .sum()
}

/// Mean trajectory distance over every chromosome pair of the two solutions.
///
/// Identical solutions are at distance 0; the pair mean alone would count
/// the cross terms of a multi-participant solution against itself. Pairs are
/// summed in id order so the result is bitwise symmetric.
pub fn solution_distance(a: &Solution, b: &Solution) -> f64 {
    let (a, b) = if a.id() <= b.id() { (a, b) } else { (b, a) };
    let (ca, cb) = (a.chromosomes(), b.chromosomes());
    if ca.is_empty() || cb.is_empty() || ca == cb {
        return 0.0;
    }
    let total: f64 = ca
        .iter()
        .flat_map(|x| cb.iter().map(move |y| trajectory_distance(x, y)))
        .sum();
    total / (ca.len() * cb.len()) as f64
}

/// Bounded FIFO window of executed solutions, unique by id.
#[derive(Debug, Clone)]
pub struct Archive {
    capacity: usize,
    entries: VecDeque<Arc<Solution>>,
    ids: HashSet<SolutionId>,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "archive capacity must be positive");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
            ids: HashSet::with_capacity(capacity),
        }
    }

    /// Appends `solution` unless already present, evicting the oldest entry
    /// when full. Returns whether it was inserted.
    pub fn push(&mut self, solution: Arc<Solution>) -> bool {
        if !self.ids.insert(solution.id()) {
            return false;
        }
        if self.entries.len() == self.capacity {
            if let Some(old) = self.entries.pop_front() {
                self.ids.remove(&old.id());
            }
        }
        self.entries.push_back(solution);
        true
    }

    pub fn contains(&self, id: SolutionId) -> bool {
        self.ids.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Solution> {
        self.entries.iter().map(|s| s.as_ref())
    }
}

/// Mean solution distance from `s` to every archive entry other than itself,
/// or `default` when nothing else is archived.
pub fn diversity(s: &Solution, archive: &Archive, default: f64) -> f64 {
    let (sum, n) = archive
        .iter()
        .filter(|other| other.id() != s.id())
        .fold((0.0, 0usize), |(sum, n), other| {
            (sum + solution_distance(s, other), n + 1)
        });
    if n == 0 {
        default
    } else {
        sum / n as f64
    }
}

/// Fast non-dominated sorting. Fronts list indices in ascending order.
pub fn nondominated_sort(objectives: &[Objectives]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if objectives[i].dominates(&objectives[j]) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if objectives[j].dominates(&objectives[i]) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of a single front.
pub fn crowding_distance(front: &[Objectives]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let getters: [fn(&Objectives) -> f64; 2] = [|o| o.criticality, |o| o.diversity];
    for get in getters {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| get(&front[a]).total_cmp(&get(&front[b])));
        let lo = get(&front[order[0]]);
        let hi = get(&front[order[n - 1]]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            let gap = get(&front[order[w + 1]]) - get(&front[order[w - 1]]);
            distance[i] += gap / range;
        }
    }
    distance
}

/// Fronts plus per-index crowding distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRanking {
    pub fronts: Vec<Vec<usize>>,
    pub crowding: Vec<f64>,
}

impl ParetoRanking {
    pub fn compute(objectives: &[Objectives]) -> Self {
        let fronts = nondominated_sort(objectives);
        let mut crowding = vec![0.0; objectives.len()];
        for front in &fronts {
            let members: Vec<Objectives> = front.iter().map(|&i| objectives[i]).collect();
            for (&i, d) in front.iter().zip(crowding_distance(&members)) {
                crowding[i] = d;
            }
        }
        Self { fronts, crowding }
    }
}

fn normalize(values: impl Iterator<Item = f64> + Clone) -> Vec<f64> {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    values
        .map(|v| if range > 0.0 { (v - lo) / range } else { 0.5 })
        .collect()
}

/// Equal-weight scalarization over min-max normalized objectives.
/// A zero-range objective normalizes to 0.5 for every member.
pub fn scalar_fitness(objectives: &[Objectives]) -> Vec<f64> {
    let crit = normalize(objectives.iter().map(|o| o.criticality));
    let div = normalize(objectives.iter().map(|o| o.diversity));
    crit.iter()
        .zip(&div)
        .map(|(c, d)| (0.5 * (1.0 - c) + 0.5 * d).clamp(0.0, 1.0))
        .collect()
}
