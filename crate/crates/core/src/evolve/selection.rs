//! Fitness-responsive crossover/mutation probabilities and the
//! population-adaptive variation threshold.

use serde::{Deserialize, Serialize};

use super::EvolveError;
use crate::fitness::FitnessVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveParams {
    /// Crossover gain.
    pub k1: f64,
    /// Mutation gain.
    pub k2: f64,
    /// Crossover probability cap.
    pub k3: f64,
    /// Mutation probability cap.
    pub k4: f64,
    /// Threshold weight on the spread above the mean.
    pub c1: f64,
    /// Threshold weight on the spread below the mean.
    pub m1: f64,
    /// Denominators smaller than this count as converged.
    pub epsilon: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self {
            k1: 0.6,
            k2: 0.6,
            k3: 1.0,
            k4: 1.0,
            c1: 0.5,
            m1: 0.5,
            epsilon: 1e-9,
        }
    }
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("c1", self.c1),
            ("m1", self.m1),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("adaptive.{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(format!("adaptive.epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Max, min and mean of a generation's scalar fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
}

impl FitnessStats {
    pub fn from_scalars(scalars: &[f64]) -> Self {
        assert!(!scalars.is_empty(), "fitness stats need at least one value");
        let max = scalars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = scalars.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = scalars.iter().sum::<f64>() / scalars.len() as f64;
        Self { max, min, mean }
    }
}

/// `c1 * (f_max - mean) + m1 * (mean - f_min)`.
pub fn variation_threshold(scalars: &[f64], params: &AdaptiveParams) -> f64 {
    let s = FitnessStats::from_scalars(scalars);
    threshold_from_stats(&s, params)
}

pub fn threshold_from_stats(s: &FitnessStats, params: &AdaptiveParams) -> f64 {
    params.c1 * (s.max - s.mean) + params.m1 * (s.mean - s.min)
}

/// Pair crossover probability; grows as the fitter parent nears `f_max`.
///
/// When `f_max - mean` falls below epsilon the population has converged and
/// the probability saturates at the cap.
pub fn crossover_probability(f_i: f64, f_j: f64, stats: &FitnessStats, params: &AdaptiveParams) -> f64 {
    let denom = stats.max - stats.mean;
    if denom < params.epsilon {
        return params.k3;
    }
    let best = f_i.max(f_j);
    (params.k1 * (best - stats.min) / denom).clamp(0.0, params.k3)
}

/// Member mutation probability; grows as `f_i` nears `f_min`.
///
/// Saturates at the cap when `mean - f_min` falls below epsilon.
pub fn mutation_probability(f_i: f64, stats: &FitnessStats, params: &AdaptiveParams) -> f64 {
    let denom = stats.mean - stats.min;
    if denom < params.epsilon {
        return params.k4;
    }
    (params.k2 * (stats.max - f_i) / denom).clamp(0.0, params.k4)
}

/// Parents chosen for variation in one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationPlan {
    /// `(i, j, probability)`, probability strictly above the threshold.
    pub crossover_pairs: Vec<(usize, usize, f64)>,
    /// `(i, probability)`, probability at or above the threshold.
    pub mutation_singles: Vec<(usize, f64)>,
    pub threshold: f64,
}

impl VariationPlan {
    pub fn is_empty(&self) -> bool {
        self.crossover_pairs.is_empty() && self.mutation_singles.is_empty()
    }
}

/// Sorts members by scalar fitness (descending, index breaks ties), pairs
/// neighbours `(0,1), (2,3), ...` for crossover, and scores every member for
/// mutation against one shared threshold.
pub fn adaptive_selection(
    fitness: &[FitnessVector],
    params: &AdaptiveParams,
) -> Result<VariationPlan, EvolveError> {
    if fitness.len() < 2 {
        return Err(EvolveError::PopulationTooSmall(fitness.len()));
    }
    let scalars: Vec<f64> = fitness.iter().map(|f| f.scalar).collect();
    let stats = FitnessStats::from_scalars(&scalars);
    let threshold = threshold_from_stats(&stats, params);

    let mut order: Vec<usize> = (0..scalars.len()).collect();
    order.sort_by(|&a, &b| scalars[b].total_cmp(&scalars[a]).then(a.cmp(&b)));

    let crossover_pairs = order
        .chunks_exact(2)
        .filter_map(|pair| {
            let (i, j) = (pair[0], pair[1]);
            let p = crossover_probability(scalars[i], scalars[j], &stats, params);
            (p > threshold).then_some((i, j, p))
        })
        .collect();
    let mutation_singles = (0..scalars.len())
        .filter_map(|i| {
            let p = mutation_probability(scalars[i], &stats, params);
            (p >= threshold).then_some((i, p))
        })
        .collect();
    Ok(VariationPlan {
        crossover_pairs,
        mutation_singles,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(scalar: f64) -> FitnessVector {
        FitnessVector {
            criticality: 0.0,
            diversity: 0.0,
            scalar,
        }
    }

    fn stats(max: f64, min: f64, mean: f64) -> FitnessStats {
        FitnessStats { max, min, mean }
    }

    #[test]
    fn threshold_examples() {
        let half = AdaptiveParams {
            c1: 0.5,
            m1: 0.5,
            ..AdaptiveParams::default()
        };
        assert!((variation_threshold(&[1.0, 0.5, 0.1], &half) - 0.45).abs() < 1e-12);
        assert_eq!(variation_threshold(&[0.3; 5], &half), 0.0);
        let one = AdaptiveParams {
            c1: 1.0,
            m1: 1.0,
            ..AdaptiveParams::default()
        };
        assert_eq!(variation_threshold(&[0.0, 1.0], &one), 1.0);
    }

    #[test]
    fn crossover_examples() {
        let p = AdaptiveParams::default();
        let s = stats(1.0, 0.1, 0.5);
        assert!((crossover_probability(0.9, 0.2, &s, &p) - 0.96).abs() < 1e-12);
        assert_eq!(crossover_probability(0.1, 0.1, &s, &p), 0.0);
        assert_eq!(crossover_probability(0.6, 0.2, &stats(0.6, 0.2, 0.6), &p), p.k3);
    }

    #[test]
    fn mutation_examples() {
        let p = AdaptiveParams::default();
        assert_eq!(mutation_probability(0.2, &stats(1.0, 0.1, 0.5), &p), 1.0);
        assert_eq!(mutation_probability(1.0, &stats(1.0, 0.1, 0.5), &p), 0.0);
        assert!((mutation_probability(0.4, &stats(1.0, 0.0, 0.5), &p) - 0.72).abs() < 1e-12);
    }

    #[test]
    fn selection_on_two_members() {
        let plan = adaptive_selection(&[fv(1.0), fv(0.0)], &AdaptiveParams::default()).unwrap();
        // threshold = 0.5*(1-0.5) + 0.5*(0.5-0); PC = min(0.6*1/0.5, 1) = 1.
        assert_eq!(plan.threshold, 0.5);
        assert_eq!(plan.crossover_pairs, vec![(0, 1, 1.0)]);
        // PM(1.0) = 0 is excluded, PM(0.0) = min(1.2, 1) = 1 is kept.
        assert_eq!(plan.mutation_singles, vec![(1, 1.0)]);
    }

    #[test]
    fn converged_population_varies_everything() {
        let plan = adaptive_selection(&[fv(0.5); 6], &AdaptiveParams::default()).unwrap();
        assert_eq!(plan.threshold, 0.0);
        assert_eq!(plan.crossover_pairs.len(), 3);
        assert_eq!(plan.mutation_singles.len(), 6);
        assert!(plan.crossover_pairs.iter().all(|&(_, _, p)| p == 1.0));
    }

    #[test]
    fn best_member_never_mutates_under_positive_threshold() {
        let fitness = [fv(0.9), fv(0.2), fv(0.5), fv(0.4)];
        let plan = adaptive_selection(&fitness, &AdaptiveParams::default()).unwrap();
        assert!(plan.threshold > 0.0);
        assert!(plan.mutation_singles.iter().all(|&(i, _)| i != 0));
        // Sorted order is 0, 2, 3, 1.
        let pairs: Vec<(usize, usize)> = plan.crossover_pairs.iter().map(|&(i, j, _)| (i, j)).collect();
        assert!(pairs.iter().all(|p| *p == (0, 2) || *p == (3, 1)));
    }

    #[test]
    fn too_small_population_is_rejected() {
        assert_eq!(
            adaptive_selection(&[fv(0.5)], &AdaptiveParams::default()),
            Err(EvolveError::PopulationTooSmall(1))
        );
    }

    #[test]
    fn params_validation() {
        assert!(AdaptiveParams::default().validate().is_ok());
        let bad = AdaptiveParams {
            k3: 1.5,
            ..AdaptiveParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
