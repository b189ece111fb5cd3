use std::collections::BTreeSet;

use moea_core::evolve::{
    crossover_probability, mutation_probability, random_solution, survivor_selection, variation_threshold,
    AdaptiveParams, FitnessStats,
};
use moea_core::fitness::{criticality, nondominated_sort, solution_distance, Objectives};
use moea_core::genome::{
    repair_chromosomes, validate_chromosomes, Chromosome, Gene, Origin, ParticipantKind, Solution, SolutionDraft,
    SolutionId,
};
use moea_core::rng::stream;
use moea_core::seeding::{differential_filter, mean_reference_distance, StagnationState};
use moea_core::sut::{detect_violation, execute, WorldConfig};
use proptest::prelude::*;

fn world() -> WorldConfig {
    WorldConfig::default()
}

fn solution_from(seed: u64) -> Solution {
    random_solution(&mut stream(seed, &[99]), &world(), 0)
}

fn raw_gene() -> impl Strategy<Value = Gene> {
    (-50.0..350.0f64, -50.0..350.0f64, -1.0..6.0f64).prop_map(|(x, y, s)| Gene::new(x, y, s))
}

fn raw_chromosomes() -> impl Strategy<Value = Vec<Chromosome>> {
    prop::collection::vec(
        (any::<bool>(), prop::collection::vec(raw_gene(), 1..16)).prop_map(|(ped, genes)| {
            let kind = if ped { ParticipantKind::Pedestrian } else { ParticipantKind::Vehicle };
            Chromosome::new(kind, genes)
        }),
        1..5,
    )
}

fn objectives(max: usize) -> impl Strategy<Value = Vec<Objectives>> {
    // A coarse grid makes ties and duplicates common.
    prop::collection::vec((0..6u8, 0..6u8), 1..=max)
        .prop_map(|v| v.into_iter().map(|(c, d)| Objectives::new(f64::from(c), f64::from(d))).collect())
}

fn stats() -> impl Strategy<Value = FitnessStats> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b, t)| {
        let (min, max) = if a <= b { (a, b) } else { (b, a) };
        FitnessStats {
            max,
            min,
            mean: min + t * (max - min),
        }
    })
}

fn params() -> impl Strategy<Value = AdaptiveParams> {
    (0.01..=1.0f64, 0.01..=1.0f64, 0.01..=1.0f64, 0.01..=1.0f64).prop_map(|(k1, k2, k3, k4)| AdaptiveParams {
        k1,
        k2,
        k3,
        k4,
        ..AdaptiveParams::default()
    })
}

fn brute_fronts(objs: &[Objectives]) -> Vec<BTreeSet<usize>> {
    let mut left: BTreeSet<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: BTreeSet<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| objs[j].dominates(&objs[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn stagnation_oracle(sets: &[u8], t: usize) -> Vec<bool> {
    let mut start = 0;
    let mut out = Vec::new();
    for i in 0..sets.len() {
        let run = &sets[start..=i];
        let fired = run.len() >= t && run[run.len() - t..].iter().all(|s| *s == sets[i]);
        out.push(fired);
        if fired {
            start = i + 1;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn repair_yields_valid_fixed_points(raw in raw_chromosomes()) {
        let w = world();
        let once = repair_chromosomes(&raw, &w).unwrap();
        prop_assert!(validate_chromosomes(&once, &w).is_valid());
        let twice = repair_chromosomes(&once, &w).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn ids_follow_canonical_content(a in any::<u64>(), b in any::<u64>()) {
        let (sa, sb) = (solution_from(a), solution_from(b));
        prop_assert_eq!(sa.id(), sa.relabel(Origin::Crossover, 9).id());
        let back = serde_json::from_str::<SolutionDraft>(&sa.to_canonical_json())
            .unwrap()
            .into_solution(Origin::SeedInitial, 0);
        prop_assert_eq!(back.id(), sa.id());
        prop_assert_eq!(sa.id() == sb.id(), sa.to_canonical_json() == sb.to_canonical_json());
    }

    #[test]
    fn fronts_match_brute_force(objs in objectives(20)) {
        let fronts: Vec<BTreeSet<usize>> = nondominated_sort(&objs)
            .into_iter()
            .map(|f| f.into_iter().collect())
            .collect();
        prop_assert_eq!(fronts, brute_fronts(&objs));
    }

    #[test]
    fn survivors_are_elitist(objs in objectives(40), cut in 0.0..=1.0f64) {
        let n = ((objs.len() as f64 * cut).round() as usize).max(1);
        let ids: Vec<SolutionId> = (0..objs.len() as u64).map(SolutionId).collect();
        let chosen = survivor_selection(&objs, &ids, n);
        prop_assert_eq!(chosen.len(), n);
        let set: BTreeSet<usize> = chosen.iter().copied().collect();
        prop_assert_eq!(set.len(), n);
        for &s in &set {
            for u in (0..objs.len()).filter(|u| !set.contains(u)) {
                prop_assert!(!objs[u].dominates(&objs[s]), "{s} kept although {u} dominates it");
            }
        }
    }

    #[test]
    fn probabilities_stay_within_caps(s in stats(), p in params(), f in 0.0..=1.0f64, g in 0.0..=1.0f64) {
        let pc = crossover_probability(f, g, &s, &p);
        let pm = mutation_probability(f, &s, &p);
        prop_assert!((0.0..=p.k3).contains(&pc));
        prop_assert!((0.0..=p.k4).contains(&pm));
    }

    #[test]
    fn probabilities_are_monotone(s in stats(), p in params(), a in 0.0..=1.0f64, b in 0.0..=1.0f64, other in 0.0..=1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(crossover_probability(lo, other, &s, &p) <= crossover_probability(hi, other, &s, &p));
        prop_assert!(mutation_probability(lo, &s, &p) >= mutation_probability(hi, &s, &p));
    }

    #[test]
    fn threshold_is_zero_only_for_equal_scalars(scalars in prop::collection::vec(0.0..=1.0f64, 1..20)) {
        let t = variation_threshold(&scalars, &AdaptiveParams::default());
        let all_equal = scalars.iter().all(|s| *s == scalars[0]);
        prop_assert!(t >= 0.0);
        prop_assert_eq!(t == 0.0, all_equal);
    }

    #[test]
    fn distance_is_symmetric_and_zero_on_self(a in any::<u64>(), b in any::<u64>()) {
        let (sa, sb) = (solution_from(a), solution_from(b));
        prop_assert_eq!(solution_distance(&sa, &sa), 0.0);
        let (ab, ba) = (solution_distance(&sa, &sb), solution_distance(&sb, &sa));
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn filter_partitions_the_batch(
        batch_seeds in prop::collection::vec(any::<u64>(), 0..12),
        ref_seeds in prop::collection::vec(any::<u64>(), 1..6),
        threshold in 0.0..3000.0f64,
    ) {
        let batch: Vec<Solution> = batch_seeds.iter().map(|&s| solution_from(s)).collect();
        let reference: Vec<Solution> = ref_seeds.iter().map(|&s| solution_from(s)).collect();
        let refs: Vec<&Solution> = reference.iter().collect();
        let out = differential_filter(&batch, &refs, threshold).unwrap();
        prop_assert_eq!(out.accepted.len() + out.rejected.len(), batch.len());
        let (mut acc, mut rej) = (out.accepted.iter(), out.rejected.iter());
        for s in &batch {
            let d = mean_reference_distance(s, &refs);
            let side = if d >= threshold { acc.next() } else { rej.next() };
            prop_assert_eq!(side.map(Solution::id), Some(s.id()));
        }
    }

    #[test]
    fn stagnation_matches_run_oracle(sets in prop::collection::vec(0..3u8, 0..12), t in 1..5usize) {
        let mut state = StagnationState::new(t, 1);
        let fired: Vec<bool> = sets
            .iter()
            .map(|&s| state.observe([SolutionId(u64::from(s))].into_iter().collect()))
            .collect();
        prop_assert_eq!(fired, stagnation_oracle(&sets, t));
    }

    #[test]
    fn violation_iff_below_threshold(seed in any::<u64>()) {
        let w = world();
        let s = solution_from(seed);
        let trace = execute(&s, &w);
        let c = criticality(&trace).unwrap();
        prop_assert!(c >= -w.safety_radius);
        prop_assert_eq!(detect_violation(&trace, &w).is_some(), c < w.collision_threshold);
    }
}
