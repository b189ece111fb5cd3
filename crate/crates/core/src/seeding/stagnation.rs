//! Detects when the top of the population stops changing.

use std::collections::{BTreeSet, VecDeque};

use crate::genome::SolutionId;

pub type IdSet = BTreeSet<SolutionId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagnationState {
    window: VecDeque<IdSet>,
    t: usize,
    k: usize,
}

impl StagnationState {
    /// `t` consecutive equal top-`k` sets trigger.
    pub fn new(t: usize, k: usize) -> Self {
        assert!(t >= 1 && k >= 1, "t and k must be positive");
        Self {
            window: VecDeque::with_capacity(t),
            t,
            k,
        }
    }

    /// Defaults for population size `n`: `t = 3`, `k = ceil(n / 4)`.
    pub fn for_population(n: usize) -> Self {
        Self::new(3, n.div_ceil(4).max(1))
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Records one generation's top-k set; returns whether it triggered.
    pub fn observe(&mut self, top_k: IdSet) -> bool {
        if self.window.len() == self.t {
            self.window.pop_front();
        }
        self.window.push_back(top_k);
        let triggered = self.window.len() == self.t && self.window.iter().all(|s| *s == self.window[0]);
        if triggered {
            self.window.clear();
        }
        triggered
    }
}

pub fn detect_stagnation(mut state: StagnationState, top_k: IdSet) -> (StagnationState, bool) {
    let triggered = state.observe(top_k);
    (state, triggered)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u64]) -> IdSet {
        ids.iter().map(|&i| SolutionId(i)).collect()
    }

    #[test]
    fn three_equal_sets_trigger() {
        let s = StagnationState::new(3, 2);
        let (s, a) = detect_stagnation(s, set(&[1, 2]));
        let (s, b) = detect_stagnation(s, set(&[1, 2]));
        let (s, c) = detect_stagnation(s, set(&[2, 1]));
        assert_eq!((a, b, c), (false, false, true));
        assert_eq!(s.window_len(), 0);
        let (_, d) = detect_stagnation(s, set(&[1, 2]));
        assert!(!d);
    }

    #[test]
    fn unequal_set_breaks_the_run() {
        let mut s = StagnationState::new(3, 1);
        assert!(!s.observe(set(&[1])));
        assert!(!s.observe(set(&[1])));
        assert!(!s.observe(set(&[2])));
        assert!(!s.observe(set(&[2])));
        assert!(s.observe(set(&[2])));
    }

    #[test]
    fn window_is_bounded() {
        let mut s = StagnationState::new(2, 1);
        for i in 0..10 {
            s.observe(set(&[i]));
            assert!(s.window_len() <= 2);
        }
    }

    #[test]
    fn population_defaults() {
        let s = StagnationState::for_population(20);
        assert_eq!((s.t(), s.k()), (3, 5));
        assert_eq!(StagnationState::for_population(21).k(), 6);
        assert_eq!(StagnationState::for_population(1).k(), 1);
    }
}
