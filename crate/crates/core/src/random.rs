//! Seeded generators of small random automata and sub-distributions, used by
//! property tests and the acceptance suite.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Action, ProbAutomaton, StateId, SubDistribution, Transition};
use crate::rational::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sub-distribution over `0..n` with at most `max_support` states and
/// probabilities on the grid `k/grid`. With probability `full` the mass is 1.
pub fn subdistribution<R: Rng>(rng: &mut R, n: usize, max_support: usize, grid: u32, full: f64) -> SubDistribution {
    if n == 0 {
        return SubDistribution::empty();
    }
    let k = rng.random_range(1..=max_support.min(n).max(1));
    let states = sample(rng, n, k);
    let total = if rng.random_bool(full) { grid } else { rng.random_range(0..=grid) };
    // split `total` into k non-negative parts
    let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.random_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    let entries = states
        .iter()
        .zip(cuts.windows(2))
        .map(|(s, w)| (StateId(s), Rational::new((w[1] - w[0]) as i64, grid as i64)));
    SubDistribution::new(entries).expect("non-negative by construction")
}

#[derive(Clone, Debug)]
pub struct RandomPa {
    pub min_states: usize,
    pub max_states: usize,
    pub actions: Vec<Action>,
    /// Upper bound on transitions per (state, action).
    pub max_out: usize,
    pub max_support: usize,
    pub grid: u32,
    /// Probability that a generated distribution has mass exactly 1.
    pub full_mass: f64,
}

impl Default for RandomPa {
    fn default() -> Self {
        RandomPa {
            min_states: 1,
            max_states: 6,
            actions: vec![Action::plain("a"), Action::plain("b")],
            max_out: 2,
            max_support: 3,
            grid: 8,
            full_mass: 0.5,
        }
    }
}

impl RandomPa {
    pub fn with_states(mut self, min: usize, max: usize) -> Self {
        self.min_states = min;
        self.max_states = max;
        self
    }

    pub fn deterministic(mut self) -> Self {
        self.max_out = 1;
        self
    }

    pub fn with_actions(mut self, actions: Vec<Action>) -> Self {
        self.actions = actions;
        self
    }

    /// Builds an automaton whose states are named `{prefix}{i}`; state 0 is initial.
    pub fn generate_named<R: Rng>(&self, rng: &mut R, prefix: &str) -> ProbAutomaton {
        let n = rng.random_range(self.min_states..=self.max_states);
        let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
        let mut transitions = Vec::new();
        for s in 0..n {
            for action in &self.actions {
                let count = rng.random_range(0..=self.max_out);
                let mut seen: Vec<SubDistribution> = Vec::new();
                for _ in 0..count {
                    let d = subdistribution(rng, n, self.max_support, self.grid, self.full_mass);
                    if !seen.contains(&d) {
                        seen.push(d.clone());
                        transitions.push(Transition { source: StateId(s), action: action.name.clone(), target: d });
                    }
                }
            }
        }
        let initial = (n > 0).then_some(StateId(0));
        ProbAutomaton::new(names, self.actions.clone(), transitions, initial)
    }

    pub fn generate<R: Rng>(&self, rng: &mut R) -> ProbAutomaton {
        self.generate_named(rng, "q")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_automata_are_valid() {
        let mut g = rng(7);
        let spec = RandomPa::default();
        for _ in 0..200 {
            let pa = spec.generate(&mut g);
            assert!(pa.validate().is_empty(), "{:?}", pa.validate());
            assert!((1..=6).contains(&pa.num_states()));
        }
    }

    #[test]
    fn deterministic_option() {
        let mut g = rng(3);
        let spec = RandomPa::default().deterministic();
        for _ in 0..50 {
            assert!(spec.generate(&mut g).is_deterministic());
        }
    }

    #[test]
    fn same_seed_same_automaton() {
        let spec = RandomPa::default();
        let a = crate::format::write_automaton(&spec.generate(&mut rng(11)));
        let b = crate::format::write_automaton(&spec.generate(&mut rng(11)));
        assert_eq!(a, b);
    }

    #[test]
    fn subdistribution_mass_bound() {
        let mut g = rng(1);
        for _ in 0..500 {
            let d = subdistribution(&mut g, 5, 4, 16, 0.3);
            assert!(*d.mass() <= Rational::one());
            assert!(d.support_len() <= 4);
        }
    }
}
