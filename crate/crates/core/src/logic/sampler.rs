//! Random formulas, the sampled soundness check for logical simulation, and
//! characteristic formulas for a-priori simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{ProbAutomaton, StateId};
use crate::error::Result;
use crate::rational::Rational;
use crate::simulation::{bounded_relation, epsilon_simulation, Kind};

use super::formula::Formula;
use super::semantics::Checker;

/// Seeded generator of depth-bounded formulas. Constructors are drawn
/// uniformly among those allowed; thresholds come from `{k/grid}`.
#[derive(Clone, Debug)]
pub struct FormulaSampler {
    rng: ChaCha8Rng,
    pub actions: Vec<String>,
    pub max_depth: usize,
    pub negation: bool,
    pub set_diamonds: bool,
    pub grid: i64,
    /// Upper bound on the number of nodes of one formula.
    pub max_size: usize,
}

impl FormulaSampler {
    pub fn new(seed: u64, actions: Vec<String>) -> Self {
        FormulaSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            actions,
            max_depth: 3,
            negation: false,
            set_diamonds: true,
            grid: 16,
            max_size: 40,
        }
    }

    pub fn for_automaton(seed: u64, pa: &ProbAutomaton) -> Self {
        Self::new(seed, pa.actions().iter().map(|a| a.name.clone()).collect())
    }

    pub fn max_depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }

    pub fn negation(mut self, on: bool) -> Self {
        self.negation = on;
        self
    }

    pub fn set_diamonds(mut self, on: bool) -> Self {
        self.set_diamonds = on;
        self
    }

    fn threshold(&mut self) -> Rational {
        Rational::new(self.rng.random_range(0..=self.grid), self.grid)
    }

    pub fn sample(&mut self) -> Formula {
        let mut budget = self.max_size;
        self.node(self.max_depth, &mut budget)
    }

    fn node(&mut self, depth: usize, budget: &mut usize) -> Formula {
        if *budget <= 1 {
            *budget = 0;
            return Formula::Top;
        }
        *budget -= 1;
        let mut choices = vec![0u8, 2, 3];
        if self.negation {
            choices.push(1);
        }
        if depth > 0 && !self.actions.is_empty() {
            choices.push(4);
            choices.push(4);
            if self.set_diamonds {
                choices.push(5);
            }
        }
        match choices[self.rng.random_range(0..choices.len())] {
            0 => Formula::Top,
            1 => Formula::neg(self.node(depth, budget)),
            k @ (2 | 3) => {
                let parts = vec![self.node(depth, budget), self.node(depth, budget)];
                if k == 2 {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            4 => {
                let action = self.actions[self.rng.random_range(0..self.actions.len())].clone();
                let t = self.threshold();
                Formula::diamond(action, t, self.node(depth - 1, budget))
            }
            _ => {
                let action = self.actions[self.rng.random_range(0..self.actions.len())].clone();
                let k = self.rng.random_range(1..=3);
                let branches = (0..k).map(|_| (self.node(depth - 1, budget), self.threshold())).collect();
                Formula::diamond_set(action, branches)
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub formulas: usize,
    pub pairs: usize,
    /// `(s, t, φ)` with `s ≺_ε t`, `s ⊨ φ` and `t ⊭_ε φ`.
    pub violations: Vec<(StateId, StateId, Formula)>,
}

/// For every pair of `≺_ε` and `count` sampled negation-free formulas, checks
/// `s ⊨ φ ⇒ t ⊨_ε φ`. Any violation is a bug.
pub fn logical_sim_sound_check(
    pa: &ProbAutomaton,
    eps: &Rational,
    sampler: &mut FormulaSampler,
    count: usize,
) -> Result<SoundnessReport> {
    let sim = epsilon_simulation(pa, eps)?.relation;
    let zero = Rational::zero();
    let mut report = SoundnessReport { formulas: count, pairs: sim.len(), violations: Vec::new() };
    for _ in 0..count {
        let phi = sampler.sample();
        let mut checker = Checker::new(pa);
        let exact = checker.sat_set(&phi, &zero);
        let relaxed = checker.sat_set(&phi, eps);
        for (s, t) in sim.pairs() {
            if exact[s.0] && !relaxed[t.0] {
                report.violations.push((s, t, phi.clone()));
            }
        }
    }
    Ok(report)
}

/// Characteristic formulas `χ_u` of depth `n` in the logic without negation
/// and with simple diamonds only: `v ⊨_ε χ_u` iff `u ≺^{prio,n}_ε v`.
///
/// `χ_u^0 = T` and `χ_u^{n+1}` is the conjunction, over the moves `u -a-> μ`
/// and the events `E` inside the support of `μ`, of
/// `<a μ(E)> ∨_{e ∈ E} χ_e^n` (the empty event gives `<a 0> T`).
/// The size grows exponentially with `n`.
pub fn characteristic_formulas(pa: &ProbAutomaton, n: usize) -> Vec<Formula> {
    let mut current = vec![Formula::Top; pa.num_states()];
    for _ in 0..n {
        let next = pa
            .states()
            .map(|u| {
                let mut conj = Vec::new();
                for (a, action) in pa.actions().iter().enumerate() {
                    for mu in pa.successors(u, a) {
                        let support: Vec<StateId> = mu.support().collect();
                        for bits in 0..(1u32 << support.len()) {
                            let event: Vec<StateId> =
                                support.iter().enumerate().filter(|(k, _)| bits >> k & 1 == 1).map(|(_, s)| *s).collect();
                            let p: Rational = event.iter().map(|e| mu.prob(*e)).sum();
                            let body = match event.len() {
                                0 => Formula::Top,
                                1 => current[event[0].0].clone(),
                                _ => Formula::Or(event.iter().map(|e| current[e.0].clone()).collect()),
                            };
                            conj.push(Formula::diamond(action.name.clone(), p, body));
                        }
                    }
                }
                match conj.len() {
                    0 => Formula::Top,
                    1 => conj.pop().unwrap(),
                    _ => Formula::And(conj),
                }
            })
            .collect();
        current = next;
    }
    current
}

/// A formula separating `u` from `v` when `u ⊀^{prio,n}_ε v`: satisfied by
/// `u` exactly and not ε-satisfied by `v`.
pub fn distinguishing_formula(pa: &ProbAutomaton, u: StateId, v: StateId, eps: &Rational, n: usize) -> Result<Option<Formula>> {
    let rel = bounded_relation(pa, Kind::AprioriSim, eps, n)?.relation;
    if rel.contains(u, v) {
        return Ok(None);
    }
    Ok(Some(characteristic_formulas(pa, n).swap_remove(u.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, state};
    use crate::logic::semantics::{sat_set, satisfies};
    use crate::r;

    #[test]
    fn sampler_is_reproducible_and_bounded() {
        let actions = vec!["a".to_string(), "b".to_string()];
        let mut x = FormulaSampler::new(5, actions.clone()).negation(true);
        let mut y = FormulaSampler::new(5, actions).negation(true);
        for _ in 0..100 {
            let f = x.sample();
            assert_eq!(f, y.sample());
            assert!(f.depth() <= 3);
            assert!(f.size() <= 4 * 40);
        }
    }

    #[test]
    fn sampler_respects_logic_flags() {
        let mut s = FormulaSampler::new(9, vec!["a".into()]).negation(false).set_diamonds(false);
        for _ in 0..200 {
            let f = s.sample();
            assert!(!f.has_negation() && !f.has_set_diamond());
        }
    }

    #[test]
    fn fig1_soundness() {
        let pa = fixtures::fig1();
        let mut sampler = FormulaSampler::for_automaton(1, &pa);
        let report = logical_sim_sound_check(&pa, &r!(1, 8), &mut sampler, 300).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations.first());
    }

    #[test]
    fn characteristic_formulas_capture_bounded_prio() {
        let pa = fixtures::prio_not_post();
        for n in 0..=2 {
            let rel = bounded_relation(&pa, Kind::AprioriSim, &r!(0), n).unwrap().relation;
            let chis = characteristic_formulas(&pa, n);
            for u in pa.states() {
                let set = sat_set(&pa, &chis[u.0], &r!(0));
                for v in pa.states() {
                    assert_eq!(set[v.0], rel.contains(u, v), "n={n} u={u} v={v}");
                }
            }
        }
    }

    #[test]
    fn distinguishing_on_fig1() {
        let pa = fixtures::fig1();
        let (s, t, x) = (state(&pa, "s"), state(&pa, "t"), state(&pa, "x"));
        assert!(distinguishing_formula(&pa, s, t, &r!(1, 8), 2).unwrap().is_none());
        let phi = distinguishing_formula(&pa, x, s, &r!(0), 1).unwrap().unwrap();
        assert!(satisfies(&pa, x, &phi, &r!(0)));
        assert!(!satisfies(&pa, s, &phi, &r!(0)));
    }
}
