//! The bisimulation pseudo-metric `d(s,t) = inf{ε | s ∼_ε t}`, computed
//! exactly or on a `1/n` grid, and the discounted metric `d^λ` for the
//! linear decay `λ(x) = min(x + δ, 1)`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::automaton::{ProbAutomaton, StateId, SubDistribution};
use crate::error::{Error, Result};
use crate::lifting::{flow_deficit, lifts};
use crate::rational::Rational;
use crate::relation::Relation;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    Approx { n: usize },
    Discounted { big_n: usize },
}

/// Square matrix of distances between the states of one automaton.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DistanceMatrix {
    pub names: Vec<String>,
    values: Vec<Rational>,
    pub provenance: Provenance,
    /// Rounds performed by the algorithm that produced the matrix.
    pub iterations: usize,
}

impl DistanceMatrix {
    fn filled(pa: &ProbAutomaton, value: Rational, provenance: Provenance) -> Self {
        let n = pa.num_states();
        DistanceMatrix { names: pa.state_names().to_vec(), values: vec![value; n * n], provenance, iterations: 0 }
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, s: StateId, t: StateId) -> &Rational {
        &self.values[s.0 * self.size() + t.0]
    }

    fn set(&mut self, s: StateId, t: StateId, v: Rational) {
        let n = self.size();
        self.values[s.0 * n + t.0] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.values.chunks(self.size().max(1))
    }

    /// Distinct entries in increasing order.
    pub fn distinct_values(&self) -> Vec<Rational> {
        self.values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// `R^d_ε = {(s,t) | d(s,t) ≤ ε}`.
    pub fn threshold(&self, eps: &Rational) -> Relation {
        let n = self.size();
        let mut r = Relation::empty(n, n);
        for s in 0..n {
            for t in 0..n {
                if self.values[s * n + t] <= *eps {
                    r.insert(StateId(s), StateId(t));
                }
            }
        }
        r
    }

    pub fn max_entry(&self) -> Rational {
        self.values.iter().max().cloned().unwrap_or_default()
    }

    /// Triples `(s, t, u)` with `d(s,u) > d(s,t) + d(t,u)`.
    pub fn triangle_violations(&self) -> Vec<(StateId, StateId, StateId)> {
        let n = self.size();
        let mut out = Vec::new();
        for s in 0..n {
            for t in 0..n {
                for u in 0..n {
                    let (s, t, u) = (StateId(s), StateId(t), StateId(u));
                    if *self.get(s, u) > self.get(s, t) + self.get(t, u) {
                        out.push((s, t, u));
                    }
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|s| (0..n).all(|t| self.get(StateId(s), StateId(t)) == self.get(StateId(t), StateId(s))))
    }

    pub fn zero_diagonal(&self) -> bool {
        (0..self.size()).all(|s| self.get(StateId(s), StateId(s)).is_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let matrix: Vec<Vec<String>> = self.rows().map(|row| row.iter().map(|v| v.to_string()).collect()).collect();
        json!({
            "provenance": self.provenance,
            "iterations": self.iterations,
            "states": self.names,
            "matrix": matrix,
        })
    }

    /// Header row of state names, then one row per state. Entries are
    /// decimal approximations for display only.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("state");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(self.rows()) {
            out.push_str(name);
            for v in row {
                out.push(',');
                out.push_str(&v.to_decimal(digits));
            }
            out.push('\n');
        }
        out
    }
}

fn all_pairs(n: usize) -> Vec<(StateId, StateId)> {
    (0..n).flat_map(|s| (0..n).map(move |t| (StateId(s), StateId(t)))).collect()
}

/// Least `ε` such that some `ν` in `answers` lifts `mu` with slack `ε` against
/// `R^d_ε`, or `None` when there is no answer at all.
fn smallest_epsilon<'a>(
    mu: &SubDistribution,
    answers: impl Iterator<Item = &'a SubDistribution>,
    d: &DistanceMatrix,
) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for nu in answers {
        // Only pairs in supp(mu) × supp(nu) matter, so only their values are breakpoints.
        let mut taus: BTreeSet<Rational> = BTreeSet::from([Rational::zero()]);
        for s in mu.support() {
            for t in nu.support() {
                taus.insert(d.get(s, t).clone());
            }
        }
        let taus: Vec<Rational> = taus.into_iter().collect();
        for (k, tau) in taus.iter().enumerate() {
            if best.as_ref().is_some_and(|b| b <= tau) {
                break;
            }
            let deficit = flow_deficit(mu, nu, &d.threshold(tau));
            let candidate = tau.clone().max(deficit);
            let fits = taus.get(k + 1).is_none_or(|next| candidate < *next);
            if fits {
                if best.as_ref().is_none_or(|b| candidate < *b) {
                    best = Some(candidate);
                }
                break;
            }
        }
    }
    best
}

/// The candidate set for the smallest-ε search of one challenge: the distinct
/// values of `dj` (and 0) together with the flow deficits
/// `μ(S) − maxflow(N(μ, ν, R^{dj}_τ))` for every answer `ν` and threshold `τ`.
pub fn candidate_epsilons(
    pa: &ProbAutomaton,
    dj: &DistanceMatrix,
    _s: StateId,
    t: StateId,
    action: &str,
    mu: &SubDistribution,
) -> Vec<Rational> {
    let Some(a) = pa.action_index(action) else {
        return Vec::new();
    };
    if pa.successors(t, a).len() == 0 {
        return Vec::new();
    }
    let mut taus = dj.distinct_values();
    taus.push(Rational::zero());
    let mut out: BTreeSet<Rational> = taus.iter().cloned().collect();
    for nu in pa.successors(t, a) {
        for tau in &taus {
            out.insert(flow_deficit(mu, nu, &dj.threshold(tau)));
        }
    }
    out.into_iter().collect()
}

/// One-directional part of the update for `(s, t)`: the maximum over the
/// moves of `s` of the smallest answering ε; 1 when some move has no answer.
fn challenge_value(pa: &ProbAutomaton, s: StateId, t: StateId, d: &DistanceMatrix) -> Rational {
    let mut worst = Rational::zero();
    for a in 0..pa.actions().len() {
        for mu in pa.successors(s, a) {
            match smallest_epsilon(mu, pa.successors(t, a), d) {
                Some(e) => worst = worst.max(e),
                None => return Rational::one(),
            }
        }
    }
    worst
}

/// Exact distance by iterating the smallest-ε update from `d = 0` until it is
/// stable. The update challenges from both states of a pair so that every
/// threshold of the result is an ε-bisimulation.
pub fn distance_exact(pa: &ProbAutomaton) -> Result<DistanceMatrix> {
    let n = pa.num_states();
    let mut d = DistanceMatrix::filled(pa, Rational::zero(), Provenance::Exact);
    let pairs = all_pairs(n);
    let cap = n * n * (n * n + 1) + 2;
    loop {
        d.iterations += 1;
        if d.iterations > cap {
            return Err(Error::IterationCap(cap));
        }
        let updates: Vec<((StateId, StateId), Rational)> = pairs
            .par_iter()
            .filter(|(s, t)| s < t)
            .filter_map(|&(s, t)| {
                let v = challenge_value(pa, s, t, &d).max(challenge_value(pa, t, s, &d));
                (v != *d.get(s, t)).then_some(((s, t), v))
            })
            .collect();
        if updates.is_empty() {
            return Ok(d);
        }
        for ((s, t), v) in updates {
            debug_assert!(v > *d.get(s, t), "distance decreased");
            d.set(t, s, v.clone());
            d.set(s, t, v);
        }
    }
}

/// Does `t` answer every move of `s` with slack `eps` against `r`?
fn answers_all(pa: &ProbAutomaton, s: StateId, t: StateId, r: &Relation, eps: &Rational) -> bool {
    (0..pa.actions().len()).all(|a| pa.successors(s, a).all(|mu| pa.successors(t, a).any(|nu| lifts(mu, nu, r, eps))))
}

/// Distance on the grid `{0, 1/n, ..., 1}`: for `m = n−1` down to 0, the pairs
/// still at 0 are refined to the `m/n`-bisimulation and the pairs dropped get
/// `(m+1)/n`. The result is `⌈n·d⌉/n`.
pub fn distance_approx(pa: &ProbAutomaton, n: usize) -> Result<DistanceMatrix> {
    if n == 0 {
        return Err(Error::NonPositive("n"));
    }
    let size = pa.num_states();
    let mut d = DistanceMatrix::filled(pa, Rational::zero(), Provenance::Approx { n });
    let mut zero = Relation::full(size, size);
    for m in (0..n).rev() {
        let slack = Rational::new(m as i64, n as i64);
        let value = Rational::new(m as i64 + 1, n as i64);
        loop {
            d.iterations += 1;
            let pairs: Vec<(StateId, StateId)> = zero.pairs().filter(|(s, t)| s <= t).collect();
            let failed: Vec<(StateId, StateId)> = pairs
                .into_par_iter()
                .filter(|&(s, t)| !(answers_all(pa, s, t, &zero, &slack) && answers_all(pa, t, s, &zero, &slack)))
                .collect();
            if failed.is_empty() {
                break;
            }
            for (s, t) in failed {
                zero.remove(s, t);
                zero.remove(t, s);
                d.set(s, t, value.clone());
                d.set(t, s, value.clone());
            }
        }
    }
    Ok(d)
}

/// Discounted distance for `λ(x) = min(x + δ, 1)`, `δ = 1/N`.
///
/// Round `i` keeps the pairs of `R_{i−1}` whose moves are answered with slack
/// `1 − iδ` against `R_{i−1}`, starting from `R_0 = S × S`. If `n*(s,t)` is the
/// last round `(s,t)` survives, `d^λ(s,t) = 1 − min(n*(s,t), n*(t,s))·δ`; a
/// pair surviving every round is at distance 0 and a pair failing the first
/// round at distance 1.
pub fn distance_discounted(pa: &ProbAutomaton, big_n: usize) -> Result<DistanceMatrix> {
    if big_n == 0 {
        return Err(Error::NonPositive("N"));
    }
    let size = pa.num_states();
    let delta = Rational::new(1, big_n as i64);
    let mut survived = vec![big_n; size * size];
    let mut r = Relation::full(size, size);
    let mut iterations = 0;
    for i in 1..=big_n {
        iterations += 1;
        let slack = Rational::one() - &(Rational::from_integer(i as i64) * &delta);
        let pairs: Vec<(StateId, StateId)> = r.pairs().collect();
        let failed: Vec<(StateId, StateId)> =
            pairs.into_par_iter().filter(|&(s, t)| !answers_all(pa, s, t, &r, &slack)).collect();
        for (s, t) in failed {
            r.remove(s, t);
            survived[s.0 * size + t.0] = i - 1;
        }
    }
    let mut d = DistanceMatrix::filled(pa, Rational::zero(), Provenance::Discounted { big_n });
    d.iterations = iterations;
    for (s, t) in all_pairs(size) {
        let rounds = survived[s.0 * size + t.0].min(survived[t.0 * size + s.0]);
        d.set(s, t, Rational::one() - &(Rational::from_integer(rounds as i64) * &delta));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, state};
    use crate::r;
    use crate::simulation::epsilon_bisimulation;

    #[test]
    fn fig3_pairs_at_quarter() {
        let eps = r!(1, 4);
        let left = fixtures::fig3_left(&eps);
        let d = distance_exact(&left).unwrap();
        assert_eq!(*d.get(state(&left, "s"), state(&left, "t")), eps);
        let right = fixtures::fig3_right(&eps);
        let d = distance_exact(&right).unwrap();
        assert_eq!(*d.get(state(&right, "u"), state(&right, "v")), eps);
    }

    #[test]
    fn fig1_distance_exceeds_one_eighth() {
        let pa = fixtures::fig1();
        let d = distance_exact(&pa).unwrap();
        let v = d.get(state(&pa, "s"), state(&pa, "t")).clone();
        assert!(v > r!(1, 8));
        // d is the least ε of a bisimulation sweep over the candidate values
        let sweep = d
            .distinct_values()
            .into_iter()
            .find(|e| epsilon_bisimulation(&pa, e).unwrap().contains(state(&pa, "s"), state(&pa, "t")));
        assert_eq!(sweep, Some(v));
    }

    #[test]
    fn pseudometric_axioms_on_fixtures() {
        for pa in [fixtures::fig1(), fixtures::prio_not_post(), fixtures::fig3_left(&r!(1, 4)), fixtures::two_chains(3)] {
            let d = distance_exact(&pa).unwrap();
            assert!(d.zero_diagonal() && d.is_symmetric());
            assert!(d.triangle_violations().is_empty());
        }
    }

    #[test]
    fn thresholds_are_bisimulations() {
        let pa = fixtures::fig1();
        let d = distance_exact(&pa).unwrap();
        for eps in d.distinct_values().into_iter().filter(|e| *e < r!(1)) {
            assert_eq!(d.threshold(&eps), epsilon_bisimulation(&pa, &eps).unwrap().relation, "ε = {eps}");
        }
    }

    #[test]
    fn candidates_contain_the_minimiser() {
        let eps = r!(1, 4);
        let pa = fixtures::fig3_left(&eps);
        let (s2, t2) = (state(&pa, "s2"), state(&pa, "t2"));
        let zero = DistanceMatrix::filled(&pa, r!(0), Provenance::Exact);
        let mu = pa.successors(t2, pa.action_index("b").unwrap()).next().unwrap().clone();
        // t2 moves with mass 1, s2 answers with 3/4
        let c = candidate_epsilons(&pa, &zero, t2, s2, "b", &mu);
        assert_eq!(c, vec![r!(0), r!(1, 4)]);
        assert!(candidate_epsilons(&pa, &zero, s2, state(&pa, "s3"), "b", &mu).is_empty());
    }

    #[test]
    fn approx_on_fig3() {
        let pa = fixtures::fig3_left(&r!(1, 4));
        let d = distance_approx(&pa, 8).unwrap();
        assert_eq!(*d.get(state(&pa, "s"), state(&pa, "t")), r!(2, 8));
    }

    #[test]
    fn approx_with_one_step() {
        let pa = fixtures::fig1();
        let d = distance_approx(&pa, 1).unwrap();
        let bisim = epsilon_bisimulation(&pa, &r!(0)).unwrap().relation;
        for (s, t) in all_pairs(pa.num_states()) {
            let expected = if bisim.contains(s, t) { r!(0) } else { r!(1) };
            assert_eq!(*d.get(s, t), expected);
        }
    }

    #[test]
    fn approx_is_ceiling_of_exact() {
        let pa = fixtures::fig1();
        let exact = distance_exact(&pa).unwrap();
        let approx = distance_approx(&pa, 16).unwrap();
        for (s, t) in all_pairs(pa.num_states()) {
            let gap = approx.get(s, t) - exact.get(s, t);
            assert!(!gap.is_negative() && gap < r!(1, 16), "{s} {t}: {gap}");
        }
    }

    #[test]
    fn discounted_fades_with_depth() {
        let mut previous = r!(2);
        for depth in 0..5 {
            let pa = fixtures::two_chains(depth);
            let (l, r_) = (state(&pa, "l0"), state(&pa, "r0"));
            let disc = distance_discounted(&pa, 20).unwrap();
            let v = disc.get(l, r_).clone();
            assert!(v < previous, "depth {depth}: {v}");
            previous = v;
            assert_eq!(*distance_exact(&pa).unwrap().get(l, r_), r!(1));
        }
    }

    #[test]
    fn discounted_extremes() {
        let pa = fixtures::two_chains(0);
        let d = distance_discounted(&pa, 20).unwrap();
        // different enabled actions: fails the first round
        assert_eq!(*d.get(state(&pa, "l0"), state(&pa, "r0")), r!(1));
        // two deadlocks are bisimilar
        assert_eq!(*d.get(state(&pa, "r0"), state(&pa, "end")), r!(0));
        assert!(d.zero_diagonal() && d.is_symmetric());
        assert_eq!(d.iterations, 20);
    }

    #[test]
    fn zero_parameters_rejected() {
        let pa = fixtures::one_state_loop();
        assert!(distance_approx(&pa, 0).is_err());
        assert!(distance_discounted(&pa, 0).is_err());
    }

    #[test]
    fn outputs() {
        let pa = fixtures::fig3_left(&r!(1, 4));
        let d = distance_exact(&pa).unwrap();
        let j = d.to_json();
        assert_eq!(j["provenance"]["algorithm"], "exact");
        assert_eq!(j["matrix"][0][4], "1/4");
        let csv = d.to_csv(10);
        assert!(csv.starts_with("state,s,s1,s2,s3,t,t1,t2,t3\ns,0.0000000000,"));
        assert!(csv.lines().nth(1).unwrap().contains("0.2500000000"));
    }
}
