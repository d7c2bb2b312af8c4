//! Greatest-fixpoint computation of ε-simulation, ε-bisimulation and their
//! a-priori variants.
//!
//! Every refinement starts from `S × S` and, each round, keeps the pairs whose
//! challenges are answered with respect to the previous round's relation.
//! Rounds are barriers; pairs within a round are checked in parallel, and the
//! result does not depend on scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::automaton::{ProbAutomaton, StateId, SubDistribution};
use crate::error::{Error, Result};
use crate::lifting::{self, check_epsilon, SUBSET_CAP};
use crate::rational::Rational;
use crate::relation::Relation;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Sim,
    Bisim,
    AprioriSim,
    AprioriBisim,
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Kind::Sim),
            "bisim" => Ok(Kind::Bisim),
            "apriori-sim" => Ok(Kind::AprioriSim),
            "apriori-bisim" => Ok(Kind::AprioriBisim),
            other => Err(Error::Parse(format!("unknown relation kind `{other}` (expected sim, bisim, apriori-sim or apriori-bisim)"))),
        }
    }
}

/// Why a pair was removed: `challenger` moved with `action` to `challenge` and
/// the other state had no answer. For a-priori relations `event` is the set
/// `E` no transition could cover.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    pub challenger: StateId,
    pub action: String,
    pub challenge: SubDistribution,
    pub event: Option<Vec<StateId>>,
    pub round: usize,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub relation: Relation,
    /// Refinement rounds performed, including the final one that changed nothing.
    pub iterations: usize,
    /// First failure for every pair that was removed.
    pub witnesses: BTreeMap<(StateId, StateId), Witness>,
}

impl SimulationResult {
    pub fn contains(&self, s: StateId, t: StateId) -> bool {
        self.relation.contains(s, t)
    }
}

// A challenge failure without the round number.
type Failure = (StateId, String, SubDistribution, Option<Vec<StateId>>);

/// Checks whether every `a`-move of `s` is answered by `t` w.r.t. `r`.
fn post_challenge(pa: &ProbAutomaton, s: StateId, t: StateId, r: &Relation, eps: &Rational) -> Option<Failure> {
    for (a, action) in pa.actions().iter().enumerate() {
        for mu in pa.successors(s, a) {
            if !pa.successors(t, a).any(|nu| lifting::lifts(mu, nu, r, eps)) {
                return Some((s, action.name.clone(), mu.clone(), None));
            }
        }
    }
    None
}

fn subset_states(support: &[StateId], bits: u32) -> impl Iterator<Item = StateId> + Clone + '_ {
    support.iter().enumerate().filter(move |(k, _)| bits >> k & 1 == 1).map(|(_, s)| *s)
}

/// A-priori challenge: for every `a`-move `mu` of `s` and every event `E`
/// inside the support of `mu`, some `a`-move of `t` covers `E`.
fn prio_challenge(pa: &ProbAutomaton, s: StateId, t: StateId, r: &Relation, eps: &Rational) -> Option<Failure> {
    for (a, action) in pa.actions().iter().enumerate() {
        for mu in pa.successors(s, a) {
            let support: Vec<StateId> = mu.support().collect();
            for bits in 0..(1u32 << support.len()) {
                let event = subset_states(&support, bits);
                let lhs: Rational = event.clone().map(|x| mu.prob(x)).sum();
                let image = r.image_of(event.clone());
                if !pa.successors(t, a).any(|nu| lhs <= nu.mass_of(&image) + eps) {
                    return Some((s, action.name.clone(), mu.clone(), Some(event.collect())));
                }
            }
        }
    }
    None
}

fn check_support_cap(pa: &ProbAutomaton) -> Result<()> {
    let widest = pa.transitions().iter().map(|t| t.target.support_len()).max().unwrap_or(0);
    if widest > SUBSET_CAP {
        return Err(Error::SizeCap { what: "support of a transition", actual: widest, limit: SUBSET_CAP });
    }
    Ok(())
}

/// One application of the refinement operator for `kind` to `r`, returning
/// the pairs of `r` that fail together with their failure.
fn refine_round(pa: &ProbAutomaton, kind: Kind, r: &Relation, eps: &Rational) -> Vec<((StateId, StateId), Failure)> {
    let pairs: Vec<(StateId, StateId)> = r.pairs().collect();
    let challenge = match kind {
        Kind::Sim | Kind::Bisim => post_challenge,
        Kind::AprioriSim | Kind::AprioriBisim => prio_challenge,
    };
    let two_sided = matches!(kind, Kind::Bisim | Kind::AprioriBisim);
    pairs
        .par_iter()
        .filter_map(|&(s, t)| {
            let fail = challenge(pa, s, t, r, eps).or_else(|| if two_sided { challenge(pa, t, s, r, eps) } else { None });
            fail.map(|f| ((s, t), f))
        })
        .collect()
}

fn refine(pa: &ProbAutomaton, kind: Kind, eps: &Rational, max_rounds: Option<usize>) -> Result<SimulationResult> {
    check_epsilon(eps)?;
    if matches!(kind, Kind::AprioriSim | Kind::AprioriBisim) {
        check_support_cap(pa)?;
    }
    let n = pa.num_states();
    let mut relation = Relation::full(n, n);
    let mut witnesses = BTreeMap::new();
    let mut iterations = 0;
    loop {
        if max_rounds.is_some_and(|m| iterations >= m) {
            break;
        }
        iterations += 1;
        let failed = refine_round(pa, kind, &relation, eps);
        if failed.is_empty() {
            break;
        }
        for ((s, t), (challenger, action, challenge, event)) in failed {
            relation.remove(s, t);
            witnesses.insert((s, t), Witness { challenger, action, challenge, event, round: iterations });
        }
    }
    Ok(SimulationResult { relation, iterations, witnesses })
}

/// Largest ε-simulation `≺_ε`.
pub fn epsilon_simulation(pa: &ProbAutomaton, eps: &Rational) -> Result<SimulationResult> {
    refine(pa, Kind::Sim, eps, None)
}

/// Largest ε-bisimulation `∼_ε`.
pub fn epsilon_bisimulation(pa: &ProbAutomaton, eps: &Rational) -> Result<SimulationResult> {
    refine(pa, Kind::Bisim, eps, None)
}

/// Largest a-priori ε-simulation. Exponential in the support size of the
/// transitions; supports above [`SUBSET_CAP`] are rejected.
pub fn apriori_simulation(pa: &ProbAutomaton, eps: &Rational) -> Result<SimulationResult> {
    refine(pa, Kind::AprioriSim, eps, None)
}

pub fn apriori_bisimulation(pa: &ProbAutomaton, eps: &Rational) -> Result<SimulationResult> {
    refine(pa, Kind::AprioriBisim, eps, None)
}

pub fn relation_of_kind(pa: &ProbAutomaton, kind: Kind, eps: &Rational) -> Result<SimulationResult> {
    refine(pa, kind, eps, None)
}

/// The `n`-th approximant `F^n(S × S)` of the refinement for `kind`.
pub fn bounded_relation(pa: &ProbAutomaton, kind: Kind, eps: &Rational, rounds: usize) -> Result<SimulationResult> {
    refine(pa, kind, eps, Some(rounds))
}

/// Strong simulation preorder computed with the subset-quantifier lifting and
/// an in-place refinement loop, sharing no code with [`epsilon_simulation`].
pub fn classical_sim_oracle(pa: &ProbAutomaton) -> Result<Relation> {
    classical_oracle(pa, false)
}

/// Strong bisimilarity, computed like [`classical_sim_oracle`] but requiring
/// the challenge in both directions.
pub fn classical_bisim_oracle(pa: &ProbAutomaton) -> Result<Relation> {
    classical_oracle(pa, true)
}

fn classical_oracle(pa: &ProbAutomaton, symmetric: bool) -> Result<Relation> {
    let n = pa.num_states();
    let zero = Rational::zero();
    let mut r = Relation::full(n, n);
    let answered = |r: &Relation, s: StateId, t: StateId| -> Result<bool> {
        for tr in pa.transitions().iter().filter(|tr| tr.source == s) {
            let mut ok = false;
            for other in pa.transitions().iter().filter(|o| o.source == t && o.action == tr.action) {
                if lifting::lift_check_bruteforce(&tr.target, &other.target, r, &zero)? {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            for t in 0..n {
                let (s, t) = (StateId(s), StateId(t));
                if r.contains(s, t) && !(answered(&r, s, t)? && (!symmetric || answered(&r, t, s)?)) {
                    r.remove(s, t);
                    if symmetric {
                        r.remove(t, s);
                    }
                    changed = true;
                }
            }
        }
    }
    Ok(r)
}
