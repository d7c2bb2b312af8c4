//! Non-deterministic choice and parallel composition of automata with
//! input/output labels, and a checker for non-expansiveness of the distance
//! under parallel composition.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::automaton::{disjoint_union, Action, Polarity, ProbAutomaton, StateId, SubDistribution, Transition};
use crate::error::{Error, Result};
use crate::metrics::distance_exact;
use crate::rational::Rational;
use crate::simulation::epsilon_bisimulation;

/// One probability of a root distribution: `prob` on the initial state
/// `state` of operand `operand`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChoiceTarget {
    pub operand: usize,
    pub state: String,
    pub prob: Rational,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChoiceBranch {
    pub action: String,
    /// Used when no operand declares the action.
    #[serde(default)]
    pub polarity: Polarity,
    pub to: Vec<ChoiceTarget>,
}

/// `<+>_i {s -a_i-> μ_ij}`: a fresh root whose moves are distributions over
/// the operands' initial states.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChoiceSpec {
    pub root: String,
    #[serde(default)]
    pub branches: Vec<ChoiceBranch>,
}

/// Builds the choice automaton: the root (state 0, initial) followed by the
/// disjoint union of the operands.
pub fn nondet_choice(spec: &ChoiceSpec, pas: &[&ProbAutomaton]) -> Result<ProbAutomaton> {
    let union = disjoint_union(pas)?;
    let body = &union.automaton;
    let mut root = spec.root.clone();
    while body.state_names().contains(&root) {
        root.push('\'');
    }
    let mut names = vec![root];
    names.extend(body.state_names().iter().cloned());
    let shift = |s: StateId| StateId(s.0 + 1);

    let mut actions = body.actions().to_vec();
    let mut transitions: Vec<Transition> = body
        .transitions()
        .iter()
        .map(|t| Transition { source: shift(t.source), action: t.action.clone(), target: t.target.map_states(shift) })
        .collect();
    for branch in &spec.branches {
        if !actions.iter().any(|a| a.name == branch.action) {
            actions.push(Action { name: branch.action.clone(), polarity: branch.polarity });
        }
        let mut entries = Vec::with_capacity(branch.to.len());
        for target in &branch.to {
            let pa = pas.get(target.operand).ok_or_else(|| Error::ChoiceTargetNotRoot {
                operand: target.operand,
                state: target.state.clone(),
            })?;
            let init = pa.initial().ok_or(Error::MissingInitial)?;
            if pa.state_name(init) != target.state {
                return Err(Error::ChoiceTargetNotRoot { operand: target.operand, state: target.state.clone() });
            }
            if target.prob.is_negative() {
                return Err(Error::NegativeProbability { state: target.state.clone(), value: target.prob.clone() });
            }
            entries.push((shift(union.embed(target.operand, init)), target.prob.clone()));
        }
        transitions.push(Transition { source: StateId(0), action: branch.action.clone(), target: SubDistribution::new(entries)? });
    }
    Ok(ProbAutomaton::new(names, actions, transitions, Some(StateId(0))))
}

/// `μ ⊗ ν` on `S1 × S2`, with pair `(u, v)` at index `u·|S2| + v`.
pub fn product(mu: &SubDistribution, nu: &SubDistribution, right_size: usize) -> SubDistribution {
    let entries = mu
        .iter()
        .flat_map(|(u, p)| nu.iter().map(move |(v, q)| (StateId(u.0 * right_size + v.0), p * q)));
    SubDistribution::new(entries).expect("products of probabilities are non-negative")
}

enum Rule {
    Sync,
    Left,
    Right,
    Blocked,
}

/// `S1 || S2` on `S1 × S2`. Shared base symbols synchronise: input with input
/// gives an input, output with input gives an output, and two outputs give
/// nothing. Other symbols move one side and keep the other fixed. Shared
/// symbols must carry a polarity.
pub fn parallel(pa1: &ProbAutomaton, pa2: &ProbAutomaton) -> Result<ProbAutomaton> {
    let (n1, n2) = (pa1.num_states(), pa2.num_states());
    let mut names = Vec::with_capacity(n1 * n2);
    for u in pa1.state_names() {
        for v in pa2.state_names() {
            names.push(format!("({u},{v})"));
        }
    }

    let mut rules: BTreeMap<String, Rule> = BTreeMap::new();
    let mut actions = Vec::new();
    for a in pa1.actions() {
        match pa2.actions().iter().find(|b| b.name == a.name) {
            Some(b) => {
                if a.polarity == Polarity::None || b.polarity == Polarity::None {
                    return Err(Error::MissingPolarity(a.name.clone()));
                }
                let (rule, polarity) = match (a.polarity, b.polarity) {
                    (Polarity::Input, Polarity::Input) => (Rule::Sync, Polarity::Input),
                    (Polarity::Output, Polarity::Output) => (Rule::Blocked, Polarity::Output),
                    _ => (Rule::Sync, Polarity::Output),
                };
                rules.insert(a.name.clone(), rule);
                actions.push(Action { name: a.name.clone(), polarity });
            }
            None => {
                rules.insert(a.name.clone(), Rule::Left);
                actions.push(a.clone());
            }
        }
    }
    for b in pa2.actions() {
        if !rules.contains_key(&b.name) {
            rules.insert(b.name.clone(), Rule::Right);
            actions.push(b.clone());
        }
    }

    let pair = |u: StateId, v: StateId| StateId(u.0 * n2 + v.0);
    let mut seen: HashSet<(StateId, String, SubDistribution)> = HashSet::new();
    let mut transitions = Vec::new();
    let mut push = |source: StateId, action: &str, target: SubDistribution| {
        if seen.insert((source, action.to_string(), target.clone())) {
            transitions.push(Transition { source, action: action.to_string(), target });
        }
    };
    for u in pa1.states() {
        for v in pa2.states() {
            for (name, rule) in &rules {
                match rule {
                    Rule::Sync => {
                        let (a1, a2) = (pa1.action_index(name).unwrap(), pa2.action_index(name).unwrap());
                        for mu in pa1.successors(u, a1) {
                            for nu in pa2.successors(v, a2) {
                                push(pair(u, v), name, product(mu, nu, n2));
                            }
                        }
                    }
                    Rule::Left => {
                        let a1 = pa1.action_index(name).unwrap();
                        for mu in pa1.successors(u, a1) {
                            push(pair(u, v), name, product(mu, &SubDistribution::dirac(v), n2));
                        }
                    }
                    Rule::Right => {
                        let a2 = pa2.action_index(name).unwrap();
                        for nu in pa2.successors(v, a2) {
                            push(pair(u, v), name, product(&SubDistribution::dirac(u), nu, n2));
                        }
                    }
                    Rule::Blocked => {}
                }
            }
        }
    }
    let initial = match (pa1.initial(), pa2.initial()) {
        (Some(u), Some(v)) => Some(pair(u, v)),
        _ => None,
    };
    Ok(ProbAutomaton::new(names, actions, transitions, initial))
}

/// [`parallel`] restricted to the states reachable from the initial pair.
pub fn parallel_pruned(pa1: &ProbAutomaton, pa2: &ProbAutomaton) -> Result<ProbAutomaton> {
    let full = parallel(pa1, pa2)?;
    if full.initial().is_none() {
        return Err(Error::MissingInitial);
    }
    Ok(full.reachable_part())
}

/// Distance between the initial states of two automata, computed on their
/// disjoint union.
pub fn initial_distance(pa1: &ProbAutomaton, pa2: &ProbAutomaton) -> Result<Rational> {
    let (i1, i2) = (pa1.initial().ok_or(Error::MissingInitial)?, pa2.initial().ok_or(Error::MissingInitial)?);
    let union = disjoint_union(&[pa1, pa2])?;
    let d = distance_exact(&union.automaton)?;
    Ok(d.get(union.embed(0, i1), union.embed(1, i2)).clone())
}

#[derive(Clone, Debug)]
pub struct NonExpansivenessReport {
    pub components: Rational,
    pub composed: Rational,
    /// `composed <= components`.
    pub holds: bool,
    /// `(ε, s1, s2, s)` with `s1 ∼_ε s2` but not `(s1,s) ∼_ε (s2,s)`.
    pub congruence_failures: Vec<(Rational, StateId, StateId, StateId)>,
}

/// Compares `d(init S1, init S2)` with `d(init S1||S, init S2||S)` and, for
/// every `ε` of `eps_grid`, checks that `∼_ε` between states of `S1` and `S2`
/// is preserved by composing both with any state of `ctx`.
pub fn nonexpansiveness_check(
    pa1: &ProbAutomaton,
    pa2: &ProbAutomaton,
    ctx: &ProbAutomaton,
    eps_grid: &[Rational],
) -> Result<NonExpansivenessReport> {
    let components = initial_distance(pa1, pa2)?;
    let (c1, c2) = (parallel(pa1, ctx)?, parallel(pa2, ctx)?);
    let composed = initial_distance(&c1, &c2)?;

    let base = disjoint_union(&[pa1, pa2])?;
    let comp = disjoint_union(&[&c1, &c2])?;
    let m = ctx.num_states();
    let mut congruence_failures = Vec::new();
    for eps in eps_grid {
        let bisim = epsilon_bisimulation(&base.automaton, eps)?.relation;
        let composed_bisim = epsilon_bisimulation(&comp.automaton, eps)?.relation;
        for s1 in pa1.states() {
            for s2 in pa2.states() {
                if !bisim.contains(base.embed(0, s1), base.embed(1, s2)) {
                    continue;
                }
                for s in ctx.states() {
                    let l = comp.embed(0, StateId(s1.0 * m + s.0));
                    let r = comp.embed(1, StateId(s2.0 * m + s.0));
                    if !composed_bisim.contains(l, r) {
                        congruence_failures.push((eps.clone(), s1, s2, s));
                    }
                }
            }
        }
    }
    Ok(NonExpansivenessReport { holds: composed <= components, components, composed, congruence_failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::find_isomorphism;
    use crate::fixtures::{self, state};
    use crate::r;

    fn single(name: &str) -> ProbAutomaton {
        let mut b = ProbAutomaton::builder();
        b.state(name);
        b.initial(name);
        b.build()
    }

    fn target(operand: usize, state: &str, prob: Rational) -> ChoiceTarget {
        ChoiceTarget { operand, state: state.to_string(), prob }
    }

    #[test]
    fn choice_over_two_points() {
        let (p, q) = (single("p"), single("q"));
        let spec = ChoiceSpec {
            root: "r".into(),
            branches: vec![
                ChoiceBranch { action: "a".into(), polarity: Polarity::None, to: vec![target(0, "p", r!(1))] },
                ChoiceBranch { action: "b".into(), polarity: Polarity::None, to: vec![target(1, "q", r!(1))] },
            ],
        };
        let pa = nondet_choice(&spec, &[&p, &q]).unwrap();
        assert_eq!(pa.num_states(), 3);
        assert_eq!(pa.transitions().len(), 2);
        assert!(pa.validate().is_empty());
        assert_eq!(pa.initial(), Some(StateId(0)));
    }

    #[test]
    fn empty_choice() {
        let spec = ChoiceSpec { root: "r".into(), branches: vec![] };
        let pa = nondet_choice(&spec, &[]).unwrap();
        assert_eq!(pa.num_states(), 1);
        assert!(pa.transitions().is_empty());
    }

    #[test]
    fn choice_rejects_non_roots() {
        let mut b = ProbAutomaton::builder();
        b.transition("p", "a", &[("p2", r!(1))]).initial("p");
        let p = b.build();
        let spec = ChoiceSpec {
            root: "r".into(),
            branches: vec![ChoiceBranch { action: "a".into(), polarity: Polarity::None, to: vec![target(0, "p2", r!(1))] }],
        };
        assert!(matches!(nondet_choice(&spec, &[&p]), Err(Error::ChoiceTargetNotRoot { operand: 0, .. })));
        let spec = ChoiceSpec {
            root: "r".into(),
            branches: vec![ChoiceBranch { action: "a".into(), polarity: Polarity::None, to: vec![target(3, "p", r!(1))] }],
        };
        assert!(nondet_choice(&spec, &[&p]).is_err());
    }

    #[test]
    fn choice_rebuilds_a_fig1_fragment() {
        // s with its a-move to {s1, s2, x} and its b-move to s0, over four leaves.
        let leaves: Vec<ProbAutomaton> = ["s1", "s2", "x", "s0"].iter().map(|n| single(n)).collect();
        let refs: Vec<&ProbAutomaton> = leaves.iter().collect();
        let spec = ChoiceSpec {
            root: "s".into(),
            branches: vec![
                ChoiceBranch {
                    action: "a".into(),
                    polarity: Polarity::None,
                    to: vec![target(0, "s1", r!(1, 8)), target(1, "s2", r!(3, 8)), target(2, "x", r!(1, 2))],
                },
                ChoiceBranch { action: "b".into(), polarity: Polarity::None, to: vec![target(3, "s0", r!(1, 2))] },
            ],
        };
        let built = nondet_choice(&spec, &refs).unwrap();
        let mut b = ProbAutomaton::builder();
        b.states(["s0", "s", "x", "s1", "s2"]);
        b.transition("s", "a", &[("s1", r!(1, 8)), ("s2", r!(3, 8)), ("x", r!(4, 8))])
            .transition("s", "b", &[("s0", r!(1, 2))]);
        let fragment = b.build();
        let iso = find_isomorphism(&built, &fragment).expect("isomorphic");
        assert_eq!(fragment.state_name(iso[0]), "s");
    }

    fn sender() -> ProbAutomaton {
        let mut b = ProbAutomaton::builder();
        b.action(Action::output("m"));
        b.transition("idle", "m", &[("sent", r!(3, 4))]).initial("idle");
        b.build()
    }

    fn receiver() -> ProbAutomaton {
        let mut b = ProbAutomaton::builder();
        b.action(Action::input("m"));
        b.transition("wait", "m", &[("got", r!(1, 2)), ("lost", r!(1, 2))]).initial("wait");
        b.build()
    }

    #[test]
    fn output_meets_input() {
        let pa = parallel(&sender(), &receiver()).unwrap();
        assert_eq!(pa.num_states(), 6);
        assert_eq!(pa.actions(), &[Action::output("m")]);
        assert_eq!(pa.transitions().len(), 1);
        let t = &pa.transitions()[0];
        assert_eq!(pa.state_name(t.source), "(idle,wait)");
        let got = pa.state_by_name("(sent,got)").unwrap();
        assert_eq!(t.target.prob(got), r!(3, 8));
        assert_eq!(*t.target.mass(), r!(3, 4));
        assert!(pa.validate().is_empty());
        assert_eq!(pa.initial(), pa.state_by_name("(idle,wait)"));
    }

    #[test]
    fn inputs_synchronise_outputs_block() {
        let mut b = ProbAutomaton::builder();
        b.action(Action::input("m"));
        b.transition("x", "m", &[("y", r!(1))]).initial("x");
        let listener = b.build();
        let both_in = parallel(&receiver(), &listener).unwrap();
        assert_eq!(both_in.transitions().len(), 1);
        assert_eq!(both_in.actions()[0].polarity, Polarity::Input);
        let both_out = parallel(&sender(), &sender()).unwrap();
        assert!(both_out.transitions().is_empty());
    }

    #[test]
    fn shared_plain_action_needs_polarity() {
        let loop_pa = fixtures::one_state_loop();
        assert!(matches!(parallel(&loop_pa, &loop_pa), Err(Error::MissingPolarity(a)) if a == "a"));
    }

    #[test]
    fn unit_context_gives_isomorphic_copy() {
        let pa = fixtures::fig1().with_initial(Some(StateId(0)));
        let unit = single("o");
        let composed = parallel(&pa, &unit).unwrap();
        let iso: Vec<StateId> = pa.states().collect();
        assert!(crate::automaton::isomorphic_under(&pa, &composed, &iso));
    }

    #[test]
    fn asynchronous_moves_keep_the_other_side() {
        let loop_pa = fixtures::one_state_loop();
        let composed = parallel(&loop_pa, &sender()).unwrap();
        // a at both pairs, m only from idle
        assert_eq!(composed.transitions().len(), 3);
        let p_idle = composed.state_by_name("(p,idle)").unwrap();
        let a = composed.action_index("a").unwrap();
        assert_eq!(composed.successors(p_idle, a).next().unwrap(), &SubDistribution::dirac(p_idle));
    }

    #[test]
    fn pruning_keeps_reachable_pairs() {
        let pruned = parallel_pruned(&sender(), &receiver()).unwrap();
        assert_eq!(pruned.num_states(), 3);
    }

    #[test]
    fn fig3_with_a_listener() {
        let eps = r!(1, 4);
        let left = fixtures::fig3_left(&eps);
        let s = left.clone().with_initial(Some(state(&left, "s")));
        let t = left.clone().with_initial(Some(state(&left, "t")));
        // a passive listener on a fresh input symbol
        let mut b = ProbAutomaton::builder();
        b.action(Action::input("z"));
        b.transition("l0", "z", &[("l1", r!(1))]).initial("l0");
        let ctx = b.build();
        let report = nonexpansiveness_check(&s, &t, &ctx, &[r!(0), r!(1, 4)]).unwrap();
        assert_eq!(report.components, r!(1, 4));
        assert!(report.holds && report.composed <= r!(1, 4));
        assert!(report.congruence_failures.is_empty());
    }

    #[test]
    fn identical_operands_are_at_distance_zero() {
        let pa = receiver();
        let report = nonexpansiveness_check(&pa, &pa, &sender(), &[r!(0)]).unwrap();
        assert!(report.components.is_zero() && report.composed.is_zero());
    }

    #[test]
    fn choice_spec_json() {
        let text = r#"{"root":"r","branches":[{"action":"a","to":[{"operand":0,"state":"p","prob":"1/2"}]}]}"#;
        let spec: ChoiceSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.branches[0].to[0].prob, r!(1, 2));
        assert_eq!(spec.branches[0].polarity, Polarity::None);
    }
}
