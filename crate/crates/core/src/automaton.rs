//! Probabilistic automata over exact rationals.
//!
//! A [`ProbAutomaton`] is a finite set of named states, a declared alphabet and a
//! set of transitions `s --a--> mu` where `mu` is a [`SubDistribution`]. The
//! automaton is a plain container: construction does not reject malformed
//! input, [`ProbAutomaton::validate`] reports every violation instead. The
//! algorithms in this crate assume a valid automaton.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Dense state index within one automaton.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    None,
    #[serde(rename = "in")]
    Input,
    #[serde(rename = "out")]
    Output,
}

/// A declared action: a base symbol plus an optional input/output tag.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    #[serde(default)]
    pub polarity: Polarity,
}

impl Action {
    pub fn plain(name: impl Into<String>) -> Self {
        Action { name: name.into(), polarity: Polarity::None }
    }

    pub fn input(name: impl Into<String>) -> Self {
        Action { name: name.into(), polarity: Polarity::Input }
    }

    pub fn output(name: impl Into<String>) -> Self {
        Action { name: name.into(), polarity: Polarity::Output }
    }

    /// `a`, `a?` or `a!`.
    pub fn label(&self) -> String {
        match self.polarity {
            Polarity::None => self.name.clone(),
            Polarity::Input => format!("{}?", self.name),
            Polarity::Output => format!("{}!", self.name),
        }
    }
}

/// Finite sub-probability distribution: strictly positive entries sorted by
/// state, plus the cached total mass.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubDistribution {
    entries: Vec<(StateId, Rational)>,
    mass: Rational,
}

impl SubDistribution {
    /// Builds a sub-distribution. Repeated states are summed and zero entries
    /// dropped. Negative entries are rejected; the `mass <= 1` bound is checked
    /// by automaton validation, not here.
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        let mut acc: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, p) in entries {
            if p.is_negative() {
                return Err(Error::NegativeProbability { state: s.to_string(), value: p });
            }
            *acc.entry(s).or_default() += p;
        }
        let entries: Vec<_> = acc.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let mass = entries.iter().map(|(_, p)| p).sum();
        Ok(SubDistribution { entries, mass })
    }

    pub fn empty() -> Self {
        SubDistribution { entries: Vec::new(), mass: Rational::zero() }
    }

    pub fn dirac(s: StateId) -> Self {
        SubDistribution { entries: vec![(s, Rational::one())], mass: Rational::one() }
    }

    /// Total mass `mu(S)`.
    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn prob(&self, s: StateId) -> Rational {
        match self.entries.binary_search_by_key(&s, |(t, _)| *t) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// `mu(E)` for `E` given as a membership mask over state indices.
    pub fn mass_of(&self, set: &[bool]) -> Rational {
        self.entries
            .iter()
            .filter(|(s, _)| set.get(s.0).copied().unwrap_or(false))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn mass_where(&self, mut pred: impl FnMut(StateId) -> bool) -> Rational {
        self.entries.iter().filter(|(s, _)| pred(*s)).map(|(_, p)| p).sum()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (StateId, &Rational)> + '_ {
        self.entries.iter().map(|(s, p)| (*s, p))
    }

    pub fn support(&self) -> impl ExactSizeIterator<Item = StateId> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Renames states; used when re-indexing into a larger automaton.
    pub fn map_states(&self, mut f: impl FnMut(StateId) -> StateId) -> Self {
        SubDistribution::new(self.entries.iter().map(|(s, p)| (f(*s), p.clone())))
            .expect("entries already non-negative")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Transition {
    pub source: StateId,
    /// Base symbol of the action; polarity lives in the declared alphabet.
    pub action: String,
    pub target: SubDistribution,
}

/// One broken invariant found by [`ProbAutomaton::validate`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    MassExceeded { transition: usize, mass: Rational },
    StateOutOfRange { transition: usize, state: usize },
    UndeclaredAction { transition: usize, action: String },
    DuplicateTransition { transition: usize },
    DuplicateAction { name: String },
    DuplicateStateName { name: String },
    InitialOutOfRange { state: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MassExceeded { transition, mass } => write!(
                f,
                "mass bound: transition {transition} has total probability {mass} > 1"
            ),
            Violation::StateOutOfRange { transition, state } => write!(
                f,
                "state range: transition {transition} refers to state index {state}"
            ),
            Violation::UndeclaredAction { transition, action } => write!(
                f,
                "alphabet closure: transition {transition} uses undeclared action `{action}`"
            ),
            Violation::DuplicateTransition { transition } => write!(
                f,
                "duplicate transition: transition {transition} repeats an earlier (source, action, target)"
            ),
            Violation::DuplicateAction { name } => {
                write!(f, "alphabet: action `{name}` declared more than once")
            }
            Violation::DuplicateStateName { name } => {
                write!(f, "state names: `{name}` used more than once")
            }
            Violation::InitialOutOfRange { state } => {
                write!(f, "state range: initial state index {state} does not exist")
            }
        }
    }
}

/// Finite probabilistic automaton `(S, Act, D)` with an optional initial state.
#[derive(Clone, Debug)]
pub struct ProbAutomaton {
    state_names: Vec<String>,
    actions: Vec<Action>,
    transitions: Vec<Transition>,
    initial: Option<StateId>,
    // outgoing[s][a] = indices into `transitions`
    outgoing: Vec<Vec<Vec<usize>>>,
    action_index: HashMap<String, usize>,
}

impl ProbAutomaton {
    pub fn new(
        state_names: Vec<String>,
        actions: Vec<Action>,
        transitions: Vec<Transition>,
        initial: Option<StateId>,
    ) -> Self {
        let mut action_index = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            action_index.entry(a.name.clone()).or_insert(i);
        }
        let n = state_names.len();
        let mut outgoing = vec![vec![Vec::new(); actions.len()]; n];
        for (i, t) in transitions.iter().enumerate() {
            if t.source.0 >= n || t.target.support().any(|s| s.0 >= n) {
                continue;
            }
            if let Some(&a) = action_index.get(&t.action) {
                outgoing[t.source.0][a].push(i);
            }
        }
        ProbAutomaton { state_names, actions, transitions, initial, outgoing, action_index }
    }

    pub fn empty() -> Self {
        ProbAutomaton::new(Vec::new(), Vec::new(), Vec::new(), None)
    }

    pub fn builder() -> Builder {
        Builder::default()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = StateId> {
        (0..self.state_names.len()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn require_state(&self, name: &str) -> Result<StateId> {
        self.state_by_name(name).ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_index.get(name).copied()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn with_initial(mut self, initial: Option<StateId>) -> Self {
        self.initial = initial;
        self
    }

    /// Targets of the `action`-transitions leaving `s` (by action index).
    pub fn successors(&self, s: StateId, action: usize) -> impl ExactSizeIterator<Item = &SubDistribution> + '_ {
        self.outgoing[s.0][action].iter().map(move |&i| &self.transitions[i].target)
    }

    /// Indices into [`ProbAutomaton::transitions`] of the `action`-transitions
    /// leaving `s`.
    pub fn outgoing_indices(&self, s: StateId, action: usize) -> &[usize] {
        &self.outgoing[s.0][action]
    }

    pub fn is_enabled(&self, s: StateId, action: usize) -> bool {
        !self.outgoing[s.0][action].is_empty()
    }

    /// Every broken invariant; empty for a well-formed automaton.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.num_states();

        let mut seen_names = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for name in &self.state_names {
            if !seen_names.insert(name) && reported.insert(name) {
                out.push(Violation::DuplicateStateName { name: name.clone() });
            }
        }
        let mut seen_actions = BTreeSet::new();
        for a in &self.actions {
            if !seen_actions.insert(&a.name) {
                out.push(Violation::DuplicateAction { name: a.name.clone() });
            }
        }
        if let Some(init) = self.initial {
            if init.0 >= n {
                out.push(Violation::InitialOutOfRange { state: init.0 });
            }
        }

        let mut seen = BTreeSet::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source.0 >= n {
                out.push(Violation::StateOutOfRange { transition: i, state: t.source.0 });
            }
            for s in t.target.support() {
                if s.0 >= n {
                    out.push(Violation::StateOutOfRange { transition: i, state: s.0 });
                }
            }
            if !self.action_index.contains_key(&t.action) {
                out.push(Violation::UndeclaredAction { transition: i, action: t.action.clone() });
            }
            if *t.target.mass() > Rational::one() {
                out.push(Violation::MassExceeded { transition: i, mass: t.target.mass().clone() });
            }
            let key = (t.source, &t.action, &t.target.entries);
            if !seen.insert(key) {
                out.push(Violation::DuplicateTransition { transition: i });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }

    /// At most one transition per (state, action).
    pub fn is_deterministic(&self) -> bool {
        self.outgoing.iter().all(|per_action| per_action.iter().all(|ts| ts.len() <= 1))
    }

    /// Largest number of transitions sharing a (state, action) pair.
    pub fn max_branching(&self) -> usize {
        self.outgoing
            .iter()
            .flat_map(|per_action| per_action.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Restriction to the states reachable from the initial state, keeping the
    /// original relative order. Returns `self` unchanged when no initial state.
    pub fn reachable_part(&self) -> ProbAutomaton {
        let Some(init) = self.initial else {
            return self.clone();
        };
        let n = self.num_states();
        let mut seen = vec![false; n];
        let mut stack = vec![init];
        seen[init.0] = true;
        while let Some(s) = stack.pop() {
            for per_action in &self.outgoing[s.0] {
                for &ti in per_action {
                    for u in self.transitions[ti].target.support() {
                        if !seen[u.0] {
                            seen[u.0] = true;
                            stack.push(u);
                        }
                    }
                }
            }
        }
        let mut remap = vec![None; n];
        let mut names = Vec::new();
        for s in 0..n {
            if seen[s] {
                remap[s] = Some(StateId(names.len()));
                names.push(self.state_names[s].clone());
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| seen[t.source.0])
            .map(|t| Transition {
                source: remap[t.source.0].unwrap(),
                action: t.action.clone(),
                target: t.target.map_states(|u| remap[u.0].unwrap()),
            })
            .collect();
        ProbAutomaton::new(names, self.actions.clone(), transitions, remap[init.0])
    }
}

/// Result of [`disjoint_union`]: the union and the index offset of each operand.
#[derive(Clone, Debug)]
pub struct Union {
    pub automaton: ProbAutomaton,
    pub offsets: Vec<usize>,
}

impl Union {
    /// Where state `s` of operand `component` lives in the union.
    pub fn embed(&self, component: usize, s: StateId) -> StateId {
        StateId(self.offsets[component] + s.0)
    }
}

/// Disjoint union of automata. State indices are shifted by the operand's
/// offset. State names that collide between operands are suffixed with
/// `@<operand index>`; unique names are kept. The union has no initial state.
pub fn disjoint_union(pas: &[&ProbAutomaton]) -> Result<Union> {
    let mut actions: Vec<Action> = Vec::new();
    for pa in pas {
        for a in pa.actions() {
            match actions.iter().find(|b| b.name == a.name) {
                Some(b) if b.polarity != a.polarity => {
                    return Err(Error::PolarityConflict(a.name.clone()))
                }
                Some(_) => {}
                None => actions.push(a.clone()),
            }
        }
    }

    let mut name_count: HashMap<&str, usize> = HashMap::new();
    for pa in pas {
        let mut local = BTreeSet::new();
        for name in pa.state_names() {
            if local.insert(name.as_str()) {
                *name_count.entry(name.as_str()).or_default() += 1;
            }
        }
    }

    let mut names = Vec::new();
    let mut transitions = Vec::new();
    let mut offsets = Vec::with_capacity(pas.len());
    for (k, pa) in pas.iter().enumerate() {
        let offset = names.len();
        offsets.push(offset);
        for name in pa.state_names() {
            if name_count[name.as_str()] > 1 {
                names.push(format!("{name}@{k}"));
            } else {
                names.push(name.clone());
            }
        }
        for t in pa.transitions() {
            transitions.push(Transition {
                source: StateId(t.source.0 + offset),
                action: t.action.clone(),
                target: t.target.map_states(|s| StateId(s.0 + offset)),
            });
        }
    }
    Ok(Union { automaton: ProbAutomaton::new(names, actions, transitions, None), offsets })
}

type TransitionKey = (usize, String, Vec<(usize, Rational)>);

fn transition_keys(pa: &ProbAutomaton, map: &[StateId]) -> Vec<TransitionKey> {
    let mut keys: Vec<_> = pa
        .transitions()
        .iter()
        .map(|t| {
            let mut entries: Vec<_> = t.target.iter().map(|(s, p)| (map[s.0].0, p.clone())).collect();
            entries.sort();
            (map[t.source.0].0, t.action.clone(), entries)
        })
        .collect();
    keys.sort();
    keys
}

fn alphabet(pa: &ProbAutomaton) -> BTreeSet<Action> {
    pa.actions().iter().cloned().collect()
}

/// True when `map` (state of `a` to state of `b`) is an isomorphism.
pub fn isomorphic_under(a: &ProbAutomaton, b: &ProbAutomaton, map: &[StateId]) -> bool {
    if a.num_states() != b.num_states() || map.len() != a.num_states() || alphabet(a) != alphabet(b) {
        return false;
    }
    let mut hit = vec![false; b.num_states()];
    for s in map {
        if s.0 >= hit.len() || std::mem::replace(&mut hit[s.0], true) {
            return false;
        }
    }
    let identity: Vec<_> = b.states().collect();
    transition_keys(a, map) == transition_keys(b, &identity)
}

/// Backtracking isomorphism search; intended for small automata (tests).
pub fn find_isomorphism(a: &ProbAutomaton, b: &ProbAutomaton) -> Option<Vec<StateId>> {
    let n = a.num_states();
    if n != b.num_states() || a.transitions().len() != b.transitions().len() || alphabet(a) != alphabet(b) {
        return None;
    }
    let signature = |pa: &ProbAutomaton, s: StateId| {
        let mut out: Vec<(String, usize, Vec<Rational>)> = pa
            .transitions()
            .iter()
            .filter(|t| t.source == s)
            .map(|t| {
                let mut ps: Vec<_> = t.target.iter().map(|(_, p)| p.clone()).collect();
                ps.sort();
                (t.action.clone(), t.target.support_len(), ps)
            })
            .collect();
        out.sort();
        out
    };
    let sig_a: Vec<_> = a.states().map(|s| signature(a, s)).collect();
    let sig_b: Vec<_> = b.states().map(|s| signature(b, s)).collect();

    fn go(
        i: usize,
        a: &ProbAutomaton,
        b: &ProbAutomaton,
        sig_a: &[Vec<(String, usize, Vec<Rational>)>],
        sig_b: &[Vec<(String, usize, Vec<Rational>)>],
        map: &mut Vec<StateId>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == sig_a.len() {
            return isomorphic_under(a, b, map);
        }
        for j in 0..sig_b.len() {
            if !used[j] && sig_a[i] == sig_b[j] {
                used[j] = true;
                map.push(StateId(j));
                if go(i + 1, a, b, sig_a, sig_b, map, used) {
                    return true;
                }
                map.pop();
                used[j] = false;
            }
        }
        false
    }

    let mut map = Vec::with_capacity(n);
    let mut used = vec![false; n];
    go(0, a, b, &sig_a, &sig_b, &mut map, &mut used).then_some(map)
}

/// Incremental construction by state name.
#[derive(Default, Clone, Debug)]
pub struct Builder {
    names: Vec<String>,
    actions: Vec<Action>,
    transitions: Vec<Transition>,
    initial: Option<StateId>,
}

impl Builder {
    /// Returns the id of `name`, creating the state if needed.
    pub fn state(&mut self, name: &str) -> StateId {
        match self.names.iter().position(|n| n == name) {
            Some(i) => StateId(i),
            None => {
                self.names.push(name.to_string());
                StateId(self.names.len() - 1)
            }
        }
    }

    pub fn states<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) -> &mut Self {
        for n in names {
            self.state(n);
        }
        self
    }

    pub fn action(&mut self, action: Action) -> &mut Self {
        if !self.actions.iter().any(|a| a.name == action.name) {
            self.actions.push(action);
        }
        self
    }

    /// Adds `from --action--> {to_i: p_i}`, declaring the action (without
    /// polarity) if it is new.
    pub fn transition(&mut self, from: &str, action: &str, to: &[(&str, Rational)]) -> &mut Self {
        let source = self.state(from);
        let entries: Vec<_> = to.iter().map(|(n, p)| (self.state(n), p.clone())).collect();
        self.action(Action::plain(action));
        self.transitions.push(Transition {
            source,
            action: action.to_string(),
            target: SubDistribution::new(entries).expect("builder probabilities must be non-negative"),
        });
        self
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        let s = self.state(name);
        self.initial = Some(s);
        self
    }

    pub fn build(&self) -> ProbAutomaton {
        ProbAutomaton::new(self.names.clone(), self.actions.clone(), self.transitions.clone(), self.initial)
    }
}
