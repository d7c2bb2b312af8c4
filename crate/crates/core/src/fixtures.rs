//! Small hand-built automata used throughout the tests and documentation.
//! The same automata are shipped as JSON under `fixtures/` at the workspace
//! root.

use crate::automaton::{ProbAutomaton, StateId};
use crate::r;
use crate::rational::Rational;
use crate::relation::Relation;

/// Two-way 1/8-similar but not 1/8-bisimilar states `s` and `t`.
///
/// `s` and `t` each have an `a`-self-loop, a second `a`-transition to a
/// three-way split, and a `b`-transition with mass 1/2 (resp. 5/8).
pub fn fig1() -> ProbAutomaton {
    let mut b = ProbAutomaton::builder();
    b.states(["s", "t", "s0", "s1", "s2", "s3", "x", "y", "t0", "t1", "t2", "t3"]);
    b.transition("s", "a", &[("s", r!(1))])
        .transition("s", "a", &[("s1", r!(1, 8)), ("s2", r!(3, 8)), ("x", r!(4, 8))])
        .transition("s", "b", &[("s0", r!(1, 2))])
        .transition("t", "a", &[("t", r!(1))])
        .transition("t", "a", &[("x", r!(2, 8)), ("t2", r!(4, 8)), ("t1", r!(2, 8))])
        .transition("t", "b", &[("t0", r!(5, 8))])
        .transition("s2", "b", &[("s3", r!(1))])
        .transition("x", "b", &[("y", r!(1))])
        .transition("t2", "b", &[("t3", r!(1))])
        .transition("s3", "c", &[("y", r!(1))])
        .transition("t3", "c", &[("y", r!(1))]);
    b.build()
}

/// [`fig1`] together with the relation witnessing `s` 1/8-simulated by `t`:
/// `{(s,t), (x,x), (x,t2), (y,y), (y,t3)} ∪ {(si,ti)}`.
pub fn fig1_with_witness() -> (ProbAutomaton, Relation) {
    let pa = fig1();
    let id = |n: &str| pa.state_by_name(n).unwrap();
    let pairs = [
        ("s", "t"),
        ("x", "x"),
        ("x", "t2"),
        ("y", "y"),
        ("y", "t3"),
        ("s0", "t0"),
        ("s1", "t1"),
        ("s2", "t2"),
        ("s3", "t3"),
    ];
    let n = pa.num_states();
    let rel = Relation::from_pairs(n, n, pairs.iter().map(|(a, b)| (id(a), id(b))));
    (pa, rel)
}

/// `s` is a-priori simulated by `t` but not simulated: `s` has one
/// `a`-distribution `(1/3, 1/4, 5/12)` over `s1..s3`, `t` has three that each
/// match `mu` on one event and on one pair of events but none matches all.
pub fn prio_not_post() -> ProbAutomaton {
    let mut b = ProbAutomaton::builder();
    b.states(["s", "s1", "s2", "s3", "s4", "s5", "s6", "t", "t1", "t2", "t3", "t4", "t5", "t6"]);
    b.transition("s", "a", &[("s1", r!(1, 3)), ("s2", r!(1, 4)), ("s3", r!(5, 12))])
        .transition("t", "a", &[("t1", r!(7, 24)), ("t2", r!(7, 24)), ("t3", r!(5, 12))])
        .transition("t", "a", &[("t1", r!(3, 8)), ("t2", r!(1, 4)), ("t3", r!(3, 8))])
        .transition("t", "a", &[("t1", r!(1, 3)), ("t2", r!(1, 3)), ("t3", r!(1, 3))]);
    for i in 1..=3 {
        let action = format!("b{i}");
        for side in ["s", "t"] {
            let from = format!("{side}{i}");
            let to = format!("{side}{}", i + 3);
            b.transition(&from, &action, &[(to.as_str(), r!(1))]);
        }
    }
    b.build()
}

/// Left pair of the metric-comparison example: `s` and `t` differ only in
/// the mass of the `b`-step after the `eps`-branch.
pub fn fig3_left(eps: &Rational) -> ProbAutomaton {
    let one_minus = Rational::one() - eps;
    let mut b = ProbAutomaton::builder();
    b.states(["s", "s1", "s2", "s3", "t", "t1", "t2", "t3"]);
    b.transition("s", "a", &[("s1", one_minus.clone()), ("s2", eps.clone())])
        .transition("s2", "b", &[("s3", one_minus.clone())])
        .transition("t", "a", &[("t1", one_minus), ("t2", eps.clone())])
        .transition("t2", "b", &[("t3", r!(1))]);
    b.build()
}

/// Right pair of the metric-comparison example (`u` and `v`).
pub fn fig3_right(eps: &Rational) -> ProbAutomaton {
    let one_minus = Rational::one() - eps;
    let mut b = ProbAutomaton::builder();
    b.states(["u", "u1", "u3", "v", "v1", "v2", "v3"]);
    b.transition("u", "a", &[("u1", r!(1))])
        .transition("u1", "b", &[("u3", r!(1, 2))])
        .transition("v", "a", &[("v1", eps.clone()), ("v2", one_minus)])
        .transition("v2", "b", &[("v3", r!(1, 2) - eps)]);
    b.build()
}

/// One state with an `a`-self-loop of mass 1.
pub fn one_state_loop() -> ProbAutomaton {
    let mut b = ProbAutomaton::builder();
    b.transition("p", "a", &[("p", r!(1))]).initial("p");
    b.build()
}

/// Two `a`-chains of length `depth` ending in states that differ: the first
/// ends in a state with a `b`-step, the second in a deadlock. The heads are
/// `l0` and `r0`; `lk`/`rk` is at distance `depth - k` from the difference.
pub fn two_chains(depth: usize) -> ProbAutomaton {
    let mut b = ProbAutomaton::builder();
    for side in ["l", "r"] {
        for k in 0..=depth {
            b.state(&format!("{side}{k}"));
        }
    }
    b.state("end");
    for side in ["l", "r"] {
        for k in 0..depth {
            let from = format!("{side}{k}");
            let to = format!("{side}{}", k + 1);
            b.transition(&from, "a", &[(to.as_str(), r!(1))]);
        }
    }
    let last = format!("l{depth}");
    b.transition(&last, "b", &[("end", r!(1))]);
    b.build()
}

pub fn state(pa: &ProbAutomaton, name: &str) -> StateId {
    pa.state_by_name(name).unwrap_or_else(|| panic!("no state named {name}"))
}
