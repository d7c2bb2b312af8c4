//! Relaxed simulation, bisimulation and behavioural pseudo-metrics for finite
//! probabilistic automata, computed with exact rational arithmetic.

pub mod rational;

pub mod algebra;
pub mod automaton;
pub mod bench;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod lifting;
pub mod logic;
pub mod maxflow;
pub mod metrics;
pub mod random;
pub mod relation;
pub mod simulation;

pub use automaton::{disjoint_union, Action, Polarity, ProbAutomaton, StateId, SubDistribution, Transition, Union, Violation};
pub use error::{Error, Result};
pub use rational::Rational;
pub use relation::Relation;
