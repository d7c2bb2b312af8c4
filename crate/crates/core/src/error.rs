use thiserror::Error;

use crate::automaton::Violation;
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("formula syntax error at offset {offset}: {message}")]
    FormulaSyntax { offset: usize, message: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("invalid automaton: {}", render_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("negative probability {value} for state `{state}`")]
    NegativeProbability { state: String, value: Rational },

    #[error("size cap exceeded: {what} is {actual}, limit {limit}")]
    SizeCap {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("epsilon {0} outside [0;1]")]
    EpsilonOutOfRange(Rational),

    #[error("conflicting polarity for action `{0}`")]
    PolarityConflict(String),

    #[error("action `{0}` has no input/output polarity")]
    MissingPolarity(String),

    #[error("automaton has no initial state")]
    MissingInitial,

    #[error("choice distribution refers to `{state}` which is not the initial state of operand {operand}")]
    ChoiceTargetNotRoot { operand: usize, state: String },

    #[error("deleted cell ({0},{1}) outside the {2}x{2} grid")]
    DeletionOutOfRange(usize, usize, usize),

    #[error("{0} must be at least 1")]
    NonPositive(&'static str),

    #[error("iteration cap {0} reached before the distance fixpoint")]
    IterationCap(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn render_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
