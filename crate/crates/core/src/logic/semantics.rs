//! Model checking under the relaxed semantics `⊨_ε` and the decayed
//! semantics `⊨^λ_ε`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::automaton::{ProbAutomaton, StateId};
use crate::error::{Error, Result};
use crate::rational::Rational;

use super::formula::Formula;

/// A map `λ : [0;1] → [0;1]` applied to the slack when descending through a
/// modality. Negative arguments (reached under negation) use the odd
/// extension `λ(-x) = -λ(x)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DecayFunction {
    Identity,
    /// `λ(x) = min(x + δ, 1)`.
    LinearSaturating(Rational),
    /// `λ(x) = 1 - c·(1 - x)`.
    ExponentialDiscount(Rational),
    /// Step function: `λ(x)` is the value at the largest grid point `≤ x`
    /// (points sorted by abscissa; below the first point, `x` itself).
    Table(Vec<(Rational, Rational)>),
    Constant(Rational),
}

impl DecayFunction {
    pub fn apply(&self, x: &Rational) -> Rational {
        if x.is_negative() {
            return -self.apply(&-x);
        }
        match self {
            DecayFunction::Identity => x.clone(),
            DecayFunction::LinearSaturating(delta) => (x + delta).min(Rational::one()),
            DecayFunction::ExponentialDiscount(c) => Rational::one() - c * &(Rational::one() - x),
            DecayFunction::Table(points) => {
                points.iter().rev().find(|(px, _)| px <= x).map(|(_, y)| y.clone()).unwrap_or_else(|| x.clone())
            }
            DecayFunction::Constant(c) => c.clone(),
        }
    }

    /// `λ^n(x)`.
    pub fn iterate(&self, x: &Rational, n: usize) -> Rational {
        (0..n).fold(x.clone(), |acc, _| self.apply(&acc))
    }

    /// Checks that the function maps the unit interval into itself (on the
    /// table points, and for the parameters of the closed forms).
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DecayFunction::Identity => true,
            DecayFunction::LinearSaturating(d) => d.is_unit_interval(),
            DecayFunction::ExponentialDiscount(c) => c.is_unit_interval(),
            DecayFunction::Table(points) => {
                points.windows(2).all(|w| w[0].0 < w[1].0)
                    && points.iter().all(|(x, y)| x.is_unit_interval() && y.is_unit_interval())
            }
            DecayFunction::Constant(c) => c.is_unit_interval(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(format!("decay function {self} does not map [0;1] into [0;1]")))
        }
    }
}

impl fmt::Display for DecayFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayFunction::Identity => f.write_str("id"),
            DecayFunction::LinearSaturating(d) => write!(f, "linear:{d}"),
            DecayFunction::ExponentialDiscount(c) => write!(f, "exp:{c}"),
            DecayFunction::Constant(c) => write!(f, "const:{c}"),
            DecayFunction::Table(points) => {
                f.write_str("table:")?;
                for (i, (x, y)) in points.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}={y}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `id`, `linear:δ`, `exp:c`, `const:c` or `table:x1=y1,x2=y2,...`.
impl FromStr for DecayFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |t: &str| t.trim().parse::<Rational>();
        let decay = match kind.trim() {
            "id" | "identity" => DecayFunction::Identity,
            "linear" => DecayFunction::LinearSaturating(num(arg)?),
            "exp" => DecayFunction::ExponentialDiscount(num(arg)?),
            "const" => DecayFunction::Constant(num(arg)?),
            "table" => {
                let mut points = Vec::new();
                for item in arg.split(',').filter(|i| !i.trim().is_empty()) {
                    let (x, y) = item
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("table entry `{item}` is not of the form x=y")))?;
                    points.push((num(x)?, num(y)?));
                }
                DecayFunction::Table(points)
            }
            other => return Err(Error::Parse(format!("unknown decay function `{other}` (expected id, linear:δ, exp:c, const:c or table:...)"))),
        };
        decay.validate()?;
        Ok(decay)
    }
}

/// Satisfaction-set evaluator. Sets are memoised per (subformula node, ε):
/// the decayed semantics can reach one node at several slacks.
pub struct Checker<'a> {
    pa: &'a ProbAutomaton,
    decay: Option<&'a DecayFunction>,
    memo: HashMap<(*const Formula, Rational), Vec<bool>>,
}

impl<'a> Checker<'a> {
    pub fn new(pa: &'a ProbAutomaton) -> Self {
        Checker { pa, decay: None, memo: HashMap::new() }
    }

    pub fn decayed(pa: &'a ProbAutomaton, decay: &'a DecayFunction) -> Self {
        Checker { pa, decay: Some(decay), memo: HashMap::new() }
    }

    /// `⟦φ⟧_ε` as a mask over the states.
    pub fn sat_set(&mut self, phi: &Formula, eps: &Rational) -> Vec<bool> {
        let key = (phi as *const Formula, eps.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let n = self.pa.num_states();
        let child_eps = match self.decay {
            Some(l) => l.apply(eps),
            None => eps.clone(),
        };
        let set = match phi {
            Formula::Top => vec![true; n],
            Formula::Neg(f) => self.sat_set(f, &-eps).into_iter().map(|b| !b).collect(),
            Formula::And(fs) => {
                let mut acc = vec![true; n];
                for f in fs {
                    for (a, b) in acc.iter_mut().zip(self.sat_set(f, eps)) {
                        *a &= b;
                    }
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = vec![false; n];
                for f in fs {
                    for (a, b) in acc.iter_mut().zip(self.sat_set(f, eps)) {
                        *a |= b;
                    }
                }
                acc
            }
            Formula::Diamond { action, threshold, body } => {
                let inner = self.sat_set(body, &child_eps);
                let need = threshold - eps;
                self.modal(action, |mu| mu.mass_of(&inner) >= need)
            }
            Formula::DiamondSet { action, branches } => {
                let inner: Vec<(Vec<bool>, Rational)> =
                    branches.iter().map(|(f, p)| (self.sat_set(f, &child_eps), p - eps)).collect();
                self.modal(action, |mu| inner.iter().all(|(set, need)| mu.mass_of(set) >= *need))
            }
        };
        self.memo.insert(key, set.clone());
        set
    }

    fn modal(&self, action: &str, mut ok: impl FnMut(&crate::automaton::SubDistribution) -> bool) -> Vec<bool> {
        let n = self.pa.num_states();
        let Some(a) = self.pa.action_index(action) else {
            return vec![false; n];
        };
        (0..n).map(|s| self.pa.successors(StateId(s), a).any(&mut ok)).collect()
    }
}

/// `⟦φ⟧_ε` over all states.
pub fn sat_set(pa: &ProbAutomaton, phi: &Formula, eps: &Rational) -> Vec<bool> {
    Checker::new(pa).sat_set(phi, eps)
}

/// `s ⊨_ε φ`. Negation evaluates its operand at `-ε`, so `ε` may be negative.
pub fn satisfies(pa: &ProbAutomaton, s: StateId, phi: &Formula, eps: &Rational) -> bool {
    sat_set(pa, phi, eps)[s.0]
}

/// `s ⊨^λ_ε φ`: as [`satisfies`], but the operands of a modality are
/// evaluated at `λ(ε)`.
pub fn satisfies_decayed(pa: &ProbAutomaton, s: StateId, phi: &Formula, eps: &Rational, decay: &DecayFunction) -> bool {
    Checker::decayed(pa, decay).sat_set(phi, eps)[s.0]
}
