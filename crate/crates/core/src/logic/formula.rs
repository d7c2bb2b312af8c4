use std::fmt;

use crate::rational::Rational;

/// Formulas of the four modal logics. `Diamond` is the simple modality
/// `<a δ> φ`; `DiamondSet` is `<a>{(φ1,p1),...}`, which commits to a single
/// transition for all branches. Thresholds are unrestricted rationals so that
/// relaxed formulas (thresholds below 0 or above 1) are representable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Top,
    Neg(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Diamond { action: String, threshold: Rational, body: Box<Formula> },
    DiamondSet { action: String, branches: Vec<(Formula, Rational)> },
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn diamond(action: impl Into<String>, threshold: Rational, body: Formula) -> Formula {
        Formula::Diamond { action: action.into(), threshold, body: Box::new(body) }
    }

    pub fn diamond_set(action: impl Into<String>, branches: Vec<(Formula, Rational)>) -> Formula {
        Formula::DiamondSet { action: action.into(), branches }
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }

    /// Maximal nesting of modal operators.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::Neg(f) => f.depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Diamond { body, .. } => 1 + body.depth(),
            Formula::DiamondSet { branches, .. } => 1 + branches.iter().map(|(f, _)| f.depth()).max().unwrap_or(0),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top => 1,
            Formula::Neg(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Diamond { body, .. } => 1 + body.size(),
            Formula::DiamondSet { branches, .. } => 1 + branches.iter().map(|(f, _)| f.size()).sum::<usize>(),
        }
    }

    pub fn has_negation(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Neg(_) => true,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_negation),
            Formula::Diamond { body, .. } => body.has_negation(),
            Formula::DiamondSet { branches, .. } => branches.iter().any(|(f, _)| f.has_negation()),
        }
    }

    pub fn has_set_diamond(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Neg(f) => f.has_set_diamond(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_set_diamond),
            Formula::Diamond { body, .. } => body.has_set_diamond(),
            Formula::DiamondSet { .. } => true,
        }
    }

    /// Rewrites every simple diamond `<a δ> φ` as `<a>{(φ, δ)}`.
    pub fn to_set_form(&self) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Neg(f) => Formula::neg(f.to_set_form()),
            Formula::And(fs) => Formula::And(fs.iter().map(Formula::to_set_form).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(Formula::to_set_form).collect()),
            Formula::Diamond { action, threshold, body } => {
                Formula::diamond_set(action.clone(), vec![(body.to_set_form(), threshold.clone())])
            }
            Formula::DiamondSet { action, branches } => Formula::diamond_set(
                action.clone(),
                branches.iter().map(|(f, p)| (f.to_set_form(), p.clone())).collect(),
            ),
        }
    }
}

/// `φ_ε`: the formula whose exact semantics equals the ε-relaxed semantics of
/// `φ`. Thresholds drop by `ε`; the sign of `ε` flips under negation.
pub fn relax_formula(phi: &Formula, eps: &Rational) -> Formula {
    match phi {
        Formula::Top => Formula::Top,
        Formula::Neg(f) => Formula::neg(relax_formula(f, &-eps)),
        Formula::And(fs) => Formula::And(fs.iter().map(|f| relax_formula(f, eps)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|f| relax_formula(f, eps)).collect()),
        Formula::Diamond { action, threshold, body } => {
            Formula::diamond(action.clone(), threshold - eps, relax_formula(body, eps))
        }
        Formula::DiamondSet { action, branches } => Formula::diamond_set(
            action.clone(),
            branches.iter().map(|(f, p)| (relax_formula(f, eps), p - eps)).collect(),
        ),
    }
}

// Precedence levels used for printing: Or < And < prefix/atoms.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Or(fs) if fs.len() > 1 => 0,
        Formula::And(fs) if fs.len() > 1 => 1,
        _ => 2,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, phi: &Formula, min_level: u8) -> fmt::Result {
    if level(phi) < min_level {
        write!(f, "({phi})")
    } else {
        write!(f, "{phi}")
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, parts: &[Formula], sep: &str, min_level: u8) -> fmt::Result {
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write_at(f, p, min_level)?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::Neg(g) => {
                f.write_str("!")?;
                write_at(f, g, 2)
            }
            // Empty and singleton connectives have no infix form of their own.
            Formula::And(fs) if fs.is_empty() => f.write_str("(T)"),
            Formula::Or(fs) if fs.is_empty() => f.write_str("!T"),
            Formula::And(fs) | Formula::Or(fs) if fs.len() == 1 => write!(f, "({})", fs[0]),
            Formula::And(fs) => write_joined(f, fs, " & ", 2),
            Formula::Or(fs) => write_joined(f, fs, " | ", 1),
            Formula::Diamond { action, threshold, body } => {
                write!(f, "<{action} {threshold}> ")?;
                write_at(f, body, 2)
            }
            Formula::DiamondSet { action, branches } => {
                write!(f, "<{action}>{{")?;
                for (i, (g, p)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({g}, {p})")?;
                }
                f.write_str("}")
            }
        }
    }
}
