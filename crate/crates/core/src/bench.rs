//! The torus grid family: an `n × n` grid where every cell moves on `a` to its
//! four neighbours, with selected cells losing their move.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automaton::{disjoint_union, Action, ProbAutomaton, StateId, SubDistribution, Transition};
use crate::error::{Error, Result};
use crate::metrics::{distance_discounted, distance_exact};
use crate::r;
use crate::rational::Rational;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMetric {
    Exact,
    Discounted(usize),
}

impl fmt::Display for GridMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridMetric::Exact => f.write_str("exact"),
            GridMetric::Discounted(n) => write!(f, "discounted:{n}"),
        }
    }
}

impl FromStr for GridMetric {
    type Err = String;

    /// `exact`, `discounted` (N = 20) or `discounted:N`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "exact" => Ok(GridMetric::Exact),
            None if s == "discounted" => Ok(GridMetric::Discounted(20)),
            Some(("discounted", n)) => n.parse().map(GridMetric::Discounted).map_err(|e| format!("bad N `{n}`: {e}")),
            _ => Err(format!("unknown metric `{s}`")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub deletions: BTreeSet<(usize, usize)>,
    pub metric: GridMetric,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        GridSpec { n, deletions: BTreeSet::new(), metric: GridMetric::Exact }
    }

    pub fn delete(mut self, i: usize, j: usize) -> Self {
        self.deletions.insert((i, j));
        self
    }

    pub fn metric(mut self, metric: GridMetric) -> Self {
        self.metric = metric;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::NonPositive("n"));
        }
        if let Some(&(i, j)) = self.deletions.iter().find(|(i, j)| *i >= self.n || *j >= self.n) {
            return Err(Error::DeletionOutOfRange(i, j, self.n));
        }
        Ok(())
    }
}

/// Index of cell `(i, j)`.
pub fn cell(n: usize, i: usize, j: usize) -> StateId {
    StateId(i * n + j)
}

/// Torus distance between two cells.
pub fn ring(n: usize, (i, j): (usize, usize), (k, l): (usize, usize)) -> usize {
    let d = |x: usize, y: usize| {
        let d = x.abs_diff(y);
        d.min(n - d)
    };
    d(i, k) + d(j, l)
}

/// The grid of `spec` with cells named `(i,j)` and initial cell `(0,0)`.
pub fn build_grid(spec: &GridSpec) -> Result<ProbAutomaton> {
    spec.check()?;
    let n = spec.n;
    let mut names = Vec::with_capacity(n * n);
    let mut transitions = Vec::new();
    for i in 0..n {
        for j in 0..n {
            names.push(format!("({i},{j})"));
            if spec.deletions.contains(&(i, j)) {
                continue;
            }
            let (up, down) = ((i + n - 1) % n, (i + 1) % n);
            let (left, right) = ((j + n - 1) % n, (j + 1) % n);
            let target = SubDistribution::new([
                (cell(n, i, left), r!(1, 10)),
                (cell(n, i, right), r!(1, 2)),
                (cell(n, up, j), r!(1, 4)),
                (cell(n, down, j), r!(3, 20)),
            ])?;
            transitions.push(Transition { source: cell(n, i, j), action: "a".into(), target });
        }
    }
    Ok(ProbAutomaton::new(names, vec![Action::plain("a")], transitions, Some(cell(n, 0, 0))))
}

pub fn basic_grid(n: usize) -> Result<ProbAutomaton> {
    build_grid(&GridSpec::new(n))
}

/// Entry `(i, j)` is the distance between cell `(i, j)` of the variant and the
/// same cell of the basic grid.
pub fn heatmap(spec: &GridSpec) -> Result<Vec<Vec<Rational>>> {
    let variant = build_grid(spec)?;
    let basic = basic_grid(spec.n)?;
    let union = disjoint_union(&[&variant, &basic])?;
    let d = match spec.metric {
        GridMetric::Exact => distance_exact(&union.automaton)?,
        GridMetric::Discounted(big_n) => distance_discounted(&union.automaton, big_n)?,
    };
    let n = spec.n;
    Ok((0..n)
        .map(|i| (0..n).map(|j| d.get(union.embed(0, cell(n, i, j)), union.embed(1, cell(n, i, j))).clone()).collect())
        .collect())
}

/// `n` lines of comma-separated decimals.
pub fn heatmap_csv(map: &[Vec<Rational>], digits: usize) -> String {
    map.iter()
        .map(|row| row.iter().map(|x| x.to_decimal(digits)).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}
