use std::fmt;

use crate::automaton::StateId;

/// Finite binary relation between the states of a domain of size `rows` and a
/// codomain of size `cols`, stored as a dense bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Relation { rows, cols, bits: vec![false; rows * cols] }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Relation { rows, cols, bits: vec![true; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Relation::empty(n, n);
        for i in 0..n {
            r.insert(StateId(i), StateId(i));
        }
        r
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut r = Relation::empty(rows, cols);
        for (s, t) in pairs {
            r.insert(s, t);
        }
        r
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, s: StateId, t: StateId) -> bool {
        s.0 < self.rows && t.0 < self.cols && self.bits[s.0 * self.cols + t.0]
    }

    pub fn insert(&mut self, s: StateId, t: StateId) -> bool {
        assert!(s.0 < self.rows && t.0 < self.cols, "pair ({s}, {t}) out of range");
        !std::mem::replace(&mut self.bits[s.0 * self.cols + t.0], true)
    }

    pub fn remove(&mut self, s: StateId, t: StateId) -> bool {
        s.0 < self.rows && t.0 < self.cols && std::mem::replace(&mut self.bits[s.0 * self.cols + t.0], false)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        let cols = self.cols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (StateId(i / cols), StateId(i % cols)))
    }

    /// `R(X) = { y | exists x in X, x R y }`, as a mask over the codomain.
    pub fn image(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.cols];
        for (x, _) in set.iter().enumerate().filter(|(_, m)| **m) {
            if x >= self.rows {
                continue;
            }
            let row = &self.bits[x * self.cols..(x + 1) * self.cols];
            for (y, b) in row.iter().enumerate() {
                out[y] |= *b;
            }
        }
        out
    }

    pub fn image_of(&self, states: impl IntoIterator<Item = StateId>) -> Vec<bool> {
        let mut mask = vec![false; self.rows];
        for s in states {
            mask[s.0] = true;
        }
        self.image(&mask)
    }

    pub fn inverse(&self) -> Relation {
        Relation::from_pairs(self.cols, self.rows, self.pairs().map(|(s, t)| (t, s)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.pairs().all(|(s, t)| self.contains(t, s))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs().all(|(s, t)| other.contains(s, t))
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        Relation::from_pairs(self.rows, self.cols, self.pairs().filter(|&(s, t)| other.contains(s, t)))
    }

    /// `X` is R-closed when `R(X)` is included in `X`.
    pub fn is_closed(&self, set: &[bool]) -> bool {
        self.image(set).iter().zip(set).all(|(img, inside)| !*img || *inside)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs().map(|(s, t)| (s.0, t.0))).finish()
    }
}
