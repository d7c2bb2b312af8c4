//! ε-lifting of a state relation to sub-distributions.
//!
//! `mu L^ε(R) nu` holds when `mu(E) <= nu(R(E)) + ε` for every set of states
//! `E`. Four equivalent ways of deciding it are provided:
//!
//! * [`lift_check`]: maximum flow in the transport network [`FlowNetwork`] is at
//!   least `mu(S) - ε`;
//! * [`WeightFunction::certifies`]: an explicit mass-transport witness, read
//!   off the maximum flow by [`extract_weight_function`];
//! * [`lift_check_bruteforce`]: the defining quantifier over all event sets;
//! * [`lift_check_closed_sets`]: the quantifier restricted to R-closed sets,
//!   which agrees with the others only when the domain and image of `R` are
//!   disjoint.

use std::collections::BTreeMap;

use crate::automaton::{StateId, SubDistribution};
use crate::error::{Error, Result};
use crate::maxflow::FlowGraph;
use crate::rational::Rational;
use crate::relation::Relation;

/// Largest support the subset enumerations accept (2^20 subsets).
pub const SUBSET_CAP: usize = 20;

/// A vertex of [`FlowNetwork`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Vertex {
    Source,
    Sink,
    /// Copy of a state on the `mu` side.
    Left(StateId),
    /// Primed copy of a state on the `nu` side.
    Right(StateId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    pub capacity: Rational,
}

/// The network `N(mu, nu, R)`: source edges `c(src, s) = mu(s)`, sink edges
/// `c(t', snk) = nu(t)` and unit-capacity middle edges `(s, t')` for each
/// `(s, t)` in `R`. Only states in the supports get vertices; the omitted
/// vertices would only carry zero-capacity edges.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    left: Vec<(StateId, Rational)>,
    right: Vec<(StateId, Rational)>,
    middle: Vec<(usize, usize)>,
}

/// A maximum flow: its value and the flow on each edge of
/// [`FlowNetwork::edges`], in the same order.
#[derive(Clone, Debug)]
pub struct Flow {
    pub value: Rational,
    pub edge_flows: Vec<Rational>,
}

impl FlowNetwork {
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut v = vec![Vertex::Source, Vertex::Sink];
        v.extend(self.left.iter().map(|(s, _)| Vertex::Left(*s)));
        v.extend(self.right.iter().map(|(t, _)| Vertex::Right(*t)));
        v
    }

    /// Source edges, then middle edges, then sink edges.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (s, p) in &self.left {
            out.push(Edge { from: Vertex::Source, to: Vertex::Left(*s), capacity: p.clone() });
        }
        for &(i, j) in &self.middle {
            out.push(Edge {
                from: Vertex::Left(self.left[i].0),
                to: Vertex::Right(self.right[j].0),
                capacity: Rational::one(),
            });
        }
        for (t, p) in &self.right {
            out.push(Edge { from: Vertex::Right(*t), to: Vertex::Sink, capacity: p.clone() });
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.left.len() + self.middle.len() + self.right.len()
    }

    pub fn num_middle_edges(&self) -> usize {
        self.middle.len()
    }

    /// `mu(S)`: total capacity out of the source.
    pub fn source_capacity(&self) -> Rational {
        self.left.iter().map(|(_, p)| p).sum()
    }
}

pub fn build_network(mu: &SubDistribution, nu: &SubDistribution, r: &Relation) -> FlowNetwork {
    let left: Vec<_> = mu.iter().map(|(s, p)| (s, p.clone())).collect();
    let right: Vec<_> = nu.iter().map(|(t, p)| (t, p.clone())).collect();
    let mut middle = Vec::new();
    for (i, (s, _)) in left.iter().enumerate() {
        for (j, (t, _)) in right.iter().enumerate() {
            if r.contains(*s, *t) {
                middle.push((i, j));
            }
        }
    }
    FlowNetwork { left, right, middle }
}

pub fn max_flow(net: &FlowNetwork) -> Flow {
    let (l, r) = (net.left.len(), net.right.len());
    let (source, sink) = (0, l + r + 1);
    let mut g = FlowGraph::new(l + r + 2);
    for (i, (_, p)) in net.left.iter().enumerate() {
        g.add_edge(source, 1 + i, p.clone());
    }
    for &(i, j) in &net.middle {
        g.add_edge(1 + i, 1 + l + j, Rational::one());
    }
    for (j, (_, p)) in net.right.iter().enumerate() {
        g.add_edge(1 + l + j, sink, p.clone());
    }
    let value = g.max_flow(source, sink);
    let edge_flows = (0..g.num_edges()).map(|e| g.edge_flow(e)).collect();
    Flow { value, edge_flows }
}

/// Value of the maximum flow of `N(mu, nu, R)`.
pub fn max_flow_value(mu: &SubDistribution, nu: &SubDistribution, r: &Relation) -> Rational {
    max_flow(&build_network(mu, nu, r)).value
}

/// `mu(S) - maxflow(N(mu, nu, R))`: the least slack for which the lifting holds.
pub fn flow_deficit(mu: &SubDistribution, nu: &SubDistribution, r: &Relation) -> Rational {
    mu.mass() - &max_flow_value(mu, nu, r)
}

/// Flow-based decision without the range check on `eps`.
pub(crate) fn lifts(mu: &SubDistribution, nu: &SubDistribution, r: &Relation, eps: &Rational) -> bool {
    let need = mu.mass() - eps;
    if !need.is_positive() {
        return true;
    }
    if *nu.mass() < need {
        return false;
    }
    max_flow_value(mu, nu, r) >= need
}

pub fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_unit_interval() {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(eps.clone()))
    }
}

/// Decides `mu L^eps(R) nu` through the maximum flow of `N(mu, nu, R)`.
pub fn lift_check(mu: &SubDistribution, nu: &SubDistribution, r: &Relation, eps: &Rational) -> Result<bool> {
    check_epsilon(eps)?;
    Ok(lifts(mu, nu, r, eps))
}

/// Mass-transport witness `delta(s, t)`, zero outside the stored entries.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WeightFunction {
    pub entries: BTreeMap<(StateId, StateId), Rational>,
}

impl WeightFunction {
    pub fn total(&self) -> Rational {
        self.entries.values().sum()
    }

    /// The slack this witness certifies: `mu(S) - total`.
    pub fn certified_epsilon(&self, mu: &SubDistribution) -> Rational {
        mu.mass() - &self.total()
    }

    /// Checks the three weight-function conditions directly: support inside
    /// `R`, row sums at most `mu`, column sums at most `nu`, and total at least
    /// `mu(S) - eps`.
    pub fn certifies(&self, mu: &SubDistribution, nu: &SubDistribution, r: &Relation, eps: &Rational) -> bool {
        let mut rows: BTreeMap<StateId, Rational> = BTreeMap::new();
        let mut cols: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (&(s, t), w) in &self.entries {
            if w.is_negative() || (w.is_positive() && !r.contains(s, t)) {
                return false;
            }
            *rows.entry(s).or_default() += w;
            *cols.entry(t).or_default() += w;
        }
        rows.iter().all(|(s, w)| *w <= mu.prob(*s))
            && cols.iter().all(|(t, w)| *w <= nu.prob(*t))
            && self.total() >= mu.mass() - eps
    }
}

/// Reads the weight function off the middle edges of a flow.
pub fn extract_weight_function(net: &FlowNetwork, flow: &Flow) -> WeightFunction {
    let offset = net.left.len();
    let mut entries = BTreeMap::new();
    for (k, &(i, j)) in net.middle.iter().enumerate() {
        let f = &flow.edge_flows[offset + k];
        if f.is_positive() {
            entries.insert((net.left[i].0, net.right[j].0), f.clone());
        }
    }
    WeightFunction { entries }
}

fn enumerate_subsets(n: usize) -> impl Iterator<Item = u32> {
    0..(1u32 << n)
}

/// Decides `mu L^eps(R) nu` by checking `mu(E) <= nu(R(E)) + eps` for every
/// `E` inside the support of `mu` (states outside the support leave `mu(E)`
/// unchanged and can only enlarge `R(E)`).
pub fn lift_check_bruteforce(mu: &SubDistribution, nu: &SubDistribution, r: &Relation, eps: &Rational) -> Result<bool> {
    check_epsilon(eps)?;
    let support: Vec<StateId> = mu.support().collect();
    if support.len() > SUBSET_CAP {
        return Err(Error::SizeCap { what: "support of mu", actual: support.len(), limit: SUBSET_CAP });
    }
    for bits in enumerate_subsets(support.len()) {
        let chosen = support.iter().enumerate().filter(|(k, _)| bits >> k & 1 == 1).map(|(_, s)| *s);
        let lhs: Rational = chosen.clone().map(|s| mu.prob(s)).sum();
        let image = r.image_of(chosen);
        if lhs > nu.mass_of(&image) + eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks `mu(E) <= nu(E) + eps` for every R-closed `E`. Only states in the two
/// supports affect either side, so this enumerates subsets `F` of the union of
/// supports that are the trace of some R-closed set (the R-closure of `F`
/// meets the supports exactly in `F`).
///
/// Agrees with [`lift_check_bruteforce`] when the domain and image of `R` are
/// disjoint; otherwise it may accept liftings the definition rejects.
pub fn lift_check_closed_sets(mu: &SubDistribution, nu: &SubDistribution, r: &Relation, eps: &Rational) -> Result<bool> {
    check_epsilon(eps)?;
    let mut relevant: Vec<StateId> = mu.support().chain(nu.support()).collect();
    relevant.sort();
    relevant.dedup();
    if relevant.len() > SUBSET_CAP {
        return Err(Error::SizeCap { what: "union of supports", actual: relevant.len(), limit: SUBSET_CAP });
    }
    let n = r.rows().max(r.cols());
    for bits in enumerate_subsets(relevant.len()) {
        let mut set = vec![false; n];
        let mut stack = Vec::new();
        for (k, s) in relevant.iter().enumerate() {
            if bits >> k & 1 == 1 {
                set[s.0] = true;
                stack.push(*s);
            }
        }
        // R-closure
        while let Some(x) = stack.pop() {
            let img = r.image_of([x]);
            for (y, hit) in img.iter().enumerate() {
                if *hit && !set[y] {
                    set[y] = true;
                    stack.push(StateId(y));
                }
            }
        }
        let trace_matches = relevant.iter().enumerate().all(|(k, s)| set[s.0] == (bits >> k & 1 == 1));
        if trace_matches && mu.mass_of(&set) > nu.mass_of(&set) + eps {
            return Ok(false);
        }
    }
    Ok(true)
}
