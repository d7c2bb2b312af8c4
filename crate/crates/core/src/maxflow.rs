//! Shortest-augmenting-path (Edmonds-Karp) maximum flow over exact rationals.

use std::collections::VecDeque;

use crate::rational::Rational;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    residual: Rational,
    rev: usize,
}

/// Residual graph with `n` vertices. Edges are numbered in insertion order.
#[derive(Clone, Debug)]
pub struct FlowGraph {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    // (arc index, original capacity) per inserted edge
    edges: Vec<(usize, Rational)>,
}

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        FlowGraph { adj: vec![Vec::new(); n], arcs: Vec::new(), edges: Vec::new() }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: Rational) -> usize {
        debug_assert!(!capacity.is_negative());
        let fwd = self.arcs.len();
        self.arcs.push(Arc { to, residual: capacity.clone(), rev: fwd + 1 });
        self.arcs.push(Arc { to: from, residual: Rational::zero(), rev: fwd });
        self.adj[from].push(fwd);
        self.adj[to].push(fwd + 1);
        self.edges.push((fwd, capacity));
        self.edges.len() - 1
    }

    /// Runs the algorithm to completion and returns the flow value.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Rational {
        let mut total = Rational::zero();
        if source == sink {
            return total;
        }
        let n = self.adj.len();
        loop {
            // BFS for a shortest augmenting path, recording the arc used to reach each vertex.
            let mut via: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if !seen[arc.to] && arc.residual.is_positive() {
                        seen[arc.to] = true;
                        via[arc.to] = Some(a);
                        if arc.to == sink {
                            break 'bfs;
                        }
                        queue.push_back(arc.to);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = sink;
            while let Some(a) = via[v] {
                let r = &self.arcs[a].residual;
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= *r => b,
                    _ => r.clone(),
                });
                v = self.arcs[self.arcs[a].rev].to;
            }
            let bottleneck = bottleneck.expect("sink reached through at least one arc");
            let mut v = sink;
            while let Some(a) = via[v] {
                self.arcs[a].residual -= &bottleneck;
                let rev = self.arcs[a].rev;
                self.arcs[rev].residual += &bottleneck;
                v = self.arcs[rev].to;
            }
            total += &bottleneck;
        }
    }

    /// Flow currently carried by edge `e` (as numbered by `add_edge`).
    pub fn edge_flow(&self, e: usize) -> Rational {
        let (arc, cap) = &self.edges[e];
        cap - &self.arcs[*arc].residual
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}
