//! Exact rational network flow: shortest-augmenting-path max-flow and
//! successive-shortest-path min-cost flow.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::num::Rational;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    /// Residual capacity; `None` is unbounded.
    cap: Option<Rational>,
    cost: Rational,
    flow: Rational,
    rev: usize,
}

/// Directed graph with residual bookkeeping. Edges are referred to by the
/// handle returned from [`FlowGraph::add_edge`].
#[derive(Debug, Clone, Default)]
pub struct FlowGraph {
    adj: Vec<Vec<Edge>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeId {
    from: usize,
    idx: usize,
}

fn has_room(cap: &Option<Rational>) -> bool {
    cap.as_ref().is_none_or(|c| c.is_positive())
}

fn min_cap(a: Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(if &x <= y { x } else { y.clone() }),
    }
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: Option<Rational>, cost: Rational) -> EdgeId {
        let fwd_idx = self.adj[from].len();
        let rev_idx = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge {
            to,
            cap,
            cost: cost.clone(),
            flow: Rational::zero(),
            rev: rev_idx,
        });
        self.adj[to].push(Edge {
            to: from,
            cap: Some(Rational::zero()),
            cost: -cost,
            flow: Rational::zero(),
            rev: fwd_idx,
        });
        EdgeId { from, idx: fwd_idx }
    }

    /// Net flow currently on a forward edge.
    pub fn flow(&self, e: EdgeId) -> &Rational {
        &self.adj[e.from][e.idx].flow
    }

    fn push(&mut self, from: usize, idx: usize, amount: &Rational) {
        let (to, rev) = {
            let e = &mut self.adj[from][idx];
            if let Some(c) = e.cap.as_mut() {
                *c -= amount;
            }
            e.flow += amount;
            (e.to, e.rev)
        };
        let r = &mut self.adj[to][rev];
        if let Some(c) = r.cap.as_mut() {
            *c += amount;
        }
        r.flow -= amount;
    }

    fn augment(&mut self, path: &[(usize, usize)], amount: &Rational) {
        for &(u, idx) in path {
            self.push(u, idx, amount);
        }
    }

    /// Bottleneck along `path`, capped by `limit`.
    fn bottleneck(&self, path: &[(usize, usize)], limit: Option<Rational>) -> Option<Rational> {
        path.iter()
            .fold(limit, |acc, &(u, idx)| min_cap(acc, &self.adj[u][idx].cap))
    }

    fn path_to(&self, parent: &[Option<(usize, usize)>], source: usize, sink: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let (u, idx) = parent[v].expect("reachable node has a parent");
            path.push((u, idx));
            v = u;
        }
        path.reverse();
        path
    }

    /// Maximum `source -> sink` flow by shortest (fewest-edge) augmenting
    /// paths. Returns the flow value; `None` if it is unbounded.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Option<Rational> {
        let mut total = Rational::zero();
        loop {
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for (idx, e) in self.adj[u].iter().enumerate() {
                    if !seen[e.to] && has_room(&e.cap) {
                        seen[e.to] = true;
                        parent[e.to] = Some((u, idx));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[sink] {
                return Some(total);
            }
            let path = self.path_to(&parent, source, sink);
            let amount = self.bottleneck(&path, None)?;
            self.augment(&path, &amount);
            total += amount;
        }
    }

    /// Sends up to `demand` units from `source` to `sink` at minimum cost by
    /// successive shortest paths (Bellman-Ford, so negative costs are fine
    /// as long as there is no negative cycle). Returns `(flow, cost)`.
    pub fn min_cost_flow(&mut self, source: usize, sink: usize, demand: &Rational) -> (Rational, Rational) {
        let mut sent = Rational::zero();
        let mut cost = Rational::zero();
        while &sent < demand {
            let n = self.adj.len();
            let mut dist: Vec<Option<Rational>> = vec![None; n];
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
            dist[source] = Some(Rational::zero());
            for _ in 0..n {
                let mut changed = false;
                for u in 0..n {
                    let Some(du) = dist[u].clone() else { continue };
                    for (idx, e) in self.adj[u].iter().enumerate() {
                        if !has_room(&e.cap) {
                            continue;
                        }
                        let cand = &du + &e.cost;
                        if dist[e.to].as_ref().is_none_or(|d| &cand < d) {
                            dist[e.to] = Some(cand);
                            parent[e.to] = Some((u, idx));
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let Some(path_cost) = dist[sink].clone() else { break };
            let path = self.path_to(&parent, source, sink);
            let amount = self
                .bottleneck(&path, Some(demand - &sent))
                .expect("limit is finite");
            self.augment(&path, &amount);
            cost += &path_cost * &amount;
            sent += amount;
        }
        (sent, cost)
    }
}
