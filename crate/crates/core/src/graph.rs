// Small helpers over explicit finite digraphs given as edge lists.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

pub(crate) struct EdgeGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub out: Vec<Vec<usize>>,
}

impl EdgeGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        for (i, &(s, _)) in edges.iter().enumerate() {
            out[s].push(i);
        }
        EdgeGraph { n, edges, out }
    }

    /// Component id per node.
    pub fn scc_ids(&self) -> Vec<usize> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, self.edges.len());
        for _ in 0..self.n {
            g.add_node(());
        }
        for &(s, t) in &self.edges {
            g.add_edge(NodeIndex::new(s), NodeIndex::new(t), ());
        }
        let mut ids = vec![0; self.n];
        for (c, comp) in tarjan_scc(&g).into_iter().enumerate() {
            for v in comp {
                ids[v.index()] = c;
            }
        }
        ids
    }

    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.out[v] {
                let t = self.edges[e].1;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Shortest edge path from `from` to `to` using only nodes accepted by
    /// `allowed`. Empty when `from == to`.
    pub fn path(&self, from: usize, to: usize, allowed: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut pred: Vec<Option<usize>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.out[v] {
                let t = self.edges[e].1;
                if seen[t] || !allowed(t) {
                    continue;
                }
                seen[t] = true;
                pred[t] = Some(e);
                if t == to {
                    let mut p = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let e = pred[cur].unwrap();
                        p.push(e);
                        cur = self.edges[e].0;
                    }
                    p.reverse();
                    return Some(p);
                }
                queue.push_back(t);
            }
        }
        None
    }

    /// A walk from `from` to `to` taking each edge of `via` in order, staying
    /// inside `allowed`.
    pub fn walk_through(
        &self,
        from: usize,
        to: usize,
        via: &[usize],
        allowed: impl Fn(usize) -> bool + Copy,
    ) -> Option<Vec<usize>> {
        let mut walk = Vec::new();
        let mut cur = from;
        for &e in via {
            walk.extend(self.path(cur, self.edges[e].0, allowed)?);
            walk.push(e);
            cur = self.edges[e].1;
        }
        walk.extend(self.path(cur, to, allowed)?);
        Some(walk)
    }
}

/// Outcome of looking for a component that can be circled forever while
/// seeing every required edge class.
pub(crate) struct Recurrent {
    /// Component id.
    pub comp: usize,
    /// One internal edge per required class.
    pub witnesses: Vec<usize>,
}

/// Reachable non-trivial components whose internal edges cover every class
/// in `classes` (each class given as an edge predicate).
pub(crate) fn recurrent_components(
    g: &EdgeGraph,
    ids: &[usize],
    reach: &[bool],
    classes: &[&dyn Fn(usize) -> bool],
) -> Vec<Recurrent> {
    let ncomp = ids.iter().copied().max().map_or(0, |m| m + 1);
    let mut found: Vec<Vec<Option<usize>>> = vec![vec![None; classes.len()]; ncomp];
    let mut internal = vec![false; ncomp];
    for (e, &(s, t)) in g.edges.iter().enumerate() {
        if !reach[s] || ids[s] != ids[t] {
            continue;
        }
        internal[ids[s]] = true;
        for (k, class) in classes.iter().enumerate() {
            if found[ids[s]][k].is_none() && class(e) {
                found[ids[s]][k] = Some(e);
            }
        }
    }
    (0..ncomp)
        .filter(|&c| internal[c] && found[c].iter().all(Option::is_some))
        .map(|c| Recurrent {
            comp: c,
            witnesses: found[c].iter().map(|e| e.unwrap()).collect(),
        })
        .collect()
}
