//! Simple cycles of the reduced graph, where parallel edges collapse to one.

use std::collections::BTreeMap;

use crate::error::GridError;
use crate::grid::NetworkInstance;

pub const DEFAULT_MAX_CYCLES: usize = 10_000;

/// One bus pair joined by at least one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedEdge {
    /// Bus indices, `u < v`.
    pub u: usize,
    pub v: usize,
    /// Indices of the parallel edges, ascending.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    /// Bus indices starting at the smallest, second smaller than last.
    pub vertices: Vec<usize>,
    /// Reduced-edge indices in walk order.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleSet {
    pub reduced_edges: Vec<ReducedEdge>,
    pub cycles: Vec<Cycle>,
    /// Reduced-edge index of every edge.
    pub reduced_of: Vec<usize>,
}

impl CycleSet {
    /// Reduced edges with more than one parallel edge.
    pub fn parallel_groups(&self) -> impl Iterator<Item = (usize, &ReducedEdge)> {
        self.reduced_edges.iter().enumerate().filter(|(_, r)| r.edges.len() > 1)
    }

    /// Whether reduced edge `r` lies on some enumerated cycle.
    pub fn in_cycle(&self) -> Vec<bool> {
        let mut flags = vec![false; self.reduced_edges.len()];
        for c in &self.cycles {
            for &r in &c.edges {
                flags[r] = true;
            }
        }
        flags
    }
}

/// Enumerates all simple cycles (length at least three) of the reduced graph.
pub fn enumerate_cycles(instance: &NetworkInstance, max_cycles: usize) -> Result<CycleSet, GridError> {
    let ends = instance.endpoints();
    let n = instance.buses.len();
    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in ends.iter().enumerate() {
        pairs.entry((a.min(b), a.max(b))).or_default().push(k);
    }
    let mut reduced_of = vec![0; ends.len()];
    let mut reduced_edges = Vec::with_capacity(pairs.len());
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (r, ((u, v), edges)) in pairs.into_iter().enumerate() {
        for &k in &edges {
            reduced_of[k] = r;
        }
        adj[u].push((v, r));
        adj[v].push((u, r));
        reduced_edges.push(ReducedEdge { u, v, edges });
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut cycles = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        let mut path = vec![start];
        let mut path_edges = Vec::new();
        on_path[start] = true;
        extend(start, start, &adj, &mut on_path, &mut path, &mut path_edges, &mut cycles, max_cycles)?;
        on_path[start] = false;
    }
    Ok(CycleSet {
        reduced_edges,
        cycles,
        reduced_of,
    })
}

#[allow(clippy::too_many_arguments)]
fn extend(
    start: usize,
    at: usize,
    adj: &[Vec<(usize, usize)>],
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    path_edges: &mut Vec<usize>,
    out: &mut Vec<Cycle>,
    limit: usize,
) -> Result<(), GridError> {
    for &(next, r) in &adj[at] {
        if next == start && path.len() >= 3 && path[1] < path[path.len() - 1] {
            if out.len() == limit {
                return Err(GridError::CycleBudgetExceeded { limit });
            }
            let mut edges = path_edges.clone();
            edges.push(r);
            out.push(Cycle {
                vertices: path.clone(),
                edges,
            });
        }
        // only vertices above the root, so each cycle is rooted at its minimum
        if next > start && !on_path[next] {
            on_path[next] = true;
            path.push(next);
            path_edges.push(r);
            extend(start, next, adj, on_path, path, path_edges, out, limit)?;
            path.pop();
            path_edges.pop();
            on_path[next] = false;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Bus, Edge, PhaseSet};

    fn graph(n: usize, edges: &[(usize, usize)]) -> NetworkInstance {
        let mut inst = NetworkInstance::default();
        for i in 0..n {
            inst.buses.push(Bus::new(format!("b{i}"), PhaseSet::A));
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            inst.edges.push(Edge::new(format!("e{k}"), format!("b{a}"), format!("b{b}"), PhaseSet::A, 1.0));
        }
        inst
    }

    #[test]
    fn triangle_has_one_cycle() {
        let cs = enumerate_cycles(&graph(3, &[(0, 1), (1, 2), (2, 0)]), 10).unwrap();
        assert_eq!(cs.cycles.len(), 1);
        assert_eq!(cs.cycles[0].vertices, vec![0, 1, 2]);
    }

    #[test]
    fn tree_has_none_and_parallel_pairs_are_grouped() {
        let cs = enumerate_cycles(&graph(4, &[(0, 1), (1, 2), (1, 3), (2, 1)]), 10).unwrap();
        assert!(cs.cycles.is_empty());
        assert_eq!(cs.reduced_edges.len(), 3);
        let groups: Vec<_> = cs.parallel_groups().collect();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].1.edges, vec![1, 3]);
        assert_eq!(cs.reduced_of[1], cs.reduced_of[3]);
    }

    #[test]
    fn k4_has_seven() {
        let e = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let cs = enumerate_cycles(&graph(4, &e), 100).unwrap();
        assert_eq!(cs.cycles.len(), 7);
        assert_eq!(cs.cycles.iter().filter(|c| c.vertices.len() == 3).count(), 4);
    }

    #[test]
    fn budget_is_an_error() {
        let e = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(
            enumerate_cycles(&graph(4, &e), 6),
            Err(GridError::CycleBudgetExceeded { limit: 6 })
        );
    }
}
