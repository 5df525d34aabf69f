//! Electric network reduction (star removal) over stable vertex labels, the
//! sequential effective-resistance computation, and reduction traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{ExlabError, Result};
use crate::graph::WeightedGraph;

/// A weighted network whose vertices keep their original labels across
/// reductions. Conductances are keyed by the unordered label pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    active: BTreeSet<usize>,
    cond: BTreeMap<(usize, usize), f64>,
}

impl Network {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let active = (0..g.n()).collect();
        let cond = g.edges().iter().map(|&(u, v, c)| ((u, v), c)).collect();
        Network { active, cond }
    }

    pub fn vertex_count(&self) -> usize {
        self.active.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.active.contains(&v)
    }

    /// Edges as (u, v, c) with u < v, in label order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cond.iter().map(|(&(u, v), &c)| (u, v, c))
    }

    pub fn conductance(&self, u: usize, v: usize) -> f64 {
        let key = (u.min(v), u.max(v));
        self.cond.get(&key).copied().unwrap_or(0.0)
    }

    fn neighbors(&self, x: usize) -> Vec<(usize, f64)> {
        // Conductance map is small; a scan keeps the representation simple.
        self.cond
            .iter()
            .filter_map(|(&(u, v), &c)| {
                if u == x {
                    Some((v, c))
                } else if v == x {
                    Some((u, c))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Star removal at `x`: every neighbor pair (y, z) gains
    /// c_yx * c_xz / sum_w c_xw, then x and its edges are deleted.
    pub fn reduce_at(&self, x: usize) -> Result<Network> {
        if self.active.len() < 3 {
            return Err(ExlabError::TooFewVertices { n: self.active.len() });
        }
        if !self.active.contains(&x) {
            return Err(ExlabError::VertexOutOfRange { v: x, n: self.active.len() });
        }
        let star = self.neighbors(x);
        // Compensated summation of the denominator.
        let mut total = 0.0f64;
        let mut comp = 0.0f64;
        for &(_, c) in &star {
            let y = c - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        let mut next = self.clone();
        next.active.remove(&x);
        next.cond.retain(|&(u, v), _| u != x && v != x);
        for i in 0..star.len() {
            for j in i + 1..star.len() {
                let (y, cy) = star[i];
                let (z, cz) = star[j];
                let key = (y.min(z), y.max(z));
                *next.cond.entry(key).or_insert(0.0) += cy * cz / total;
            }
        }
        Ok(next)
    }

    /// Dense Laplacian over the active labels, together with the label order.
    pub fn laplacian(&self) -> (Vec<usize>, nalgebra::DMatrix<f64>) {
        let labels: Vec<usize> = self.active.iter().copied().collect();
        let pos: BTreeMap<usize, usize> =
            labels.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = labels.len();
        let mut lap = nalgebra::DMatrix::zeros(n, n);
        for (&(u, v), &c) in &self.cond {
            let (i, j) = (pos[&u], pos[&v]);
            lap[(i, i)] += c;
            lap[(j, j)] += c;
            lap[(i, j)] -= c;
            lap[(j, i)] -= c;
        }
        (labels, lap)
    }
}

/// One step of a reduction sequence: the removed vertex and the network that
/// remains afterwards.
#[derive(Debug, Clone)]
pub struct ReductionStep {
    pub removed: usize,
    pub network: Network,
}

/// Ordered record of star removals terminating in a two-vertex network.
/// Empty `steps` means the initial network already had two vertices.
#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub initial: Network,
    pub steps: Vec<ReductionStep>,
    pub terminals: (usize, usize),
}

impl ReductionTrace {
    pub fn final_network(&self) -> &Network {
        self.steps.last().map(|s| &s.network).unwrap_or(&self.initial)
    }

    pub fn effective_conductance(&self) -> f64 {
        let (x, y) = self.terminals;
        self.final_network().conductance(x, y)
    }

    /// JSON audit format: [{"removed": v, "edges": [[u, v, c], ...]}, ...]
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Step {
            removed: usize,
            edges: Vec<(usize, usize, f64)>,
        }
        let steps: Vec<Step> = self
            .steps
            .iter()
            .map(|s| Step { removed: s.removed, edges: s.network.edges().collect() })
            .collect();
        serde_json::to_string(&steps).unwrap()
    }
}

/// Effective resistance between x and y by removing every other vertex in
/// ascending label order.
pub fn effective_resistance(g: &WeightedGraph, x: usize, y: usize) -> Result<(f64, ReductionTrace)> {
    if x == y {
        return Err(ExlabError::SameVertex { v: x });
    }
    if x >= g.n() || y >= g.n() {
        return Err(ExlabError::VertexOutOfRange { v: x.max(y), n: g.n() });
    }
    let net = Network::from_graph(g);
    let order: Vec<usize> = (0..g.n()).filter(|&v| v != x && v != y).collect();
    effective_resistance_with_order(net, x, y, &order)
}

/// Same as [`effective_resistance`] but with an explicit removal order.
pub fn effective_resistance_with_order(
    net: Network,
    x: usize,
    y: usize,
    order: &[usize],
) -> Result<(f64, ReductionTrace)> {
    let initial = net;
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(order.len());
    for &v in order {
        current = current.reduce_at(v)?;
        steps.push(ReductionStep { removed: v, network: current.clone() });
    }
    let trace = ReductionTrace { initial, steps, terminals: (x, y) };
    let c = trace.effective_conductance();
    Ok((1.0 / c, trace))
}

/// Trace-free variant for large graphs: same removal order, but only the
/// terminal conductance is kept.
pub fn effective_resistance_value(g: &WeightedGraph, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(ExlabError::SameVertex { v: x });
    }
    let mut current = Network::from_graph(g);
    for v in (0..g.n()).filter(|&v| v != x && v != y) {
        current = current.reduce_at(v)?;
    }
    Ok(1.0 / current.conductance(x, y))
}

/// Reduce a network down to a chosen vertex subset, removing the complement
/// in ascending label order.
pub fn reduce_to(net: &Network, keep: &[usize]) -> Result<Network> {
    let keep: BTreeSet<usize> = keep.iter().copied().collect();
    let mut current = net.clone();
    let order: Vec<usize> = net.vertices().filter(|v| !keep.contains(v)).collect();
    for v in order {
        current = current.reduce_at(v)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn star_removal_merges_leaves() {
        // Star center 0 with edges (0,1,c=2), (0,2,c=3), no edge (1,2).
        let g = WeightedGraph::new(3, &[(0, 1, 2.0), (0, 2, 3.0)]).unwrap();
        let net = Network::from_graph(&g).reduce_at(0).unwrap();
        assert_eq!(net.vertex_count(), 2);
        assert_relative_eq!(net.conductance(1, 2), 6.0 / 5.0);
    }

    #[test]
    fn triangle_reduction() {
        let g = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let net = Network::from_graph(&g).reduce_at(2).unwrap();
        assert_relative_eq!(net.conductance(0, 1), 1.5);
        let (r, _) = effective_resistance(&g, 0, 1).unwrap();
        assert_relative_eq!(r, 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn pendant_removal_changes_nothing_else() {
        let g = WeightedGraph::new(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 5.0)]).unwrap();
        let net = Network::from_graph(&g).reduce_at(3).unwrap();
        assert_eq!(net.edges().count(), 2);
        assert_relative_eq!(net.conductance(0, 1), 1.0);
        assert_relative_eq!(net.conductance(1, 2), 2.0);
    }

    #[test]
    fn single_edge_resistance() {
        let g = WeightedGraph::new(2, &[(0, 1, 4.0)]).unwrap();
        let (r, trace) = effective_resistance(&g, 0, 1).unwrap();
        assert_relative_eq!(r, 0.25);
        assert_eq!(trace.terminals, (0, 1));
    }

    #[test]
    fn unit_path_resistance_is_length() {
        for len in 1..=6 {
            let g = WeightedGraph::path(len, 1.0).unwrap();
            let (r, _) = effective_resistance(&g, 0, len).unwrap();
            assert_relative_eq!(r, len as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduce_needs_three_vertices() {
        let g = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        let err = Network::from_graph(&g).reduce_at(0).unwrap_err();
        assert!(matches!(err, ExlabError::TooFewVertices { .. }));
    }

    #[test]
    fn same_vertex_rejected() {
        let g = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(effective_resistance(&g, 1, 1), Err(ExlabError::SameVertex { .. })));
    }

    #[test]
    fn trace_shrinks_by_one_each_step() {
        let g = WeightedGraph::complete(5, 1.0).unwrap();
        let (_, trace) = effective_resistance(&g, 0, 4).unwrap();
        let mut expected = g.n() - 1;
        for step in &trace.steps {
            assert_eq!(step.network.vertex_count(), expected);
            expected -= 1;
        }
        assert!(trace.to_json().starts_with('['));
    }
}
