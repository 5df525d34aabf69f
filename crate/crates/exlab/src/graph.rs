//! Finite weighted graphs: validated construction, generated families, and
//! the edge-list / JSON file formats.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ExlabError, Result};

/// A finite connected undirected simple graph with positive edge conductances.
///
/// Absent edges mean zero conductance; zero-conductance edges are never stored.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(ExlabError::InvalidInput("empty vertex set".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for &(u, v, c) in edges {
            if u >= n {
                return Err(ExlabError::VertexOutOfRange { v: u, n });
            }
            if v >= n {
                return Err(ExlabError::VertexOutOfRange { v, n });
            }
            if u == v {
                return Err(ExlabError::SelfLoop { v: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(ExlabError::DuplicateEdge { u: key.0, v: key.1 });
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(ExlabError::NonpositiveConductance { u, v, c });
            }
            norm.push((key.0, key.1, c));
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        norm.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for list in &mut adj {
            list.sort_by(|a, b| a.0.cmp(&b.0));
        }
        let g = WeightedGraph { n, edges: norm, adj };
        if !g.is_connected() {
            return Err(ExlabError::DisconnectedGraph);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in normalized (u < v) order, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// Conductance of edge (u, v); 0 if the edge is absent.
    pub fn conductance(&self, u: usize, v: usize) -> f64 {
        self.adj[u]
            .binary_search_by(|probe| probe.0.cmp(&v))
            .map(|i| self.adj[u][i].1)
            .unwrap_or(0.0)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Hop-count distances from `src` (unweighted BFS).
    pub fn bfs_distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Closed ball: vertices within graph distance r of x (x included).
    pub fn ball(&self, x: usize, r: usize) -> Vec<usize> {
        let dist = self.bfs_distances(x);
        (0..self.n).filter(|&v| dist[v] <= r).collect()
    }

    pub fn complete(n: usize, c: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, c));
            }
        }
        Self::new(n, &edges)
    }

    pub fn path(len: usize, c: f64) -> Result<Self> {
        let edges: Vec<_> = (0..len).map(|i| (i, i + 1, c)).collect();
        Self::new(len + 1, &edges)
    }
}

/// The d-dimensional discrete torus (Z/NZ)^d with its symmetry group
/// (translations plus quarter-turn rotations, reflection in 1D) attached
/// for symmetrization.
#[derive(Debug, Clone)]
pub struct TorusGraph {
    pub dim: usize,
    pub side: usize,
    graph: WeightedGraph,
    automorphisms: Vec<Vec<usize>>,
}

impl TorusGraph {
    pub fn new(dim: usize, side: usize, c: f64) -> Result<Self> {
        if dim == 0 {
            return Err(ExlabError::InvalidInput("torus dimension must be >= 1".into()));
        }
        if side < 3 {
            return Err(ExlabError::TorusSideTooSmall { side });
        }
        let n = side.pow(dim as u32);
        let index = |coords: &[usize]| -> usize {
            coords.iter().fold(0, |acc, &x| acc * side + x)
        };
        let coords_of = |mut v: usize| -> Vec<usize> {
            let mut c = vec![0; dim];
            for i in (0..dim).rev() {
                c[i] = v % side;
                v /= side;
            }
            c
        };
        let mut edges = Vec::new();
        for v in 0..n {
            let cs = coords_of(v);
            for axis in 0..dim {
                let mut next = cs.clone();
                next[axis] = (next[axis] + 1) % side;
                let w = index(&next);
                edges.push((v.min(w), v.max(w), c));
            }
        }
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        let graph = WeightedGraph::new(n, &edges)?;

        // Generators of the symmetry group as vertex permutations.
        let mut generators: Vec<Vec<usize>> = Vec::new();
        for axis in 0..dim {
            let perm: Vec<usize> = (0..n)
                .map(|v| {
                    let mut cs = coords_of(v);
                    cs[axis] = (cs[axis] + 1) % side;
                    index(&cs)
                })
                .collect();
            generators.push(perm);
        }
        if dim == 1 {
            // Reflection x -> -x.
            generators.push((0..n).map(|v| (side - v % side) % side).collect());
        } else {
            // Quarter turn in the (0, 1) plane: (x0, x1) -> (-x1, x0).
            generators.push(
                (0..n)
                    .map(|v| {
                        let mut cs = coords_of(v);
                        let (x0, x1) = (cs[0], cs[1]);
                        cs[0] = (side - x1) % side;
                        cs[1] = x0;
                        index(&cs)
                    })
                    .collect(),
            );
            if dim > 2 {
                // Cyclic shift of the axes closes the full set of coordinate planes.
                generators.push(
                    (0..n)
                        .map(|v| {
                            let mut cs = coords_of(v);
                            cs.rotate_right(1);
                            index(&cs)
                        })
                        .collect(),
                );
            }
        }
        let automorphisms = close_group(n, &generators);
        Ok(TorusGraph { dim, side, graph, automorphisms })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Every element of the generated symmetry group, as vertex permutations.
    pub fn automorphisms(&self) -> &[Vec<usize>] {
        &self.automorphisms
    }
}

fn close_group(n: usize, generators: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([identity.clone()]);
    seen.insert(identity);
    while let Some(g) = queue.pop_front() {
        for gen in generators {
            let composed: Vec<usize> = (0..n).map(|v| gen[g[v]]).collect();
            if seen.insert(composed.clone()) {
                queue.push_back(composed);
            }
        }
        out.push(g);
    }
    out.sort();
    out
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Parse the "u v c" edge-list text format ('#' starts a comment).
    pub fn from_edge_list_text(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_v = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(ExlabError::InvalidInput(format!(
                    "line {}: expected 'u v c', got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| ExlabError::InvalidInput(format!("line {}: bad vertex id", lineno + 1)))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| ExlabError::InvalidInput(format!("line {}: bad vertex id", lineno + 1)))?;
            let c: f64 = fields[2]
                .parse()
                .map_err(|_| ExlabError::InvalidInput(format!("line {}: bad conductance", lineno + 1)))?;
            max_v = max_v.max(u).max(v);
            edges.push((u, v, c));
        }
        if edges.is_empty() {
            return Err(ExlabError::InvalidInput("no edges in edge list".into()));
        }
        Self::new(max_v + 1, &edges)
    }

    pub fn to_edge_list_text(&self) -> String {
        let mut out = String::new();
        for &(u, v, c) in &self.edges {
            writeln!(out, "{} {} {}", u, v, c).unwrap();
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: GraphJson = serde_json::from_str(text)
            .map_err(|e| ExlabError::InvalidInput(format!("bad graph JSON: {e}")))?;
        Self::new(parsed.n, &parsed.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson { n: self.n, edges: self.edges.clone() }).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, &[(0, 1, 4.0)]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.conductance(0, 1), 4.0);
        assert_eq!(g.conductance(1, 0), 4.0);
    }

    #[test]
    fn unit_triangle() {
        let g = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn rejects_disconnected() {
        let err = WeightedGraph::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err();
        assert_eq!(err, ExlabError::DisconnectedGraph);
    }

    #[test]
    fn rejects_self_loop_and_duplicates_and_nonpositive() {
        assert!(matches!(
            WeightedGraph::new(2, &[(0, 0, 1.0)]),
            Err(ExlabError::SelfLoop { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(ExlabError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(2, &[(0, 1, 0.0)]),
            Err(ExlabError::NonpositiveConductance { .. })
        ));
    }

    #[test]
    fn torus_1d_is_cycle() {
        let t = TorusGraph::new(1, 4, 1.0).unwrap();
        assert_eq!(t.graph().n(), 4);
        assert_eq!(t.graph().edges().len(), 4);
    }

    #[test]
    fn torus_2d_counts() {
        // d*N^d edges, counted directly.
        let t = TorusGraph::new(2, 3, 1.0).unwrap();
        assert_eq!(t.graph().n(), 9);
        assert_eq!(t.graph().edges().len(), 18);
        for v in 0..9 {
            assert_eq!(t.graph().degree(v), 4);
        }
    }

    #[test]
    fn torus_degenerate_side() {
        assert!(matches!(
            TorusGraph::new(1, 2, 1.0),
            Err(ExlabError::TorusSideTooSmall { .. })
        ));
    }

    #[test]
    fn torus_automorphisms_preserve_edges() {
        let t = TorusGraph::new(2, 3, 1.0).unwrap();
        assert_eq!(t.automorphisms().len(), 36); // 9 translations x 4 rotations
        for sigma in t.automorphisms() {
            for &(u, v, c) in t.graph().edges() {
                assert_eq!(t.graph().conductance(sigma[u], sigma[v]), c);
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# a triangle\n0 1 1.5\n1 2 0.25\n0 2 3\n";
        let g = WeightedGraph::from_edge_list_text(text).unwrap();
        let g2 = WeightedGraph::from_edge_list_text(&g.to_edge_list_text()).unwrap();
        assert_eq!(g, g2);
        let g3 = WeightedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, g3);
    }
}
