//! Level-N Sierpinski gasket graphs with unit conductances.
//!
//! Vertex ids are assigned deepest level first, so that removing vertices in
//! ascending id order performs an exact decimation (every star removal is
//! local). The three corners a_0, a_1, a_2 therefore carry the last three ids.

use std::collections::HashMap;

use crate::error::Result;
use crate::graph::WeightedGraph;

/// Integer axial coordinates at resolution 2^N: the point is
/// (u + v/2, v*sqrt(3)/2) / 2^N in the plane.
type Key = (i64, i64);

#[derive(Debug, Clone)]
pub struct SgGraph {
    level: usize,
    graph: WeightedGraph,
    coords: Vec<(f64, f64)>,
    /// Ids of a_0, a_1, a_2.
    boundary: [usize; 3],
    /// Word w (length j <= N) -> ids of the three corners of cell w.
    cells: HashMap<Vec<u8>, [usize; 3]>,
    /// For each vertex, the level-N words whose corner set contains it
    /// (one word for the three outer corners, two for every other vertex).
    words: Vec<Vec<Vec<u8>>>,
}

/// Build the level-N gasket graph with all conductances 1.
pub fn sg_graph(level: usize) -> SgGraph {
    let n_level = level as u32;
    // Corner anchors in axial coordinates scaled by 2^N.
    let anchors: [Key; 3] = [(0, 0), (1 << n_level, 0), (0, 1 << n_level)];

    // psi_i(p) = (p + a_i) / 2 in axial coordinates; apply letters right-to-left.
    // All divisions are exact: coordinates of level-j points are multiples of 2^(N-j).
    let apply_word = |w: &[u8], p: Key| -> Key {
        let mut q = p;
        for &letter in w.iter().rev() {
            q = ((q.0 + anchors[letter as usize].0) / 2, (q.1 + anchors[letter as usize].1) / 2);
        }
        q
    };

    // Enumerate words level by level; record each point's first-appearance level.
    let mut first_level: HashMap<Key, usize> = HashMap::new();
    let mut words_by_level: Vec<Vec<Vec<u8>>> = Vec::with_capacity(level + 1);
    for j in 0..=level {
        let mut words = Vec::with_capacity(3usize.pow(j as u32));
        let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if w.len() == j {
                words.push(w);
            } else {
                for letter in (0u8..3).rev() {
                    let mut next = w.clone();
                    next.push(letter);
                    stack.push(next);
                }
            }
        }
        for w in &words {
            for i in 0..3 {
                let p = apply_word(w, anchors[i]);
                first_level.entry(p).or_insert(j);
            }
        }
        words_by_level.push(words);
    }

    // Assign ids: deepest level first; within a level, by axial coordinates.
    let mut points: Vec<(Key, usize)> = first_level.iter().map(|(&k, &j)| (k, j)).collect();
    points.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut id_of: HashMap<Key, usize> = HashMap::new();
    for (next_id, (key, _)) in points.iter().enumerate() {
        id_of.insert(*key, next_id);
    }
    let n = points.len();
    let boundary = [id_of[&anchors[0]], id_of[&anchors[1]], id_of[&anchors[2]]];

    // Edges: the three corner pairs of every level-N cell.
    let mut edges = Vec::new();
    let mut words_of_vertex: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n];
    for w in &words_by_level[level] {
        let ids: Vec<usize> = (0..3).map(|i| id_of[&apply_word(w, anchors[i])]).collect();
        edges.push((ids[0], ids[1], 1.0));
        edges.push((ids[1], ids[2], 1.0));
        edges.push((ids[0], ids[2], 1.0));
        for &id in &ids {
            words_of_vertex[id].push(w.clone());
        }
    }
    let graph = WeightedGraph::new(n, &edges).expect("gasket construction is valid");

    let mut cells = HashMap::new();
    for level_words in &words_by_level {
        for w in level_words {
            let ids = [
                id_of[&apply_word(w, anchors[0])],
                id_of[&apply_word(w, anchors[1])],
                id_of[&apply_word(w, anchors[2])],
            ];
            cells.insert(w.clone(), ids);
        }
    }

    // Plane coordinates (metadata only): a_0=(0,0), a_1=(1,0), a_2=(1/2, sqrt(3)/2).
    let scale = (1u64 << n_level) as f64;
    let mut coords = vec![(0.0, 0.0); n];
    for (&(u, v), &id) in id_of.iter() {
        coords[id] = (
            (u as f64 + v as f64 / 2.0) / scale,
            v as f64 * 3f64.sqrt() / 2.0 / scale,
        );
    }

    SgGraph { level, graph, coords, boundary, cells, words: words_of_vertex }
}

impl SgGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// Id of the corner a_i.
    pub fn corner(&self, i: usize) -> usize {
        self.boundary[i]
    }

    pub fn boundary(&self) -> [usize; 3] {
        self.boundary
    }

    /// Corner ids of the cell addressed by `word` (length <= N).
    pub fn cell_corners(&self, word: &[u8]) -> Option<[usize; 3]> {
        self.cells.get(word).copied()
    }

    /// True iff x and y lie in a common level-j cell. A vertex on a cell
    /// boundary belongs to every cell whose corner set contains it, and
    /// membership at level j means membership in the sub-gasket under some
    /// j-letter word.
    pub fn same_cell(&self, x: usize, y: usize, j: usize) -> Result<bool> {
        if j > self.level {
            return Err(crate::error::ExlabError::InvalidInput(format!(
                "cell level {} exceeds graph level {}",
                j, self.level
            )));
        }
        if j == 0 {
            return Ok(true);
        }
        for wx in &self.words[x] {
            for wy in &self.words[y] {
                if wx[..j] == wy[..j] {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// All vertices lying in the cell addressed by `word`.
    pub fn cell_vertices(&self, word: &[u8]) -> Vec<usize> {
        let j = word.len();
        let mut out: Vec<usize> = (0..self.graph.n())
            .filter(|&v| self.words[v].iter().any(|w| w[..j] == *word))
            .collect();
        out.sort_unstable();
        out
    }

    /// Deepest j such that x and y share a level-j cell.
    pub fn deepest_common_cell(&self, x: usize, y: usize) -> usize {
        let mut best = 0;
        for wx in &self.words[x] {
            for wy in &self.words[y] {
                let mut j = 0;
                while j < self.level && wx[j] == wy[j] {
                    j += 1;
                }
                best = best.max(j);
            }
        }
        best
    }
}
