//! Finite simple vertex-colored graphs and vertex sets.
//!
//! Vertices are `0..n`. Adjacency is kept as sorted neighbor lists so that
//! graphs with tens of thousands of vertices stay cheap; algorithms that need
//! constant-time adjacency on small graphs build an [`AdjacencyMatrix`].

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Color = u32;

/// Side tag of a vertex in a disjoint union: `0` for the left operand, `1`
/// for the right one.
pub type Side = u8;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    colors: Vec<Color>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sides: Option<Vec<Side>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .field("colors", &self.colors)
            .finish()
    }
}

impl Graph {
    /// The edgeless, uniformly colored graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            colors: vec![0; n],
            sides: None,
        }
    }

    /// Builds a graph from an edge list. Self-loops, duplicate edges and
    /// out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at {u}")));
            }
        }
        Ok(Graph {
            n,
            adj,
            colors: vec![0; n],
            sides: None,
        })
    }

    /// Internal constructor for adjacency lists already known to be valid.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<Vertex>>, colors: Vec<Color>) -> Self {
        debug_assert_eq!(adj.len(), colors.len());
        Graph {
            n: adj.len(),
            adj,
            colors,
            sides: None,
        }
    }

    pub fn with_colors(mut self, colors: Vec<Color>) -> Result<Self> {
        if colors.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} colors given for {} vertices",
                colors.len(),
                self.n
            )));
        }
        self.colors = colors;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn is_uncolored(&self) -> bool {
        self.colors.iter().all(|&c| c == self.colors.first().copied().unwrap_or(0))
    }

    /// Side tags recorded by [`disjoint_union`], if any.
    pub fn sides(&self) -> Option<&[Side]> {
        self.sides.as_deref()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Induced subgraph on `vertices` (in the given order); vertex `i` of the
    /// result is `vertices[i]`.
    pub fn induced(&self, vertices: &[Vertex]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                let mut l: Vec<_> = self.adj[v]
                    .iter()
                    .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        let colors = vertices.iter().map(|&v| self.colors[v]).collect();
        Graph::from_sorted_adjacency(adj, colors)
    }

    /// Relabels vertex `v` as `perm[v]`; colors travel with their vertices.
    pub fn permuted(&self, perm: &[Vertex]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let mut adj = vec![Vec::new(); self.n];
        let mut colors = vec![0; self.n];
        for v in 0..self.n {
            colors[perm[v]] = self.colors[v];
            adj[perm[v]] = self.adj[v].iter().map(|&w| perm[w]).collect();
            adj[perm[v]].sort_unstable();
        }
        Graph::from_sorted_adjacency(adj, colors)
    }

    /// Whether `map` (a bijection `V(self) -> V(other)`) is a color-preserving
    /// isomorphism.
    pub fn is_isomorphism(&self, other: &Graph, map: &[Vertex]) -> bool {
        if self.n != other.n || map.len() != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        for &w in map {
            if w >= self.n || std::mem::replace(&mut seen[w], true) {
                return false;
            }
        }
        (0..self.n).all(|v| self.colors[v] == other.colors[map[v]])
            && self.edge_count() == other.edge_count()
            && self.edges().all(|(u, v)| other.adjacent(map[u], map[v]))
    }
}

/// Dense adjacency bits for small graphs.
#[derive(Clone, Debug)]
pub struct AdjacencyMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn new(g: &Graph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for (u, v) in g.edges() {
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        AdjacencyMatrix { n, words, bits }
    }

    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// A subset of `0..n` as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl VertexSet {
    pub fn new(len: usize) -> Self {
        VertexSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for v in 0..len {
            s.insert(v);
        }
        s
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(len: usize, it: I) -> Self {
        let mut s = Self::new(len);
        for v in it {
            s.insert(v);
        }
        s
    }

    /// Bit `i` of `mask` selects vertex `i`; `len` must not exceed 64.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut s = Self::new(len);
        if len > 0 {
            s.words[0] = mask & low_mask(len);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v < self.len && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: Vertex) {
        assert!(v < self.len, "vertex {v} outside universe of {}", self.len);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: Vertex) {
        if v < self.len {
            self.words[v / 64] &= !(1 << (v % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        if self.len % 64 != 0 {
            let last = s.words.len() - 1;
            s.words[last] &= low_mask(self.len % 64);
        }
        s
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        assert_eq!(self.len, other.len);
        VertexSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        assert_eq!(self.len, other.len);
        VertexSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        assert_eq!(self.len, other.len);
        VertexSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }

    /// Low 64 bits; meaningful when the universe has at most 64 vertices.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Connected components, each sorted, ordered by minimum vertex.
pub fn connected_components(g: &Graph) -> Vec<Vec<Vertex>> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..g.n() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut block = vec![s];
        comp[s] = id;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    block.push(w);
                    queue.push_back(w);
                }
            }
        }
        block.sort_unstable();
        out.push(block);
    }
    out
}

/// Component index per vertex, numbered as in [`connected_components`].
pub fn component_labels(g: &Graph) -> Vec<usize> {
    let mut label = vec![0; g.n()];
    for (i, block) in connected_components(g).iter().enumerate() {
        for &v in block {
            label[v] = i;
        }
    }
    label
}

/// Shortest path from `s` to `t` as a vertex sequence, if one exists.
pub fn shortest_path(g: &Graph, s: Vertex, t: Vertex) -> Option<Vec<Vertex>> {
    let mut prev = vec![usize::MAX; g.n()];
    prev[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        for &w in g.neighbors(u) {
            if prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    if prev[t] == usize::MAX {
        return None;
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// `g ⊔ h` with `h`'s vertices shifted by `g.n()`. Colors are kept as they
/// are; which operand each vertex came from is recorded in [`Graph::sides`].
pub fn disjoint_union(g: &Graph, h: &Graph) -> Graph {
    let shift = g.n();
    let mut adj = g.adj.clone();
    adj.extend(h.adj.iter().map(|l| l.iter().map(|&w| w + shift).collect()));
    let mut colors = g.colors.clone();
    colors.extend_from_slice(&h.colors);
    let mut sides = vec![0; g.n()];
    sides.resize(g.n() + h.n(), 1);
    Graph {
        n: g.n() + h.n(),
        adj,
        colors,
        sides: Some(sides),
    }
}
