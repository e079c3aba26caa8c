//! Seeded graph families.
//!
//! All randomness comes from [`SplitMix64`]: the state advances by the
//! constant `0x9E3779B97F4A7C15` and each output is the state passed through
//! the usual two multiply-xorshift rounds. Identical seeds produce identical
//! graphs on every platform.

use std::collections::BTreeSet;

use crate::decomp::{DecompNode, RankDecomposition};
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph, Vertex};
use crate::iso::canonical_form;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `0..bound` (multiply-shift; `bound` must be positive).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

pub fn gen_complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("valid")
}

/// `C_n` for `n >= 3`; smaller `n` degrades to a path.
pub fn gen_cycle(n: usize) -> Graph {
    if n < 3 {
        return gen_path(n);
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid")
}

pub fn gen_path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid")
}

/// Erdős–Rényi `G(n, p)`: pairs `(u, v)`, `u < v`, in lexicographic order,
/// each kept when the next uniform draw is below `p`.
pub fn gen_random(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_f64() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DhOp {
    Pendant,
    FalseTwin,
    TrueTwin,
}

/// One construction step: the new vertex is attached to `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DhStep {
    pub target: Vertex,
    pub op: DhOp,
}

#[derive(Clone, Debug)]
pub struct DistanceHereditary {
    pub graph: Graph,
    /// `recipe[i]` creates vertex `i + 1`.
    pub recipe: Vec<DhStep>,
}

impl DistanceHereditary {
    /// Replays the recipe as a rank decomposition: each new vertex splits the
    /// leaf of its target into a cherry. Pendants and twins never raise the
    /// cut-rank of any set in the tree, so the width is at most one.
    pub fn decomposition(&self) -> RankDecomposition {
        decomposition_from_recipe(self.graph.n(), &self.recipe)
    }
}

pub fn apply_recipe(recipe: &[DhStep]) -> Graph {
    let n = recipe.len() + 1;
    let mut nbrs: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n];
    for (i, step) in recipe.iter().enumerate() {
        let v = i + 1;
        let t = step.target;
        match step.op {
            DhOp::Pendant => {
                nbrs[v].insert(t);
            }
            DhOp::FalseTwin | DhOp::TrueTwin => {
                let copy = nbrs[t].clone();
                for &w in &copy {
                    nbrs[v].insert(w);
                }
                if step.op == DhOp::TrueTwin {
                    nbrs[v].insert(t);
                }
            }
        }
        for w in nbrs[v].clone() {
            nbrs[w].insert(v);
        }
    }
    let adj = nbrs.into_iter().map(|s| s.into_iter().collect()).collect();
    Graph::from_sorted_adjacency(adj, vec![0; n])
}

fn decomposition_from_recipe(n: usize, recipe: &[DhStep]) -> RankDecomposition {
    let mut nodes = vec![DecompNode {
        parent: None,
        children: Vec::new(),
        leaf: vec![0],
    }];
    let mut leaf_of = vec![0usize; n];
    for (i, step) in recipe.iter().enumerate() {
        let v = i + 1;
        let old = leaf_of[step.target];
        // `old` becomes internal; the target moves to a fresh leaf.
        let a = nodes.len();
        let b = a + 1;
        nodes.push(DecompNode {
            parent: Some(old),
            children: Vec::new(),
            leaf: vec![step.target],
        });
        nodes.push(DecompNode {
            parent: Some(old),
            children: Vec::new(),
            leaf: vec![v],
        });
        nodes[old].leaf.clear();
        nodes[old].children = vec![a, b];
        leaf_of[step.target] = a;
        leaf_of[v] = b;
    }
    RankDecomposition::new(nodes, 0).expect("recipe trees are binary")
}

/// Distance-hereditary graph from `n - 1` seeded pendant/twin operations,
/// each on a uniformly chosen existing vertex with a uniformly chosen kind.
pub fn gen_distance_hereditary(n: usize, seed: u64) -> DistanceHereditary {
    assert!(n >= 1);
    let mut rng = SplitMix64::new(seed);
    let recipe: Vec<DhStep> = (1..n)
        .map(|v| {
            let target = rng.below(v);
            let op = [DhOp::Pendant, DhOp::FalseTwin, DhOp::TrueTwin][rng.below(3)];
            DhStep { target, op }
        })
        .collect();
    DistanceHereditary {
        graph: apply_recipe(&recipe),
        recipe,
    }
}

/// Every graph producible by the pendant/twin construction on `n` vertices,
/// one representative per isomorphism class (canonical form order), each
/// with a recipe that produces it exactly.
pub fn all_distance_hereditary(n: usize) -> Vec<DistanceHereditary> {
    assert!(n >= 1);
    let mut level: Vec<(Graph, Vec<DhStep>)> = vec![(Graph::empty(1), Vec::new())];
    for v in 1..n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (_, recipe) in &level {
            for target in 0..v {
                for op in [DhOp::Pendant, DhOp::FalseTwin, DhOp::TrueTwin] {
                    let mut r = recipe.clone();
                    r.push(DhStep { target, op });
                    let g = apply_recipe(&r);
                    let canon = canonical_form(&g);
                    if seen.insert(canon.key()) {
                        next.push((g, r));
                    }
                }
            }
        }
        level = next;
    }
    let mut out: Vec<_> = level
        .into_iter()
        .map(|(graph, recipe)| DistanceHereditary { graph, recipe })
        .collect();
    out.sort_by_cached_key(|d| canonical_form(&d.graph).key());
    out
}

/// All graphs on `n` vertices up to isomorphism, grown one vertex at a time
/// and deduplicated by canonical form. Practical up to `n = 7`.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    if n == 0 {
        return vec![Graph::empty(0)];
    }
    let mut level = vec![Graph::empty(1)];
    for m in 1..n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for g in &level {
            for mask in 0u64..(1 << m) {
                let edges = g
                    .edges()
                    .chain((0..m).filter(|&u| mask >> u & 1 == 1).map(|u| (u, m)));
                let h = Graph::from_edges(m + 1, edges).expect("valid");
                let canon = canonical_form(&h);
                if seen.insert(canon.key()) {
                    next.push(canon.graph);
                }
            }
        }
        level = next;
    }
    level.sort_by_cached_key(|g| canonical_form(g).key());
    level
}

/// Cai–Fürer–Immerman pair over `base`: the untwisted graph and the one
/// twisted on the lexicographically least base edge.
///
/// For a base vertex `v` of degree `d` there are `2^(d-1)` inner vertices,
/// one per even-size subset `S` of the incident edges, and two outer vertices
/// `(v, e, 0)`, `(v, e, 1)` per incident edge `e`; inner vertex `S` is joined
/// to `(v, e, 1)` when `e ∈ S` and to `(v, e, 0)` otherwise. Each base edge
/// `uv` joins `(u, e, i)` to `(v, e, i)`, except on the twisted edge where it
/// joins `(u, e, i)` to `(v, e, 1 - i)`. Inner vertices of `v` get color
/// `2v`, outer vertices `2v + 1`.
pub fn gen_cfi_pair(base: &Graph) -> Result<(Graph, Graph)> {
    if base.n() == 0 || base.n() > 6 {
        return Err(Error::Precondition("CFI base must have 1..=6 vertices".into()));
    }
    if connected_components(base).len() != 1 {
        return Err(Error::Precondition("CFI base must be connected".into()));
    }
    if (0..base.n()).any(|v| base.degree(v) < 2) {
        return Err(Error::Precondition("CFI base must have minimum degree 2".into()));
    }
    let twisted = base.edges().next().expect("connected with min degree 2");
    Ok((cfi_graph(base, None), cfi_graph(base, Some(twisted))))
}

fn cfi_graph(base: &Graph, twist: Option<(Vertex, Vertex)>) -> Graph {
    let mut edges = Vec::new();
    let mut colors = Vec::new();
    // outer[(v, position of neighbor in v's list)] = [bit 0 vertex, bit 1 vertex]
    let mut outer: Vec<Vec<[usize; 2]>> = Vec::new();
    for v in 0..base.n() {
        let d = base.degree(v);
        let inner_start = colors.len();
        let inner: Vec<u32> = (0u32..(1 << d)).filter(|s| s.count_ones() % 2 == 0).collect();
        colors.extend(std::iter::repeat(2 * v as u32).take(inner.len()));
        let mut mine = Vec::with_capacity(d);
        for _ in 0..d {
            let b0 = colors.len();
            colors.push(2 * v as u32 + 1);
            colors.push(2 * v as u32 + 1);
            mine.push([b0, b0 + 1]);
        }
        for (i, &s) in inner.iter().enumerate() {
            for (j, pair) in mine.iter().enumerate() {
                edges.push((inner_start + i, pair[(s >> j & 1) as usize]));
            }
        }
        outer.push(mine);
    }
    for (u, v) in base.edges() {
        let pu = base.neighbors(u).binary_search(&v).expect("edge");
        let pv = base.neighbors(v).binary_search(&u).expect("edge");
        let flip = twist == Some((u, v));
        for i in 0..2 {
            let j = if flip { 1 - i } else { i };
            edges.push((outer[u][pu][i], outer[v][pv][j]));
        }
    }
    Graph::from_edges(colors.len(), edges)
        .expect("valid")
        .with_colors(colors)
        .expect("sized")
}
