//! Split pairs, flip functions and component partitions.
//!
//! Flip functions act on the graph's own vertex colors; to flip with respect
//! to a refined coloring, install it first with [`Graph::with_colors`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cut::{cut_matrix, cut_rank, greedy_basis};
use crate::error::{Error, Result};
use crate::gf2::Reducer;
use crate::graph::{connected_components, Color, Graph, Vertex, VertexSet};
use crate::iso::are_isomorphic;

/// Ordered split pair `(a, b)` for the cut `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPair {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub x: VertexSet,
}

impl SplitPair {
    /// `a` followed by `b`, the order in which the pair is individualized.
    pub fn sequence(&self) -> Vec<Vertex> {
        self.a.iter().chain(&self.b).copied().collect()
    }
}

/// Greedy bases on both sides, scanning vertices in ascending order.
pub fn split_pair(g: &Graph, x: &VertexSet) -> SplitPair {
    SplitPair {
        a: greedy_basis(g, x, &[], &[]),
        b: greedy_basis(g, &x.complement(), &[], &[]),
        x: x.clone(),
    }
}

/// Whether `s` picks independent neighborhood vectors spanning the side.
fn is_basis(g: &Graph, x: &VertexSet, s: &[Vertex]) -> bool {
    if s.iter().any(|&v| !x.contains(v)) {
        return false;
    }
    let m = cut_matrix(g, x);
    let members = x.to_vec();
    let mut reducer = Reducer::new(m.cols().div_ceil(64));
    let independent = s.iter().all(|v| {
        let r = members.binary_search(v).expect("member");
        reducer.insert(m.row(r))
    });
    independent && reducer.len() == cut_rank(g, x)
}

pub fn is_split_pair(g: &Graph, p: &SplitPair) -> bool {
    is_basis(g, &p.x, &p.a) && is_basis(g, &p.x.complement(), &p.b)
}

/// A color class that is not contained in one `≈` block of its side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxViolation {
    pub color: Color,
    pub first: Vertex,
    pub second: Vertex,
}

/// First class (in color order) holding two vertices of the same side of
/// `x` with different neighborhoods across the cut.
pub fn approx_violation(g: &Graph, x: &VertexSet, colors: &[Color]) -> Option<ApproxViolation> {
    for side in [x.clone(), x.complement()] {
        let m = cut_matrix(g, &side);
        let mut seen: BTreeMap<Color, (Vertex, usize)> = BTreeMap::new();
        let mut found: Option<ApproxViolation> = None;
        for (r, v) in side.iter().enumerate() {
            match seen.get(&colors[v]) {
                None => {
                    seen.insert(colors[v], (v, r));
                }
                Some(&(w, rw)) if m.row(rw) != m.row(r) => {
                    let cand = ApproxViolation { color: colors[v], first: w, second: v };
                    if found.as_ref().map_or(true, |f| cand.color < f.color) {
                        found = Some(cand);
                    }
                }
                _ => {}
            }
        }
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Whether every color class inside `x` lies within one `≈_x` block and
/// every class inside the complement within one block of the complement.
pub fn refines_approx(g: &Graph, x: &VertexSet, colors: &[Color]) -> bool {
    approx_violation(g, x, colors).is_none()
}

/// Symmetric 0/1 function on color pairs, stored as the pairs mapped to 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipFunction {
    pub domain: BTreeSet<Color>,
    /// Unordered pairs `(c, d)` with `c <= d`.
    pub flipped: BTreeSet<(Color, Color)>,
}

impl FlipFunction {
    pub fn zero(domain: impl IntoIterator<Item = Color>) -> Self {
        FlipFunction { domain: domain.into_iter().collect(), flipped: BTreeSet::new() }
    }

    pub fn set(&mut self, c: Color, d: Color) {
        self.domain.insert(c);
        self.domain.insert(d);
        self.flipped.insert((c.min(d), c.max(d)));
    }

    pub fn get(&self, c: Color, d: Color) -> bool {
        self.flipped.contains(&(c.min(d), c.max(d)))
    }
}

/// The flip that removes every edge across `x`: a color pair is flipped when
/// the vertex pairs of those colors lying on opposite sides are all
/// adjacent. Fails when some color pair has both adjacent and non-adjacent
/// cross pairs, since then no flip function can separate the sides.
pub fn flip_for_cut(g: &Graph, x: &VertexSet) -> Result<FlipFunction> {
    let inside = x.to_vec();
    let outside = x.complement().to_vec();
    // (edges, pairs) per unordered color pair
    let mut tally: BTreeMap<(Color, Color), (usize, usize)> = BTreeMap::new();
    for &u in &inside {
        for &w in &outside {
            let (c, d) = (g.color(u), g.color(w));
            let e = tally.entry((c.min(d), c.max(d))).or_default();
            e.0 += usize::from(g.adjacent(u, w));
            e.1 += 1;
        }
    }
    let mut f = FlipFunction::zero(g.colors().iter().copied());
    for (&(c, d), &(edges, pairs)) in &tally {
        if edges == pairs {
            f.set(c, d);
        } else if edges != 0 {
            return Err(Error::Flip(format!(
                "colors {c} and {d} have {edges} adjacent of {pairs} cross pairs"
            )));
        }
    }
    let flipped = flipped_graph(g, &f)?;
    if inside.iter().any(|&u| flipped.neighbors(u).iter().any(|&w| !x.contains(w))) {
        return Err(Error::Flip("flipped graph still crosses the cut".into()));
    }
    Ok(f)
}

/// `g` with every pair whose colors are flipped complemented.
pub fn flipped_graph(g: &Graph, f: &FlipFunction) -> Result<Graph> {
    if let Some(&c) = g.colors().iter().find(|c| !f.domain.contains(c)) {
        return Err(Error::Flip(format!("color {c} is outside the flip function's domain")));
    }
    let n = g.n();
    let mut edges = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            if g.adjacent(u, w) != f.get(g.color(u), g.color(w)) {
                edges.push((u, w));
            }
        }
    }
    Graph::from_edges(n, edges)?.with_colors(g.colors().to_vec())
}

/// `Comp(g, f)`: connected components of the flipped graph.
pub fn flip_components(g: &Graph, f: &FlipFunction) -> Result<Vec<Vec<Vertex>>> {
    Ok(connected_components(&flipped_graph(g, f)?))
}

/// Split pairs for `x = x1 ⊔ x2` and both parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceTriple {
    pub parent: SplitPair,
    pub child1: SplitPair,
    pub child2: SplitPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NiceCondition {
    /// One of the three pairs is not a split pair for its set.
    SplitPairValidity,
    /// `A ∩ X_i ⊆ A_i`.
    ParentBasisKept,
    /// `B_2 ∩ X_1 ⊆ A_1` and `B_1 ∩ X_2 ⊆ A_2`.
    SiblingBasisKept,
    /// `B_i ∩ X̄ ⊆ B`.
    OuterBasisKept,
    /// The children's sets do not partition the parent's.
    NotAPartition,
}

impl fmt::Display for NiceCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NiceCondition::SplitPairValidity => "split pair validity",
            NiceCondition::ParentBasisKept => "condition (a): A ∩ X_i ⊆ A_i",
            NiceCondition::SiblingBasisKept => "condition (b): B_j ∩ X_i ⊆ A_i",
            NiceCondition::OuterBasisKept => "B_i ∩ complement(X) ⊆ B",
            NiceCondition::NotAPartition => "X_1, X_2 do not partition X",
        })
    }
}

fn subset(s: &[Vertex], within: impl Fn(Vertex) -> bool, of: &[Vertex]) -> bool {
    s.iter().filter(|&&v| within(v)).all(|v| of.contains(v))
}

/// Every violated niceness condition; empty when the triple is nice.
pub fn verify_nice(g: &Graph, t: &NiceTriple) -> Vec<NiceCondition> {
    let (p, c1, c2) = (&t.parent, &t.child1, &t.child2);
    let mut out = Vec::new();
    if c1.x.intersects(&c2.x) || c1.x.union(&c2.x) != p.x {
        out.push(NiceCondition::NotAPartition);
    }
    if ![p, c1, c2].iter().all(|s| is_split_pair(g, s)) {
        out.push(NiceCondition::SplitPairValidity);
    }
    if !subset(&p.a, |v| c1.x.contains(v), &c1.a) || !subset(&p.a, |v| c2.x.contains(v), &c2.a) {
        out.push(NiceCondition::ParentBasisKept);
    }
    if !subset(&c2.b, |v| c1.x.contains(v), &c1.a) || !subset(&c1.b, |v| c2.x.contains(v), &c2.a) {
        out.push(NiceCondition::SiblingBasisKept);
    }
    let outside = |v: Vertex| !p.x.contains(v);
    if !subset(&c1.b, outside, &p.b) || !subset(&c2.b, outside, &p.b) {
        out.push(NiceCondition::OuterBasisKept);
    }
    out
}

/// Nice split pairs for `x1`, `x2` below `parent`.
///
/// `a_i` extends `A ∩ X_i` greedily; `b_2` is drawn from `a_1` and `B`
/// (which together span the neighborhoods of `X̄_2`), and `b_1` from `a_2`
/// and `B`. The triple is verified before it is returned.
pub fn nice_split_pairs(g: &Graph, x1: &VertexSet, x2: &VertexSet, parent: &SplitPair) -> Result<NiceTriple> {
    if x1.intersects(x2) || x1.union(x2) != parent.x {
        return Err(Error::Precondition("x1 and x2 must partition the parent's set".into()));
    }
    if !is_split_pair(g, parent) {
        return Err(Error::Precondition("parent is not a split pair".into()));
    }
    let forced = |xi: &VertexSet| -> Vec<Vertex> { parent.a.iter().copied().filter(|&v| xi.contains(v)).collect() };
    let a1 = greedy_basis(g, x1, &forced(x1), &[]);
    let a2 = greedy_basis(g, x2, &forced(x2), &[]);
    let from = |ai: &[Vertex], comp: &VertexSet| -> Vec<Vertex> {
        let pool: Vec<Vertex> = ai.iter().chain(&parent.b).copied().collect();
        let mut b = Vec::new();
        // restrict the greedy scan to the pool by offering only pool members
        let chosen = greedy_basis(g, comp, &pool, &[]);
        for v in chosen {
            if pool.contains(&v) {
                b.push(v);
            }
        }
        b
    };
    let b2 = from(&a1, &x2.complement());
    let b1 = from(&a2, &x1.complement());
    let triple = NiceTriple {
        parent: parent.clone(),
        child1: SplitPair { a: a1, b: b1, x: x1.clone() },
        child2: SplitPair { a: a2, b: b2, x: x2.clone() },
    };
    let bad = verify_nice(g, &triple);
    if bad.is_empty() {
        Ok(triple)
    } else {
        let names: Vec<String> = bad.iter().map(ToString::to_string).collect();
        Err(Error::Precondition(format!("nice split pair construction failed: {}", names.join(", "))))
    }
}

/// A vertex `v` whose block in `p` and the block of `sigma[v]` in `q` induce
/// non-isomorphic subgraphs. Blocks are taken in the given order; `v` is the
/// least such vertex.
pub fn component_partition_mismatch(
    g: &Graph,
    h: &Graph,
    p: &[Vec<Vertex>],
    q: &[Vec<Vertex>],
    sigma: &[Vertex],
) -> Result<Vertex> {
    let block_of = |blocks: &[Vec<Vertex>], n: usize| -> Result<Vec<usize>> {
        let mut of = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for &v in b {
                if v >= n || of[v] != usize::MAX {
                    return Err(Error::Precondition("blocks must partition the vertices".into()));
                }
                of[v] = i;
            }
        }
        if of.contains(&usize::MAX) {
            return Err(Error::Precondition("blocks must cover every vertex".into()));
        }
        Ok(of)
    };
    let pg = block_of(p, g.n())?;
    let qh = block_of(q, h.n())?;
    if sigma.len() != g.n() || sigma.iter().any(|&w| w >= h.n()) {
        return Err(Error::Precondition("sigma must map V(g) into V(h)".into()));
    }
    let mut checked: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for v in 0..g.n() {
        let key = (pg[v], qh[sigma[v]]);
        let iso = *checked
            .entry(key)
            .or_insert_with(|| are_isomorphic(&g.induced(&p[key.0]), &h.induced(&q[key.1])));
        if !iso {
            return Ok(v);
        }
    }
    Err(Error::Precondition("every paired block is isomorphic; the inputs are isomorphic".into()))
}
