//! Rank decompositions: validation, width, exact rank-width, rebalancing and
//! exact treewidth.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cut::{cut_rank, cut_rank_table};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};

pub const DEFAULT_EXACT_BOUND: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Vertices attached to this node; exactly one on a valid leaf.
    pub leaf: Vec<Vertex>,
}

impl DecompNode {
    pub fn internal(parent: Option<usize>, children: Vec<usize>) -> Self {
        DecompNode { parent, children, leaf: Vec::new() }
    }

    pub fn leaf(parent: Option<usize>, v: Vertex) -> Self {
        DecompNode { parent, children: Vec::new(), leaf: vec![v] }
    }
}

/// Rooted tree with vertices on its leaves; `γ(t)` is the set of vertices
/// below `t` and is derived, never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDecomposition {
    nodes: Vec<DecompNode>,
    root: usize,
}

impl RankDecomposition {
    /// Checks only that node references are in range; use [`validate`] for
    /// the decomposition conditions.
    pub fn new(nodes: Vec<DecompNode>, root: usize) -> Result<Self> {
        let len = nodes.len();
        let bad = root >= len
            || nodes
                .iter()
                .any(|t| t.parent.is_some_and(|p| p >= len) || t.children.iter().any(|&c| c >= len));
        if bad {
            return Err(Error::InvalidDecomposition("node reference out of range".into()));
        }
        Ok(RankDecomposition { nodes, root })
    }

    pub fn nodes(&self) -> &[DecompNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes reachable from the root, children before parents. `None` if a
    /// node is reached twice.
    fn postorder(&self) -> Option<Vec<usize>> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if std::mem::replace(&mut seen[t], true) {
                return None;
            }
            stack.push((t, true));
            for &c in self.nodes[t].children.iter().rev() {
                stack.push((c, false));
            }
        }
        Some(order)
    }

    /// `γ(t)` for every node over a universe of `n` vertices.
    pub fn gamma(&self, n: usize) -> Result<Vec<VertexSet>> {
        let order = self
            .postorder()
            .ok_or_else(|| Error::InvalidDecomposition("tree contains a cycle or shared node".into()))?;
        let mut gamma = vec![VertexSet::new(n); self.nodes.len()];
        for t in order {
            let mut s = VertexSet::new(n);
            for &v in &self.nodes[t].leaf {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                s.insert(v);
            }
            for &c in &self.nodes[t].children {
                s = s.union(&gamma[c]);
            }
            gamma[t] = s;
        }
        Ok(gamma)
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn height(&self) -> usize {
        let Some(order) = self.postorder() else { return usize::MAX };
        let mut h = vec![0usize; self.nodes.len()];
        for t in order {
            h[t] = self.nodes[t].children.iter().map(|&c| h[c] + 1).max().unwrap_or(0);
        }
        h[self.root]
    }

    /// The leaf holding `v`.
    pub fn leaf_of(&self, v: Vertex) -> Option<usize> {
        self.nodes.iter().position(|t| t.children.is_empty() && t.leaf == [v])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DecompFile::from(self)).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let file: DecompFile = serde_json::from_value(value.clone())?;
        file.try_into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Structure,
    NotBinary,
    ChildrenIntersect,
    NonSingletonLeaf,
    InternalVertex,
    RootCoverage,
    LeafMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(t) => write!(f, "node {t}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn violation(kind: ViolationKind, node: Option<usize>, message: impl Into<String>) -> Violation {
    Violation { kind, node, message: message.into() }
}

/// Every violated decomposition condition, with the offending node.
pub fn validate(g: &Graph, d: &RankDecomposition) -> std::result::Result<(), Vec<Violation>> {
    use ViolationKind::*;
    let n = g.n();
    let mut out = Vec::new();
    if d.nodes[d.root].parent.is_some() {
        out.push(violation(Structure, Some(d.root), "root has a parent"));
    }
    for (t, node) in d.nodes.iter().enumerate() {
        for &c in &node.children {
            if d.nodes[c].parent != Some(t) {
                out.push(violation(Structure, Some(c), format!("parent link does not point to {t}")));
            }
        }
    }
    let Some(order) = d.postorder() else {
        out.push(violation(Structure, None, "tree contains a cycle or shared node"));
        return Err(out);
    };
    if order.len() != d.nodes.len() {
        out.push(violation(Structure, None, "some nodes are unreachable from the root"));
    }
    let mut gamma = vec![VertexSet::new(n); d.nodes.len()];
    let mut leaf_count = vec![0usize; n];
    for &t in &order {
        let node = &d.nodes[t];
        if node.leaf.iter().any(|&v| v >= n) {
            out.push(violation(LeafMap, Some(t), "leaf vertex out of range"));
            continue;
        }
        if node.children.is_empty() {
            if node.leaf.len() != 1 {
                out.push(violation(NonSingletonLeaf, Some(t), "non-singleton leaf"));
            }
            for &v in &node.leaf {
                leaf_count[v] += 1;
                gamma[t].insert(v);
            }
            continue;
        }
        if node.children.len() != 2 {
            out.push(violation(NotBinary, Some(t), format!("{} children", node.children.len())));
        }
        if !node.leaf.is_empty() {
            out.push(violation(InternalVertex, Some(t), "internal node carries vertices"));
        }
        let mut s = VertexSet::new(n);
        for &c in &node.children {
            if s.intersects(&gamma[c]) {
                out.push(violation(ChildrenIntersect, Some(t), "child sets intersect"));
            }
            s = s.union(&gamma[c]);
        }
        gamma[t] = s;
    }
    if gamma[d.root] != VertexSet::full(n) {
        out.push(violation(RootCoverage, Some(d.root), "root does not cover every vertex"));
    }
    for (v, &c) in leaf_count.iter().enumerate() {
        if c > 1 {
            out.push(violation(LeafMap, None, format!("vertex {v} sits on {c} leaves")));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn ensure_valid(g: &Graph, d: &RankDecomposition) -> Result<()> {
    validate(g, d).map_err(|v| {
        Error::InvalidDecomposition(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompReport {
    pub width: usize,
    pub height: usize,
    pub node_count: usize,
}

pub fn width(g: &Graph, d: &RankDecomposition) -> Result<DecompReport> {
    ensure_valid(g, d)?;
    let gamma = d.gamma(g.n())?;
    Ok(DecompReport {
        width: gamma.iter().map(|s| cut_rank(g, s)).max().unwrap_or(0),
        height: d.height(),
        node_count: d.node_count(),
    })
}

/// Builds a decomposition from nested splits of vertex masks.
struct MaskTree<'a> {
    split: &'a dyn Fn(u32) -> u32,
    nodes: Vec<DecompNode>,
}

impl MaskTree<'_> {
    fn build(&mut self, s: u32, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        if s.count_ones() == 1 {
            self.nodes.push(DecompNode::leaf(parent, s.trailing_zeros() as usize));
            return id;
        }
        self.nodes.push(DecompNode::internal(parent, Vec::new()));
        let left = (self.split)(s);
        let a = self.build(left, Some(id));
        let b = self.build(s & !left, Some(id));
        self.nodes[id].children = vec![a, b];
        id
    }
}

pub fn exact_rank_width(g: &Graph) -> Result<(usize, RankDecomposition)> {
    exact_rank_width_bounded(g, DEFAULT_EXACT_BOUND)
}

/// Optimal width by dynamic programming over vertex subsets. The witness
/// takes, at each set, the numerically least optimal part containing the
/// set's minimum vertex.
pub fn exact_rank_width_bounded(g: &Graph, bound: usize) -> Result<(usize, RankDecomposition)> {
    let n = g.n();
    if n > bound || n > 25 {
        return Err(Error::SizeBound { what: "exact rank-width", n, bound: bound.min(25) });
    }
    if n == 0 {
        return Err(Error::InvalidGraph("rank decompositions need at least one vertex".into()));
    }
    let rho = cut_rank_table(g);
    let full = ((1u64 << n) - 1) as u32;
    let mut best = vec![u8::MAX; 1 << n];
    let mut choice = vec![0u32; 1 << n];
    // increasing numeric order visits every proper subset before its superset
    for s in 1..=full {
        if s.count_ones() == 1 {
            best[s as usize] = rho[s as usize];
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s & !low;
        // parts containing `low`: `low | sub` for proper submasks `sub` of `rest`
        let mut sub = 0u32;
        loop {
            let left = low | sub;
            if left != s {
                let right = s & !left;
                let w = best[left as usize]
                    .max(best[right as usize])
                    .max(rho[left as usize])
                    .max(rho[right as usize]);
                if w < best[s as usize] || (w == best[s as usize] && left < choice[s as usize]) {
                    best[s as usize] = w;
                    choice[s as usize] = left;
                }
            }
            if sub == rest {
                break;
            }
            sub = (sub.wrapping_sub(rest)) & rest;
        }
    }
    let split = |s: u32| choice[s as usize];
    let mut tree = MaskTree { split: &split, nodes: Vec::new() };
    let root = tree.build(full, None);
    Ok((best[full as usize] as usize, RankDecomposition::new(tree.nodes, root)?))
}

/// A region of the input tree: `γ(top)`, minus `γ(hole)` when present. Every
/// node of the balanced tree is such a region, and
/// `ρ(γ(a) \ γ(b)) <= ρ(γ(a)) + ρ(γ(b))`, so widths at most double.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Region {
    top: usize,
    hole: Option<usize>,
}

struct Balancer<'a> {
    d: &'a RankDecomposition,
    /// nodes in preorder, for deterministic tie-breaking
    preorder: Vec<usize>,
    memo: HashMap<Region, (usize, Option<usize>)>,
}

impl Balancer<'_> {
    fn sibling(&self, t: usize) -> usize {
        let p = self.d.nodes[t].parent.expect("non-root");
        *self.d.nodes[p].children.iter().find(|&&c| c != t).expect("binary")
    }

    fn normalize(&self, r: Region) -> Region {
        match r.hole {
            Some(b) if self.d.nodes[b].parent == Some(r.top) => Region { top: self.sibling(b), hole: None },
            _ => r,
        }
    }

    fn is_descendant(&self, c: usize, a: usize) -> bool {
        let mut t = c;
        while let Some(p) = self.d.nodes[t].parent {
            if p == a {
                return true;
            }
            t = p;
        }
        false
    }

    /// Split points: for a hole-free region any proper descendant of the
    /// top; otherwise the nodes strictly between top and hole.
    fn candidates(&self, r: Region) -> Vec<usize> {
        match r.hole {
            None => self.preorder.iter().copied().filter(|&c| self.is_descendant(c, r.top)).collect(),
            Some(b) => {
                let mut path = Vec::new();
                let mut t = self.d.nodes[b].parent.expect("hole below top");
                while t != r.top {
                    path.push(t);
                    t = self.d.nodes[t].parent.expect("hole below top");
                }
                path.reverse();
                path
            }
        }
    }

    fn parts(&self, r: Region, c: usize) -> (Region, Region) {
        let upper = self.normalize(Region { top: r.top, hole: Some(c) });
        let lower = self.normalize(Region { top: c, hole: r.hole });
        (lower, upper)
    }

    /// Least achievable height of a region and the split attaining it.
    fn solve(&mut self, r: Region) -> usize {
        if let Some(&(h, _)) = self.memo.get(&r) {
            return h;
        }
        let leaf = r.hole.is_none() && self.d.nodes[r.top].children.is_empty();
        let mut best = (if leaf { 0 } else { usize::MAX }, None);
        if !leaf {
            for c in self.candidates(r) {
                let (lower, upper) = self.parts(r, c);
                let h = 1 + self.solve(lower).max(self.solve(upper));
                if h < best.0 {
                    best = (h, Some(c));
                }
            }
        }
        self.memo.insert(r, best);
        best.0
    }

    fn emit(&self, r: Region, parent: Option<usize>, out: &mut Vec<DecompNode>) -> usize {
        let id = out.len();
        match self.memo[&r].1 {
            None => out.push(DecompNode::leaf(parent, self.d.nodes[r.top].leaf[0])),
            Some(c) => {
                out.push(DecompNode::internal(parent, Vec::new()));
                let (lower, upper) = self.parts(r, c);
                let a = self.emit(lower, Some(id), out);
                let b = self.emit(upper, Some(id), out);
                out[id].children = vec![a, b];
            }
        }
        id
    }
}

/// Rebuilds `d` with logarithmic height. The result is the least-height
/// tree whose node sets are all regions `γ(a)` or `γ(a) \ γ(b)` of `d`, so
/// its width is at most twice the width of `d`.
pub fn balance(g: &Graph, d: &RankDecomposition) -> Result<RankDecomposition> {
    ensure_valid(g, d)?;
    let mut preorder = d.postorder().expect("validated");
    preorder.reverse();
    let mut b = Balancer { d, preorder, memo: HashMap::new() };
    let root = Region { top: d.root, hole: None };
    b.solve(root);
    let mut nodes = Vec::new();
    b.emit(root, None, &mut nodes);
    RankDecomposition::new(nodes, 0)
}

/// `3 * (log2 n + 1)`.
pub fn height_bound(n: usize) -> f64 {
    3.0 * ((n.max(1) as f64).log2() + 1.0)
}

/// Caterpillar decomposition over `order`: each spine node splits off the
/// next vertex.
pub fn caterpillar(order: &[Vertex]) -> Result<RankDecomposition> {
    if order.is_empty() {
        return Err(Error::InvalidGraph("rank decompositions need at least one vertex".into()));
    }
    let mut nodes = Vec::new();
    let mut parent = None;
    for (i, &v) in order.iter().enumerate() {
        if i + 1 == order.len() {
            nodes.push(DecompNode::leaf(parent, v));
            break;
        }
        let spine = nodes.len();
        nodes.push(DecompNode::internal(parent, vec![spine + 1, spine + 2]));
        nodes.push(DecompNode::leaf(Some(spine), v));
        parent = Some(spine);
    }
    RankDecomposition::new(nodes, 0)
}

/// Exact treewidth by dynamic programming over elimination prefixes.
pub fn treewidth_exact(g: &Graph) -> Result<usize> {
    treewidth_exact_bounded(g, 16)
}

pub fn treewidth_exact_bounded(g: &Graph, bound: usize) -> Result<usize> {
    let n = g.n();
    if n > bound || n > 20 {
        return Err(Error::SizeBound { what: "exact treewidth", n, bound: bound.min(20) });
    }
    if n <= 1 {
        return Ok(0);
    }
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0, |m, &w| m | 1 << w)).collect();
    let full = (1u32 << n) - 1;
    // vertices outside s ∪ {v} reachable from v through s
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut out = 0u32;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let next = nbr[u] & !seen;
            seen |= next;
            out |= next & !s;
            frontier |= next & s;
        }
        out
    };
    let mut tw = vec![u32::MAX; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            let w = tw[prev as usize].max(q(prev, v).count_ones());
            tw[s as usize] = tw[s as usize].min(w);
        }
    }
    Ok(tw[full as usize] as usize)
}

#[derive(Serialize, Deserialize)]
struct DecompFile {
    root: usize,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    #[serde(serialize_with = "leaf_out", deserialize_with = "leaf_in", default)]
    leaf: Vec<Vertex>,
}

fn leaf_out<S: Serializer>(leaf: &[Vertex], s: S) -> std::result::Result<S::Ok, S::Error> {
    match leaf {
        [] => s.serialize_none(),
        [v] => s.serialize_some(v),
        many => many.serialize(s),
    }
}

fn leaf_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vertex>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Leaf {
        One(Vertex),
        Many(Vec<Vertex>),
    }
    Ok(match Option::<Leaf>::deserialize(d)? {
        None => Vec::new(),
        Some(Leaf::One(v)) => vec![v],
        Some(Leaf::Many(vs)) => vs,
    })
}

impl From<&RankDecomposition> for DecompFile {
    fn from(d: &RankDecomposition) -> Self {
        DecompFile {
            root: d.root,
            nodes: d
                .nodes
                .iter()
                .enumerate()
                .map(|(id, t)| NodeRecord {
                    id,
                    parent: t.parent,
                    children: t.children.clone(),
                    leaf: t.leaf.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<DecompFile> for RankDecomposition {
    type Error = Error;

    fn try_from(file: DecompFile) -> Result<Self> {
        let len = file.nodes.len();
        let mut nodes = vec![None; len];
        for r in file.nodes {
            if r.id >= len || nodes[r.id].is_some() {
                return Err(Error::InvalidDecomposition(format!("node ids must be 0..{len}, each once")));
            }
            nodes[r.id] = Some(DecompNode {
                parent: r.parent,
                children: r.children,
                leaf: r.leaf,
            });
        }
        RankDecomposition::new(nodes.into_iter().map(|t| t.expect("filled")).collect(), file.root)
    }
}
