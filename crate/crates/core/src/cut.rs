//! Cut matrices, cut-rank and the neighborhood equivalence across a cut.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf2::{Gf2Matrix, Reducer};
use crate::graph::{Graph, Vertex, VertexSet};

/// Bipartite adjacency between `x` (rows, ascending) and its complement
/// (columns, ascending).
pub fn cut_matrix(g: &Graph, x: &VertexSet) -> Gf2Matrix {
    let rows = x.to_vec();
    let cols = x.complement().to_vec();
    let mut col_index = vec![usize::MAX; g.n()];
    for (i, &w) in cols.iter().enumerate() {
        col_index[w] = i;
    }
    let mut m = Gf2Matrix::zeros(rows.len(), cols.len());
    for (r, &v) in rows.iter().enumerate() {
        for &w in g.neighbors(v) {
            if col_index[w] != usize::MAX {
                m.set(r, col_index[w], true);
            }
        }
    }
    m
}

pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    m.rank()
}

pub fn cut_rank(g: &Graph, x: &VertexSet) -> usize {
    cut_matrix(g, x).rank()
}

/// Row of `v` in the cut matrix of `x`: adjacency to each vertex of the
/// complement, in ascending order.
pub fn neighborhood_vector(g: &Graph, x: &VertexSet, v: Vertex) -> Result<Vec<bool>> {
    if !x.contains(v) {
        return Err(Error::NotInSet(v));
    }
    Ok(x.complement().iter().map(|w| g.adjacent(v, w)).collect())
}

/// Blocks of vertices of `x` with identical neighborhoods outside `x`,
/// ordered by minimum vertex.
pub fn approx_classes(g: &Graph, x: &VertexSet) -> Vec<Vec<Vertex>> {
    let m = cut_matrix(g, x);
    let mut blocks: BTreeMap<&[u64], Vec<Vertex>> = BTreeMap::new();
    for (r, v) in x.iter().enumerate() {
        blocks.entry(m.row(r)).or_default().push(v);
    }
    let mut out: Vec<_> = blocks.into_values().collect();
    out.sort_by_key(|b| b[0]);
    out
}

/// Greedy basis of `vec_X(x)`: members of `x` in ascending order, keeping
/// each whose neighborhood vector is independent of those kept before.
/// Vertices in `forced` are offered first (in the given order).
pub(crate) fn greedy_basis(g: &Graph, x: &VertexSet, forced: &[Vertex], preferred: &[Vertex]) -> Vec<Vertex> {
    let m = cut_matrix(g, x);
    let members = x.to_vec();
    let mut row_of = vec![usize::MAX; g.n()];
    for (r, &v) in members.iter().enumerate() {
        row_of[v] = r;
    }
    let mut reducer = Reducer::new(m.cols().div_ceil(64));
    let mut chosen = Vec::new();
    let order = forced.iter().chain(preferred).chain(members.iter());
    for &v in order {
        if row_of[v] == usize::MAX || chosen.contains(&v) {
            continue;
        }
        if reducer.insert(m.row(row_of[v])) {
            chosen.push(v);
        }
    }
    chosen
}

/// Cut-rank table for every subset of a graph with at most 25 vertices,
/// indexed by bitmask.
pub fn cut_rank_table(g: &Graph) -> Vec<u8> {
    let n = g.n();
    assert!(n <= 25, "cut-rank table limited to 25 vertices");
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    (0..=full)
        .map(|s| mask_cut_rank(&nbr, s, full) as u8)
        .collect()
}

/// Cut-rank of the vertex mask `s` given neighbor masks.
pub(crate) fn mask_cut_rank(nbr: &[u32], s: u32, full: u32) -> usize {
    let comp = full & !s;
    let mut basis: Vec<u32> = Vec::new();
    let mut rest = s;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut row = nbr[v] & comp;
        for &b in &basis {
            row = row.min(row ^ b);
        }
        if row != 0 {
            basis.push(row);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}
