//! Isomorphism testing and canonical forms by individualization-refinement.
//!
//! Both searches refine to the coarsest equitable coloring, branch on the
//! first smallest non-singleton cell and recurse. Canonical forms keep the
//! least certificate over all leaves (no automorphism pruning), which is
//! fine for the handful of vertices they are used on. Isomorphism search
//! refines the two graphs jointly, so ids stay comparable, and fails a branch
//! as soon as the color histograms differ.

use crate::graph::{Graph, Vertex};
use crate::rank::rank_owned;

/// Coarsest equitable refinement of the given colorings, ranked jointly.
fn equitable(graphs: &[&Graph], mut colors: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let mut count = distinct(&colors);
    loop {
        let sigs: Vec<Vec<Vec<u32>>> = graphs
            .iter()
            .zip(&colors)
            .map(|(g, c)| {
                (0..g.n())
                    .map(|v| {
                        let mut s: Vec<u32> = g.neighbors(v).iter().map(|&w| c[w]).collect();
                        s.sort_unstable();
                        s.insert(0, c[v]);
                        s
                    })
                    .collect()
            })
            .collect();
        let (next, next_count) = rank_owned(&sigs);
        colors = next;
        if next_count == count {
            return colors;
        }
        count = next_count;
    }
}

fn distinct(colors: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colors.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn base_colors(graphs: &[&Graph]) -> Vec<Vec<u32>> {
    let keys: Vec<Vec<u32>> = graphs.iter().map(|g| g.colors().to_vec()).collect();
    rank_owned(&keys).0
}

/// Smallest cell of size at least two (least color on ties) and its members.
fn target_cell(colors: &[u32]) -> Option<(u32, Vec<Vertex>)> {
    let mut sizes = std::collections::BTreeMap::new();
    for &c in colors {
        *sizes.entry(c).or_insert(0usize) += 1;
    }
    let (&c, _) = sizes.iter().filter(|(_, &s)| s > 1).min_by_key(|(&c, &s)| (s, c))?;
    Some((c, (0..colors.len()).filter(|&v| colors[v] == c).collect()))
}

/// Splits `v` off its cell: it keeps a color just below the rest.
fn individualized(colors: &[u32], v: Vertex) -> Vec<u32> {
    colors
        .iter()
        .enumerate()
        .map(|(u, &c)| 2 * c + u32::from(u != v))
        .collect()
}

pub type CanonicalKey = (usize, Vec<u32>, Vec<(Vertex, Vertex)>);

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// The relabeled graph: vertex `v` of the input becomes `labeling[v]`.
    pub graph: Graph,
    pub labeling: Vec<Vertex>,
}

impl CanonicalForm {
    /// Equal for two graphs exactly when they are isomorphic.
    pub fn key(&self) -> CanonicalKey {
        (self.graph.n(), self.graph.colors().to_vec(), self.graph.edges().collect())
    }
}

fn certificate(g: &Graph, labeling: &[Vertex]) -> (CanonicalKey, Graph) {
    let h = g.permuted(labeling);
    let key = (h.n(), h.colors().to_vec(), h.edges().collect());
    (key, h)
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    // The base colors are part of the key, so they only need to order cells.
    let start = equitable(&[g], base_colors(&[g])).remove(0);
    let mut best: Option<(CanonicalKey, Graph, Vec<Vertex>)> = None;
    canon_search(g, start, &mut best);
    let (_, graph, labeling) = best.expect("at least one leaf");
    CanonicalForm { graph, labeling }
}

fn canon_search(g: &Graph, colors: Vec<u32>, best: &mut Option<(CanonicalKey, Graph, Vec<Vertex>)>) {
    match target_cell(&colors) {
        None => {
            // discrete: colors are a permutation of 0..n
            let labeling: Vec<Vertex> = colors.iter().map(|&c| c as Vertex).collect();
            let (key, h) = certificate(g, &labeling);
            if best.as_ref().map_or(true, |(k, _, _)| key < *k) {
                *best = Some((key, h, labeling));
            }
        }
        Some((_, cell)) => {
            for v in cell {
                let next = equitable(&[g], vec![individualized(&colors, v)]).remove(0);
                canon_search(g, next, best);
            }
        }
    }
}

pub fn are_isomorphic(g: &Graph, h: &Graph) -> bool {
    find_isomorphism(g, h).is_some()
}

/// A color-preserving isomorphism `g -> h` as `map[v]`, if one exists.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<Vec<Vertex>> {
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return None;
    }
    let start = equitable(&[g, h], base_colors(&[g, h]));
    let mut it = start.into_iter();
    let (cg, ch) = (it.next()?, it.next()?);
    iso_search(g, h, cg, ch)
}

fn sorted(c: &[u32]) -> Vec<u32> {
    let mut s = c.to_vec();
    s.sort_unstable();
    s
}

fn iso_search(g: &Graph, h: &Graph, cg: Vec<u32>, ch: Vec<u32>) -> Option<Vec<Vertex>> {
    if sorted(&cg) != sorted(&ch) {
        return None;
    }
    match target_cell(&cg) {
        None => {
            let mut by_color = vec![0; h.n()];
            for (w, &c) in ch.iter().enumerate() {
                by_color[c as usize] = w;
            }
            let map: Vec<Vertex> = cg.iter().map(|&c| by_color[c as usize]).collect();
            g.is_isomorphism(h, &map).then_some(map)
        }
        Some((c, cell)) => {
            let v = cell[0];
            for w in (0..h.n()).filter(|&w| ch[w] == c) {
                let mut next = equitable(&[g, h], vec![individualized(&cg, v), individualized(&ch, w)]);
                let nh = next.pop().expect("two graphs");
                let ng = next.pop().expect("two graphs");
                if let Some(map) = iso_search(g, h, ng, nh) {
                    return Some(map);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_cycle, gen_random, SplitMix64};

    #[test]
    fn canonical_forms_identify_relabelings() {
        for seed in 0..40 {
            let g = gen_random(7, 0.45, seed);
            let perm = SplitMix64::new(seed).permutation(7);
            let h = g.permuted(&perm);
            assert_eq!(canonical_form(&g).key(), canonical_form(&h).key());
            let map = find_isomorphism(&g, &h).unwrap();
            assert!(g.is_isomorphism(&h, &map));
        }
    }

    #[test]
    fn regular_non_isomorphic() {
        let c6 = gen_cycle(6);
        let two_triangles = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!are_isomorphic(&c6, &two_triangles));
        assert_ne!(canonical_form(&c6).key(), canonical_form(&two_triangles).key());
    }

    #[test]
    fn colors_matter() {
        let a = Graph::empty(2).with_colors(vec![0, 1]).unwrap();
        let b = Graph::empty(2).with_colors(vec![1, 1]).unwrap();
        assert!(!are_isomorphic(&a, &b));
        assert!(are_isomorphic(&a, &a.permuted(&[1, 0])));
    }
}
