use proptest::prelude::*;
use wllab_core::cut::cut_rank;
use wllab_core::generators::{gen_complete, gen_path, gen_random, SplitMix64};
use wllab_core::graph::{connected_components, Graph, VertexSet};
use wllab_core::split::{
    approx_violation, component_partition_mismatch, flip_components, flip_for_cut, flipped_graph, is_split_pair,
    nice_split_pairs, refines_approx, split_pair, verify_nice, FlipFunction, NiceCondition, NiceTriple, SplitPair,
};
use wllab_core::wl::individualize_and_refine;

fn set(n: usize, vs: &[usize]) -> VertexSet {
    VertexSet::from_vertices(n, vs.iter().copied())
}

fn star() -> Graph {
    Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
}

fn k22() -> Graph {
    Graph::from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
}

/// `g` recolored by `χ_{1,2}` after individualizing the split pair of `x`.
fn refined(g: &Graph, x: &VertexSet) -> Graph {
    let p = split_pair(g, x);
    let c = individualize_and_refine(g, &p.sequence(), 1, Some(2)).unwrap();
    g.clone().with_colors(c.colors).unwrap()
}

fn random_cut(n: usize, seed: u64) -> VertexSet {
    let mut rng = SplitMix64::new(seed);
    VertexSet::from_vertices(n, (0..n).filter(|_| rng.below(2) == 1))
}

#[test]
fn split_pair_examples() {
    let p = split_pair(&gen_complete(4), &set(4, &[0, 1]));
    assert_eq!((p.a, p.b), (vec![0], vec![2]));
    let p = split_pair(&Graph::empty(5), &set(5, &[1, 3]));
    assert!(p.a.is_empty() && p.b.is_empty());
    let p = split_pair(&star(), &set(4, &[1, 2]));
    assert_eq!((p.a.clone(), p.b.clone()), (vec![1], vec![0]));
    assert!(is_split_pair(&star(), &p));
    let p = split_pair(&star(), &VertexSet::full(4));
    assert!(p.a.is_empty() && p.b.is_empty());
    let bad = SplitPair { a: vec![1, 2], b: vec![0], x: set(4, &[1, 2]) };
    assert!(!is_split_pair(&star(), &bad));
}

#[test]
fn approx_checker_examples() {
    let k2 = gen_complete(2);
    let x = set(2, &[0]);
    assert!(refines_approx(&k2, &VertexSet::full(2), &[0, 0]));
    // both vertices share a color but only one side is populated per vertex
    assert!(refines_approx(&k2, &x, &[0, 0]));
    let p3 = gen_path(3);
    let x = set(3, &[0, 2]);
    assert!(refines_approx(&p3, &x, &[0, 0, 0]));
    let g = Graph::from_edges(4, [(0, 2)]).unwrap();
    let v = approx_violation(&g, &set(4, &[0, 1]), &[5, 5, 0, 0]).unwrap();
    assert_eq!((v.color, v.first, v.second), (5, 0, 1));
}

#[test]
fn flip_examples() {
    let g = k22();
    let x = set(4, &[0, 1]);
    let r = refined(&g, &x);
    let f = flip_for_cut(&r, &x).unwrap();
    assert_eq!(f.flipped.len(), 4);
    assert_eq!(flipped_graph(&r, &f).unwrap().edge_count(), 0);
    assert_eq!(flip_components(&r, &f).unwrap().len(), 4);

    let e = Graph::empty(4);
    assert!(flip_for_cut(&e, &x).unwrap().flipped.is_empty());
    assert_eq!(flip_components(&e, &FlipFunction::zero([0])).unwrap().len(), 4);
    let p = gen_path(5);
    assert!(flip_for_cut(&p, &VertexSet::full(5)).unwrap().flipped.is_empty());
    assert_eq!(flip_components(&p, &FlipFunction::zero([0])).unwrap().len(), 1);

    let k3 = gen_complete(3);
    let mut f = FlipFunction::zero([0]);
    assert_eq!(flipped_graph(&k3, &f).unwrap(), k3);
    f.set(0, 0);
    assert_eq!(flipped_graph(&k3, &f).unwrap().edge_count(), 0);
    assert!(flipped_graph(&k3.clone().with_colors(vec![0, 1, 0]).unwrap(), &f).is_err());
    // an uncolored path has mixed cross adjacency for the only color pair
    assert!(flip_for_cut(&gen_path(3), &set(3, &[0])).is_err());
}

#[test]
fn nice_examples() {
    let k4 = gen_complete(4);
    let full = VertexSet::full(4);
    let root = split_pair(&k4, &full);
    let t = nice_split_pairs(&k4, &set(4, &[0, 1]), &set(4, &[2, 3]), &root).unwrap();
    for c in [&t.child1, &t.child2] {
        assert_eq!((c.a.len(), c.b.len()), (1, 1));
    }
    assert!(t.child2.b.iter().filter(|v| t.child1.x.contains(**v)).all(|v| t.child1.a.contains(v)));
    assert!(verify_nice(&k4, &t).is_empty());

    let t = nice_split_pairs(&k4, &full, &VertexSet::new(4), &root).unwrap();
    assert!(t.child2.a.is_empty() && t.child2.b.is_empty());

    let e = Graph::empty(5);
    let t = nice_split_pairs(&e, &set(5, &[0, 1]), &set(5, &[2, 3, 4]), &split_pair(&e, &VertexSet::full(5))).unwrap();
    assert!(t.child1.sequence().is_empty() && t.child2.sequence().is_empty());
    assert!(nice_split_pairs(&k4, &set(4, &[0, 1]), &set(4, &[1, 2, 3]), &root).is_err());
}

#[test]
fn verify_nice_names_conditions() {
    let g = gen_path(6);
    let x = set(6, &[0, 1, 2, 3]);
    let parent = split_pair(&g, &x);
    let (x1, x2) = (set(6, &[0, 1]), set(6, &[2, 3]));
    let good = nice_split_pairs(&g, &x1, &x2, &parent).unwrap();
    assert!(verify_nice(&g, &good).is_empty());

    // the parent's A is {3}; a child pair for X_2 that picks 2 instead drops it
    assert_eq!(parent.a, vec![3]);
    let mut t = good.clone();
    t.child2.a = vec![2];
    t.child2.b = vec![1];
    assert!(verify_nice(&g, &t).contains(&NiceCondition::ParentBasisKept));

    let mut t = good.clone();
    t.child1.a.push(0);
    assert!(verify_nice(&g, &t).contains(&NiceCondition::SplitPairValidity));

    let t = NiceTriple { child2: split_pair(&g, &set(6, &[2])), ..good };
    assert!(verify_nice(&g, &t).contains(&NiceCondition::NotAPartition));
}

#[test]
fn component_mismatch_examples() {
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let h = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    let p = connected_components(&g);
    let q = connected_components(&h);
    let v = component_partition_mismatch(&g, &h, &p, &q, &[0, 1, 2, 3]).unwrap();
    assert!(v < 3);
    let gc = Graph::empty(2).with_colors(vec![0, 1]).unwrap();
    let hc = Graph::empty(2).with_colors(vec![0, 0]).unwrap();
    let singletons = vec![vec![0], vec![1]];
    assert_eq!(component_partition_mismatch(&gc, &hc, &singletons, &singletons, &[0, 1]).unwrap(), 1);
    assert!(component_partition_mismatch(&g, &g, &p, &p, &[0, 1, 2, 3]).is_err());
    assert!(component_partition_mismatch(&g, &h, &[vec![0]], &q, &[0, 1, 2, 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_pair_sizes_match_cut_rank(n in 1usize..=14, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let x = random_cut(n, seed);
        let sp = split_pair(&g, &x);
        prop_assert!(is_split_pair(&g, &sp));
        prop_assert_eq!(sp.a.len(), cut_rank(&g, &x));
        prop_assert_eq!(sp.b.len(), cut_rank(&g, &x));
    }

    #[test]
    fn individualized_split_pair_refines_both_sides(n in 1usize..=14, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let x = random_cut(n, seed);
        let r = refined(&g, &x);
        prop_assert!(refines_approx(&g, &x, r.colors()));
        let f = flip_for_cut(&r, &x).unwrap();
        for comp in flip_components(&r, &f).unwrap() {
            prop_assert!(comp.iter().all(|&v| x.contains(v)) || comp.iter().all(|&v| !x.contains(v)));
        }
    }

    #[test]
    fn flipping_twice_is_the_identity(n in 1usize..=10, p in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let colors: Vec<u32> = (0..n).map(|_| rng.below(3) as u32).collect();
        let g = gen_random(n, p, seed).with_colors(colors).unwrap();
        let mut f = FlipFunction::zero(0..3);
        for c in 0..3 {
            for d in c..3 {
                if rng.below(2) == 1 {
                    f.set(c, d);
                }
            }
        }
        prop_assert_eq!(flipped_graph(&flipped_graph(&g, &f).unwrap(), &f).unwrap(), g);
    }

    #[test]
    fn flips_preserve_isomorphisms(n in 1usize..=7, p in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let colors: Vec<u32> = (0..n).map(|_| rng.below(2) as u32).collect();
        let g = gen_random(n, p, seed).with_colors(colors).unwrap();
        let perm = rng.permutation(n);
        let h = g.permuted(&perm);
        let mut f = FlipFunction::zero(0..2);
        f.set(0, 1);
        if rng.below(2) == 1 {
            f.set(0, 0);
        }
        let (gf, hf) = (flipped_graph(&g, &f).unwrap(), flipped_graph(&h, &f).unwrap());
        prop_assert!(gf.is_isomorphism(&hf, &perm));
        for _ in 0..10 {
            let sigma = rng.permutation(n);
            prop_assert_eq!(g.is_isomorphism(&h, &sigma), gf.is_isomorphism(&hf, &sigma));
        }
    }

    #[test]
    fn nice_pairs_exist_below_any_split(n in 2usize..=12, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let mut rng = SplitMix64::new(seed ^ 7);
        let x = VertexSet::from_vertices(n, (0..n).filter(|_| rng.below(3) > 0));
        let x1 = VertexSet::from_vertices(n, x.iter().filter(|_| rng.below(2) == 1));
        let x2 = x.difference(&x1);
        let parent = split_pair(&g, &x);
        let t = nice_split_pairs(&g, &x1, &x2, &parent).unwrap();
        prop_assert!(verify_nice(&g, &t).is_empty());
    }
}
