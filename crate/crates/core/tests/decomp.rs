use proptest::prelude::*;
use wllab_core::decomp::{
    balance, caterpillar, exact_rank_width, exact_rank_width_bounded, height_bound, treewidth_exact, validate, width,
    DecompNode, RankDecomposition, ViolationKind,
};
use wllab_core::generators::{gen_complete, gen_cycle, gen_distance_hereditary, gen_path, gen_random, SplitMix64};
use wllab_core::Graph;

/// Rank of the bipartite adjacency between `a` and its complement, by plain
/// Gaussian elimination on boolean rows.
fn brute_cut_rank(g: &Graph, a: &[usize]) -> usize {
    let b: Vec<usize> = (0..g.n()).filter(|v| !a.contains(v)).collect();
    let mut rows: Vec<Vec<bool>> = a.iter().map(|&u| b.iter().map(|&v| g.adjacent(u, v)).collect()).collect();
    let mut rank = 0;
    for col in 0..b.len() {
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r][col]) {
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][col] {
                    let pivot = rows[rank].clone();
                    rows[r].iter_mut().zip(pivot).for_each(|(x, y)| *x ^= y);
                }
            }
            rank += 1;
        }
    }
    rank
}

#[derive(Clone)]
enum Tree {
    Leaf(usize),
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Tree::Leaf(v) => out.push(*v),
            Tree::Node(a, b) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }

    fn width(&self, g: &Graph) -> usize {
        let mut s = Vec::new();
        self.leaves(&mut s);
        let here = brute_cut_rank(g, &s);
        match self {
            Tree::Leaf(_) => here,
            Tree::Node(a, b) => here.max(a.width(g)).max(b.width(g)),
        }
    }

    /// Every tree obtained by hanging a new leaf `v` above some node.
    fn insertions(&self, v: usize) -> Vec<Tree> {
        let mut out = vec![Tree::Node(Box::new(self.clone()), Box::new(Tree::Leaf(v)))];
        if let Tree::Node(a, b) = self {
            for a2 in a.insertions(v) {
                out.push(Tree::Node(Box::new(a2), b.clone()));
            }
            for b2 in b.insertions(v) {
                out.push(Tree::Node(a.clone(), Box::new(b2)));
            }
        }
        out
    }
}

/// Rank-width by enumerating every rooted binary tree on the vertex set.
fn brute_rank_width(g: &Graph) -> usize {
    let mut trees = vec![Tree::Leaf(0)];
    for v in 1..g.n() {
        trees = trees.iter().flat_map(|t| t.insertions(v)).collect();
    }
    trees.iter().map(|t| t.width(g)).min().unwrap()
}

#[test]
fn exact_rank_width_examples() {
    assert_eq!(exact_rank_width(&Graph::empty(1)).unwrap().0, 0);
    assert_eq!(exact_rank_width(&Graph::empty(5)).unwrap().0, 0);
    for n in 2..=8 {
        assert_eq!(exact_rank_width(&gen_complete(n)).unwrap().0, 1, "K_{n}");
    }
    assert_eq!(exact_rank_width(&gen_path(4)).unwrap().0, 1);
    assert_eq!(exact_rank_width(&gen_cycle(4)).unwrap().0, 1);
    assert_eq!(exact_rank_width(&gen_cycle(5)).unwrap().0, 2);
    assert!(exact_rank_width(&Graph::empty(0)).is_err());
    assert!(exact_rank_width(&Graph::empty(13)).is_err());
    assert!(exact_rank_width_bounded(&Graph::empty(13), 13).is_ok());
}

#[test]
fn exact_rank_width_witness_is_valid_and_optimal() {
    for seed in 0..40 {
        let n = 1 + seed as usize % 9;
        let g = gen_random(n, 0.5, seed);
        let (rw, d) = exact_rank_width(&g).unwrap();
        assert!(validate(&g, &d).is_ok());
        assert_eq!(width(&g, &d).unwrap().width, rw);
    }
}

#[test]
fn exact_rank_width_matches_tree_enumeration() {
    for seed in 0..60 {
        let n = 1 + seed as usize % 7;
        let g = gen_random(n, 0.3 + 0.1 * (seed % 5) as f64, seed);
        assert_eq!(exact_rank_width(&g).unwrap().0, brute_rank_width(&g), "{g:?}");
    }
}

#[test]
fn caterpillar_widths() {
    let c5 = gen_cycle(5);
    let d = caterpillar(&[0, 1, 2, 3, 4]).unwrap();
    assert!(validate(&c5, &d).is_ok());
    let r = width(&c5, &d).unwrap();
    assert_eq!(r.width, 2);
    assert_eq!(r.node_count, 9);
    assert_eq!(r.height, 4);
    let p = gen_path(6);
    assert_eq!(width(&p, &caterpillar(&[0, 1, 2, 3, 4, 5]).unwrap()).unwrap().width, 1);
    assert!(caterpillar(&[]).is_err());
}

#[test]
fn validation_reports_each_violation() {
    let g = gen_path(3);
    let kinds = |d: &RankDecomposition| -> Vec<ViolationKind> {
        validate(&g, d).err().unwrap_or_default().into_iter().map(|v| v.kind).collect()
    };
    // vertex 2 missing and vertex 1 twice
    let d = RankDecomposition::new(
        vec![
            DecompNode::internal(None, vec![1, 2]),
            DecompNode::leaf(Some(0), 0),
            DecompNode::internal(Some(0), vec![3, 4]),
            DecompNode::leaf(Some(2), 1),
            DecompNode::leaf(Some(2), 1),
        ],
        0,
    )
    .unwrap();
    let k = kinds(&d);
    assert!(k.contains(&ViolationKind::ChildrenIntersect));
    assert!(k.contains(&ViolationKind::RootCoverage));
    assert!(k.contains(&ViolationKind::LeafMap));
    // ternary root
    let d = RankDecomposition::new(
        vec![
            DecompNode::internal(None, vec![1, 2, 3]),
            DecompNode::leaf(Some(0), 0),
            DecompNode::leaf(Some(0), 1),
            DecompNode::leaf(Some(0), 2),
        ],
        0,
    )
    .unwrap();
    assert_eq!(kinds(&d), vec![ViolationKind::NotBinary]);
    // a leaf holding two vertices
    let mut two = DecompNode::leaf(Some(0), 1);
    two.leaf.push(2);
    let d = RankDecomposition::new(vec![DecompNode::internal(None, vec![1, 2]), DecompNode::leaf(Some(0), 0), two], 0)
        .unwrap();
    let v = validate(&g, &d).unwrap_err();
    assert_eq!(v[0].kind, ViolationKind::NonSingletonLeaf);
    assert_eq!(v[0].node, Some(2));
    assert_eq!(v[0].message, "non-singleton leaf");
    // a broken parent link
    let d = RankDecomposition::new(
        vec![DecompNode::internal(None, vec![1, 2]), DecompNode::leaf(Some(0), 0), DecompNode::leaf(None, 1)],
        0,
    )
    .unwrap();
    assert!(kinds(&d).contains(&ViolationKind::Structure));
    assert!(RankDecomposition::new(vec![DecompNode::leaf(None, 0)], 3).is_err());
    assert!(width(&g, &d).is_err());
}

#[test]
fn json_round_trip() {
    let g = gen_random(7, 0.5, 9);
    let (_, d) = exact_rank_width(&g).unwrap();
    let j = d.to_json();
    assert!(j["root"].is_u64());
    assert_eq!(RankDecomposition::from_json(&j).unwrap(), d);
    let text = r#"{"root":0,"nodes":[{"id":0,"parent":null,"children":[1,2],"leaf":null},
        {"id":1,"parent":0,"children":[],"leaf":0},{"id":2,"parent":0,"children":[],"leaf":1}]}"#;
    let d = RankDecomposition::from_json(&serde_json::from_str(text).unwrap()).unwrap();
    assert!(validate(&gen_path(2), &d).is_ok());
}

#[test]
fn balancing_long_caterpillars() {
    for g in [gen_path(8), gen_cycle(12), gen_path(40)] {
        let n = g.n();
        let order: Vec<usize> = (0..n).collect();
        let d = caterpillar(&order).unwrap();
        let before = width(&g, &d).unwrap();
        let b = balance(&g, &d).unwrap();
        assert!(validate(&g, &b).is_ok());
        let after = width(&g, &b).unwrap();
        assert!((after.height as f64) <= height_bound(n), "n={n} height {}", after.height);
        assert!(after.width <= 2 * before.width);
        assert!(after.height < before.height);
    }
}

#[test]
fn treewidth_examples() {
    assert_eq!(treewidth_exact(&Graph::empty(4)).unwrap(), 0);
    assert_eq!(treewidth_exact(&gen_path(7)).unwrap(), 1);
    assert_eq!(treewidth_exact(&gen_cycle(7)).unwrap(), 2);
    assert_eq!(treewidth_exact(&gen_complete(6)).unwrap(), 5);
    let grid = Graph::from_edges(
        9,
        (0..9usize).flat_map(|v| {
            let mut e = Vec::new();
            if v % 3 < 2 {
                e.push((v, v + 1));
            }
            if v < 6 {
                e.push((v, v + 3));
            }
            e
        }),
    )
    .unwrap();
    assert_eq!(treewidth_exact(&grid).unwrap(), 3);
    let petersen = Graph::from_edges(
        10,
        [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (6, 9), (6, 8), (5, 8)],
    )
    .unwrap();
    assert_eq!(treewidth_exact(&petersen).unwrap(), 4);
    assert!(treewidth_exact(&Graph::empty(17)).is_err());
}

#[test]
fn distance_hereditary_recipes_have_width_one() {
    for seed in 0..20 {
        let dh = gen_distance_hereditary(12, seed);
        let d = dh.decomposition();
        assert!(validate(&dh.graph, &d).is_ok());
        assert!(width(&dh.graph, &d).unwrap().width <= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn balance_keeps_validity_height_and_width(n in 1usize..=24, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let order = SplitMix64::new(seed).permutation(n);
        let d = caterpillar(&order).unwrap();
        let w = width(&g, &d).unwrap().width;
        let b = balance(&g, &d).unwrap();
        prop_assert!(validate(&g, &b).is_ok());
        let r = width(&g, &b).unwrap();
        prop_assert!(r.width <= 2 * w);
        prop_assert!(r.height as f64 <= height_bound(n));
    }

    #[test]
    fn balancing_an_optimal_tree(n in 1usize..=9, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let (rw, d) = exact_rank_width(&g).unwrap();
        let b = balance(&g, &d).unwrap();
        prop_assert!(width(&g, &b).unwrap().width <= 2 * rw);
    }
}
