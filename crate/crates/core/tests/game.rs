use proptest::prelude::*;
use wllab_core::decomp::{balance, caterpillar};
use wllab_core::game::*;
use wllab_core::generators::{all_distance_hereditary, all_graphs, gen_cycle, gen_distance_hereditary, gen_path, SplitMix64};
use wllab_core::iso::are_isomorphic;
use wllab_core::Graph;

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges.iter().copied()).unwrap()
}

/// Duplicator survival by plain recursion over every position, with no
/// memo and no pebble symmetry.
fn naive_survives(g: &Graph, h: &Graph, pebbles: &[Option<Pair>], rounds: usize) -> bool {
    let placed: Vec<Pair> = pebbles.iter().flatten().copied().collect();
    if spoiler_wins(g, h, &placed) {
        return false;
    }
    if rounds == 0 {
        return true;
    }
    let n = g.n();
    let perms = permutations(n);
    (0..pebbles.len()).all(|i| {
        perms.iter().any(|f| {
            (0..n).all(|v| {
                let mut next = pebbles.to_vec();
                next[i] = Some((v, f[v]));
                naive_survives(g, h, &next, rounds - 1)
            })
        })
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn winning_positions() {
    let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
    let p3 = gen_path(3);
    assert!(!spoiler_wins(&k3, &k3, &[(0, 0), (1, 1)]));
    assert!(spoiler_wins(&k3, &p3, &[(0, 0), (2, 2)]));
    assert!(spoiler_wins(&k3, &k3, &[(0, 0), (0, 1)]));
    let c = Graph::empty(2).with_colors(vec![0, 1]).unwrap();
    assert!(spoiler_wins(&c, &Graph::empty(2), &[(1, 1)]));
    assert_eq!(GameState::new(&k3, &gen_path(4), 2).status(), Status::SpoilerWins);
}

#[test]
fn moves_follow_the_phases() {
    let g = gen_path(3);
    let mut s = GameState::new(&g, &g, 2);
    assert!(s.clone().apply(Move::Place(0, 1)).is_err());
    assert_eq!(s.apply(Move::Pickup(1)).unwrap(), Status::Continues);
    assert_eq!(s.phase(), Phase::DuplicatorBijection);
    assert!(s.clone().apply(Move::Bijection(vec![0, 0, 1])).is_err());
    s.apply(Move::Bijection(vec![2, 1, 0])).unwrap();
    assert!(s.clone().apply(Move::Place(0, 1)).is_err());
    s.apply(Move::Place(1, 0)).unwrap();
    assert_eq!(s.placed(), vec![(0, 2)]);
    assert_eq!(s.round(), 1);
    assert!(s.clone().with_pebbles(&[(5, (0, 0))]).is_err());
}

#[test]
fn survival_examples() {
    let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
    for r in 0..4 {
        assert!(duplicator_survives(&k3, &k3, 2, r, &[]).unwrap());
    }
    assert!(!duplicator_survives(&k3, &gen_path(3), 2, 3, &[]).unwrap());
    let two_triangles = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
    for r in 1..=4 {
        assert!(duplicator_survives(&gen_cycle(6), &two_triangles, 2, r, &[]).unwrap());
    }
    assert!(!duplicator_survives(&gen_cycle(6), &two_triangles, 3, 4, &[]).unwrap());
    assert!(!duplicator_survives(&k3, &gen_path(4), 2, 1, &[]).unwrap());
}

#[test]
fn survival_matches_plain_recursion() {
    let graphs: Vec<Graph> = (1..=3).flat_map(all_graphs).collect();
    for g in &graphs {
        for h in graphs.iter().filter(|h| h.n() == g.n()) {
            for pebbles in 1..=2 {
                for r in 0..=3 {
                    assert_eq!(
                        duplicator_survives(g, h, pebbles, r, &[]).unwrap(),
                        naive_survives(g, h, &vec![None; pebbles], r),
                        "{g:?} {h:?} {pebbles} {r}"
                    );
                }
            }
        }
    }
}

#[test]
fn game_matches_refinement_on_small_graphs() {
    let graphs: Vec<Graph> = (1..=4).flat_map(all_graphs).collect();
    for (i, g) in graphs.iter().enumerate() {
        for h in &graphs[i..] {
            for k in 1..=2 {
                for r in 1..=3 {
                    assert!(game_wl_agreement(g, h, k, r).unwrap(), "{g:?} {h:?} k={k} r={r}");
                }
            }
        }
    }
    assert!(game_wl_agreement(&gen_path(3), &gen_path(4), 1, 1).unwrap());
}

#[test]
fn bisection_examples() {
    // an edge in g whose image is a non-edge: the starting position is won
    let g = gen_path(2);
    let h = Graph::empty(2);
    let mut dup = HeuristicDuplicator::new(2);
    let r = connectivity_attack(&g, &h, &[(0, 0), (1, 1)], 0, 1, &mut dup).unwrap();
    assert!(r.won);
    assert_eq!(r.placements, 0);

    let p5 = gen_path(5);
    let split = graph(5, &[(0, 1), (2, 3), (3, 4)]);
    let mut dup = ExhaustiveDuplicator::new(&p5, &split, 3).unwrap();
    let r = connectivity_attack(&p5, &split, &[(0, 0), (4, 4)], 0, 1, &mut dup).unwrap();
    assert!(r.won);
    assert!(r.placements <= 3, "{}", r.placements);
    assert!(r.rounds.iter().all(|x| x.pickup < 3));

    assert!(connectivity_attack(&p5, &split, &[(0, 0), (0, 0)], 0, 1, &mut HeuristicDuplicator::new(5)).is_err());
    assert!(connectivity_attack(&p5, &split, &[(0, 0), (4, 4)], 0, 0, &mut HeuristicDuplicator::new(5)).is_err());
    assert!(connectivity_attack(&p5, &split, &[(0, 0), (1, 1)], 0, 1, &mut HeuristicDuplicator::new(5)).is_err());
}

#[test]
fn strategy_examples() {
    let g = graph(4, &[(0, 1), (1, 2), (0, 2)]);
    let h = graph(4, &[(0, 1), (1, 2)]);
    let d = caterpillar(&[0, 1, 2, 3]).unwrap();
    for finisher in [true, false] {
        let mut dup = ExhaustiveDuplicator::new(&g, &h, 9).unwrap();
        let t = spoiler_rankwidth_strategy_with(&g, &h, &d, &mut dup, finisher).unwrap();
        assert_eq!(t.outcome, StrategyOutcome::SpoilerWins);
        assert!(t.budget.pebbles_used_max <= 9);
        assert_eq!(t.decomposition_width, 1);
        assert_eq!(t.isomorphic, Some(false));
    }

    let h = g.permuted(&[2, 0, 3, 1]);
    let mut dup = ExhaustiveDuplicator::new(&g, &h, 9).unwrap();
    let t = spoiler_rankwidth_strategy(&g, &h, &d, &mut dup).unwrap();
    assert_eq!(t.outcome, StrategyOutcome::GivesUp);
    assert_eq!(t.isomorphic, Some(true));

    let t = spoiler_rankwidth_strategy(&g, &gen_path(3), &d, &mut HeuristicDuplicator::new(4)).unwrap();
    assert_eq!(t.outcome, StrategyOutcome::SpoilerWins);
    assert_eq!(t.budget.rounds_used, 0);
    assert!(spoiler_rankwidth_strategy(&g, &h, &caterpillar(&[0, 1, 2]).unwrap(), &mut HeuristicDuplicator::new(4)).is_err());
}

#[test]
fn strategy_beats_exhaustive_duplicator_on_distance_hereditary_pairs() {
    for n in 3..=5 {
        let all = all_distance_hereditary(n);
        for a in &all {
            let d = balance(&a.graph, &a.decomposition()).unwrap();
            for b in all.iter().filter(|b| !std::ptr::eq(*b, a)) {
                for finisher in [true, false] {
                    let mut dup = ExhaustiveDuplicator::new(&a.graph, &b.graph, 9).unwrap();
                    let t = spoiler_rankwidth_strategy_with(&a.graph, &b.graph, &d, &mut dup, finisher).unwrap();
                    assert_eq!(t.outcome, StrategyOutcome::SpoilerWins, "{:?}", t.reason);
                    assert!(t.budget.pebbles_used_max <= 9);
                    assert!(t.budget.main_rounds <= t.main_round_limit);
                }
            }
        }
    }
}

#[test]
fn transcripts_replay() {
    for seed in 0..20 {
        let a = gen_distance_hereditary(6, seed);
        let b = gen_distance_hereditary(6, seed + 500);
        if are_isomorphic(&a.graph, &b.graph) {
            continue;
        }
        let d = balance(&a.graph, &a.decomposition()).unwrap();
        let t = spoiler_rankwidth_strategy_with(&a.graph, &b.graph, &d, &mut HeuristicDuplicator::new(6), false).unwrap();
        let mut script = ScriptedDuplicator::new(t.bijections());
        assert_eq!(spoiler_rankwidth_strategy_with(&a.graph, &b.graph, &d, &mut script, false).unwrap(), t);

        let mut state = GameState::new(&a.graph, &b.graph, t.budget.pebbles_used_max);
        let mut status = Status::Continues;
        for r in &t.rounds {
            state.apply(Move::Pickup(r.pickup)).unwrap();
            state.apply(Move::Bijection(r.bijection.clone())).unwrap();
            status = state.apply(Move::Place(r.pickup, r.placed.0)).unwrap();
        }
        assert_eq!(status == Status::SpoilerWins, t.outcome == StrategyOutcome::SpoilerWins);
    }
}

#[test]
fn rounds_grow_with_log_n() {
    let mut points = Vec::new();
    for n in 6..=16 {
        let mut seed = n as u64 * 1000;
        let mut worst = 0;
        for _ in 0..4 {
            let (a, b) = loop {
                let a = gen_distance_hereditary(n, seed);
                let b = gen_distance_hereditary(n, seed + 1);
                seed += 2;
                if !are_isomorphic(&a.graph, &b.graph) {
                    break (a, b);
                }
            };
            let d = balance(&a.graph, &a.decomposition()).unwrap();
            let t = spoiler_rankwidth_strategy_with(&a.graph, &b.graph, &d, &mut HeuristicDuplicator::new(n), false).unwrap();
            assert_eq!(t.outcome, StrategyOutcome::SpoilerWins, "n={n} {:?}", t.reason);
            assert!(t.budget.pebbles_used_max <= 9);
            worst = worst.max(t.budget.rounds_used);
        }
        points.push(((n as f64).log2(), worst as f64));
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let slope = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / points.iter().map(|&(x, _)| (x - mx).powi(2)).sum::<f64>();
    assert!(slope <= 10.0, "slope {slope} over {points:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bisection_stays_within_log_n(len in 2usize..=12, cut in 0usize..11, seed in any::<u64>()) {
        // a path in g, and in h the same path with one edge moved elsewhere
        let n = len;
        let cut = cut % (n - 1);
        let g = gen_path(n);
        let mut edges: Vec<(usize, usize)> = (0..n - 1).filter(|&i| i != cut).map(|i| (i, i + 1)).collect();
        let chords: Vec<(usize, usize)> = (0..n)
            .flat_map(|x| (x + 2..n).map(move |y| (x, y)))
            .filter(|&(x, y)| x > cut || y <= cut)
            .collect();
        if !chords.is_empty() {
            edges.push(chords[SplitMix64::new(seed).below(chords.len())]);
        }
        let h = Graph::from_edges(n, edges).unwrap();
        let r = connectivity_attack(&g, &h, &[(0, 0), (n - 1, n - 1)], 0, 1, &mut HeuristicDuplicator::new(n)).unwrap();
        prop_assert!(r.won);
        prop_assert!(r.placements as f64 <= (n as f64).log2() + 1.0);
    }
}
