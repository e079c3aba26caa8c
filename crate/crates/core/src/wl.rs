//! Weisfeiler–Leman refinement.
//!
//! Tuples of length `k` are stored as mixed-radix indices with the first
//! entry most significant, so index order is lexicographic tuple order.
//! Colors are canonical: at every round each tuple's signature is ranked
//! among the distinct signatures of all graphs refined together, which makes
//! ids comparable across graphs and machines.
//!
//! `k = 1` is Color Refinement over single vertices. Round 1 is always the
//! initial coloring.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Color, Graph, Side, Vertex};
use crate::rank::{rank_by, rank_owned};

pub const DEFAULT_TUPLE_BUDGET: u64 = 1 << 27;

/// Largest permitted `n^k`; `WLLAB_TUPLE_BUDGET` overrides the default.
pub fn tuple_budget() -> u64 {
    std::env::var("WLLAB_TUPLE_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_TUPLE_BUDGET)
}

fn tuple_count(n: usize, k: usize) -> Result<usize> {
    let budget = tuple_budget();
    let tuples = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if tuples > budget as u128 {
        return Err(Error::TupleBudget { n, k, tuples, budget });
    }
    Ok(tuples as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleColoring {
    pub k: usize,
    pub n: usize,
    pub round: usize,
    pub class_count: usize,
    pub stable: bool,
    pub colors: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<Side>>,
}

impl TupleColoring {
    pub fn index(&self, tuple: &[Vertex]) -> usize {
        assert_eq!(tuple.len(), self.k);
        tuple.iter().fold(0, |acc, &v| acc * self.n + v)
    }

    pub fn tuple(&self, mut index: usize) -> Vec<Vertex> {
        let mut t = vec![0; self.k];
        for slot in t.iter_mut().rev() {
            *slot = index % self.n;
            index /= self.n;
        }
        t
    }

    pub fn color_of(&self, tuple: &[Vertex]) -> u32 {
        self.colors[self.index(tuple)]
    }

    /// Color of the constant tuple `(v, ..., v)`.
    pub fn diagonal(&self, v: Vertex) -> u32 {
        let step: usize = (0..self.k).map(|i| self.n.pow(i as u32)).sum();
        self.colors[v * step]
    }

    /// Whether both colorings induce the same partition of the tuple space.
    pub fn same_partition(&self, other: &TupleColoring) -> bool {
        if self.colors.len() != other.colors.len() {
            return false;
        }
        let mut fwd = BTreeMap::new();
        let mut back = BTreeMap::new();
        self.colors.iter().zip(&other.colors).all(|(&a, &b)| {
            *fwd.entry(a).or_insert(b) == b && *back.entry(b).or_insert(a) == a
        })
    }

    /// Whether every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &TupleColoring) -> bool {
        let mut fwd = BTreeMap::new();
        self.colors
            .iter()
            .zip(&coarser.colors)
            .all(|(&a, &b)| *fwd.entry(a).or_insert(b) == b)
    }
}

fn vertex_count_check(graphs: &[&Graph]) -> Result<usize> {
    let n = graphs.first().map_or(0, |g| g.n());
    if graphs.iter().any(|g| g.n() != n) {
        return Err(Error::InvalidGraph("graphs refined together must have equal order".into()));
    }
    Ok(n)
}

/// Atomic type of every tuple: base colors of the entries, then for every
/// position pair `i < j` whether the entries are equal, adjacent or neither.
fn atomic_types(graphs: &[&Graph], k: usize) -> Result<(Vec<Vec<u32>>, usize)> {
    let n = vertex_count_check(graphs)?;
    let tuples = tuple_count(n, k)?;
    let radix = graphs
        .iter()
        .flat_map(|g| g.colors().iter().copied())
        .max()
        .map_or(1, |c| c as u128 + 1);
    let pattern_span = 3u128.checked_pow((k * (k - 1) / 2) as u32);
    let fits = pattern_span.and_then(|p| radix.checked_pow(k as u32).and_then(|c| c.checked_mul(p)));
    let Some(pattern_span) = pattern_span.filter(|_| fits.is_some()) else {
        return Err(Error::Budget(format!("atomic types for k = {k} with {radix} colors exceed 128 bits")));
    };
    if k == 1 {
        return Ok(rank_by(&vec![tuples; graphs.len()], |j, v| graphs[j].color(v)));
    }
    let key = |j: usize, index: usize| -> u128 {
        let g = graphs[j];
        let mut t = [0usize; 64];
        let mut rest = index;
        for slot in t[..k].iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        let mut colors = 0u128;
        for &v in &t[..k] {
            colors = colors * radix + g.color(v) as u128;
        }
        let mut pattern = 0u128;
        for i in 0..k {
            for jj in i + 1..k {
                let trit = if t[i] == t[jj] {
                    2
                } else if g.adjacent(t[i], t[jj]) {
                    1
                } else {
                    0
                };
                pattern = pattern * 3 + trit;
            }
        }
        colors * pattern_span + pattern
    };
    if k > 64 {
        return Err(Error::Budget("dimension above 64".into()));
    }
    Ok(rank_by(&vec![tuples; graphs.len()], key))
}

/// One refinement round for `k >= 2` over several graphs at once.
fn tuple_round(graphs: &[&Graph], k: usize, current: &[Vec<u32>]) -> (Vec<Vec<u32>>, usize) {
    let n = graphs[0].n();
    let tuples = current[0].len();
    let weights: Vec<usize> = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
    let digit = |t: usize, i: usize| t / weights[i] % n;
    let sub = |t: usize, i: usize, x: usize| t - digit(t, i) * weights[i] + x * weights[i];
    let lens = vec![tuples * n; graphs.len()];

    // prefix[j][t * n + x] ranks (c(t[0/x]), ..., c(t[i/x])) lexicographically
    let small = tuples * n <= crate::rank::CHUNK;
    let mut prefix: Vec<Vec<u32>> = current
        .iter()
        .map(|c| {
            if small {
                (0..tuples * n).map(|p| c[sub(p / n, 0, p % n)]).collect()
            } else {
                (0..tuples * n).into_par_iter().map(|p| c[sub(p / n, 0, p % n)]).collect()
            }
        })
        .collect();
    for i in 1..k {
        let (next, _) = rank_by(&lens, |j, p| {
            (prefix[j][p] as u64) << 32 | current[j][sub(p / n, i, p % n)] as u64
        });
        prefix = next;
    }
    for p in prefix.iter_mut() {
        if small {
            p.chunks_mut(n.max(1)).for_each(|m| m.sort_unstable());
        } else {
            p.par_chunks_mut(n).for_each(|m| m.sort_unstable());
        }
    }
    // signature: old color followed by the sorted multiset of vector ranks
    if small {
        let sigs: Vec<Vec<Vec<u32>>> = current
            .iter()
            .zip(&prefix)
            .map(|(c, p)| (0..tuples).map(|t| [&[c[t]][..], &p[t * n..(t + 1) * n]].concat()).collect())
            .collect();
        return rank_owned(&sigs);
    }
    let mut sig: Vec<Vec<u32>> = current.to_vec();
    let lens = vec![tuples; graphs.len()];
    let mut count = 0;
    for x in 0..n {
        let (next, c) = rank_by(&lens, |j, t| (sig[j][t] as u64) << 32 | prefix[j][t * n + x] as u64);
        sig = next;
        count = c;
    }
    if n == 0 {
        count = 0;
    }
    (sig, count)
}

/// One Color Refinement round over several graphs at once.
fn vertex_round(graphs: &[&Graph], current: &[Vec<u32>]) -> (Vec<Vec<u32>>, usize) {
    let sigs: Vec<Vec<Vec<u32>>> = graphs
        .iter()
        .zip(current)
        .map(|(g, c)| {
            (0..g.n())
                .into_par_iter()
                .with_min_len(1024)
                .map(|v| {
                    let mut s = Vec::with_capacity(g.degree(v) + 1);
                    s.extend(g.neighbors(v).iter().map(|&w| c[w]));
                    s.sort_unstable();
                    s.insert(0, c[v]);
                    s
                })
                .collect()
        })
        .collect();
    rank_owned(&sigs)
}

/// Lockstep refinement of several equal-order graphs sharing one color
/// dictionary.
pub struct JointRefiner<'a> {
    graphs: Vec<&'a Graph>,
    k: usize,
    colors: Vec<Vec<u32>>,
    round: usize,
    class_count: usize,
    stable: bool,
}

impl<'a> JointRefiner<'a> {
    /// Starts at round 1 (the initial coloring).
    pub fn new(graphs: Vec<&'a Graph>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("dimension must be at least 1".into()));
        }
        let (colors, class_count) = atomic_types(&graphs, k)?;
        Ok(JointRefiner {
            graphs,
            k,
            colors,
            round: 1,
            class_count,
            stable: false,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Refines once. Returns whether the joint partition changed.
    pub fn step(&mut self) -> bool {
        let (next, count) = if self.k == 1 {
            vertex_round(&self.graphs, &self.colors)
        } else {
            tuple_round(&self.graphs, self.k, &self.colors)
        };
        self.colors = next;
        self.round += 1;
        let changed = count != self.class_count;
        self.class_count = count;
        self.stable = !changed;
        changed
    }

    pub fn colors(&self, graph: usize) -> &[u32] {
        &self.colors[graph]
    }

    /// Per-vertex colors: the coloring itself for `k = 1`, the constant
    /// tuples otherwise.
    pub fn vertex_colors(&self, graph: usize) -> Vec<u32> {
        let n = self.graphs[graph].n();
        let step: usize = (0..self.k).map(|i| n.pow(i as u32)).sum();
        (0..n).map(|v| self.colors[graph][v * step]).collect()
    }

    /// Sorted `(color, count)` pairs of [`Self::vertex_colors`].
    pub fn vertex_histogram(&self, graph: usize) -> Vec<(u32, usize)> {
        histogram(self.vertex_colors(graph))
    }

    pub fn coloring(&self, graph: usize) -> TupleColoring {
        let g = self.graphs[graph];
        TupleColoring {
            k: self.k,
            n: g.n(),
            round: self.round,
            class_count: count_distinct(&self.colors[graph]),
            stable: self.stable,
            colors: self.colors[graph].clone(),
            sides: g.sides().map(<[Side]>::to_vec),
        }
    }
}

fn histogram(colors: impl IntoIterator<Item = u32>) -> Vec<(u32, usize)> {
    let mut h = BTreeMap::new();
    for c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h.into_iter().collect()
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

pub fn initial_coloring(g: &Graph, k: usize) -> Result<TupleColoring> {
    Ok(JointRefiner::new(vec![g], k)?.coloring(0))
}

/// Refines `c` once; ids are re-ranked within `g` alone.
pub fn refine_step(g: &Graph, c: &TupleColoring) -> Result<TupleColoring> {
    if c.n != g.n() || c.colors.len() != tuple_count(g.n(), c.k)? {
        return Err(Error::Precondition("coloring does not belong to graph".into()));
    }
    let mut r = JointRefiner {
        graphs: vec![g],
        k: c.k,
        colors: vec![c.colors.clone()],
        round: c.round,
        class_count: c.class_count,
        stable: false,
    };
    r.step();
    Ok(r.coloring(0))
}

/// Runs until the partition stops changing or `max_rounds` rounds have been
/// computed (`None` means until stable).
pub fn run_wl(g: &Graph, k: usize, max_rounds: Option<usize>) -> Result<TupleColoring> {
    let mut r = JointRefiner::new(vec![g], k)?;
    let mut previous = r.coloring(0);
    while max_rounds.map_or(true, |m| r.round() < m) {
        if !r.step() {
            // the new round repeats the previous partition
            previous.stable = true;
            previous.round = r.round();
            return Ok(TupleColoring {
                colors: r.colors(0).to_vec(),
                ..previous
            });
        }
        previous = r.coloring(0);
    }
    Ok(previous)
}

/// Color Refinement: the `k = 1` case of [`run_wl`]. Round 1 is the base
/// coloring; degrees first appear at round 2.
pub fn color_refinement(g: &Graph, max_rounds: Option<usize>) -> TupleColoring {
    run_wl(g, 1, max_rounds).expect("vertex colorings are always within budget")
}

/// Gives the vertex at position `i` of `s` a color of its own, distinct from
/// every other color and from the other positions.
pub fn individualize(g: &Graph, s: &[Vertex]) -> Result<Graph> {
    let mut pos = vec![0u32; g.n()];
    for (i, &v) in s.iter().enumerate() {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if pos[v] != 0 {
            return Err(Error::DuplicateVertex(v));
        }
        pos[v] = i as u32 + 1;
    }
    let stride = s.len() as u32 + 1;
    let colors = (0..g.n())
        .map(|v| {
            g.color(v)
                .checked_mul(stride)
                .and_then(|c| c.checked_add(pos[v]))
                .ok_or_else(|| Error::Budget("color ids overflow while individualizing".into()))
        })
        .collect::<Result<Vec<Color>>>()?;
    g.clone().with_colors(colors)
}

pub fn individualize_and_refine(g: &Graph, s: &[Vertex], k: usize, rounds: Option<usize>) -> Result<TupleColoring> {
    run_wl(&individualize(g, s)?, k, rounds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Distinguished,
    Equivalent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub round_of_separation: Option<usize>,
    pub rounds_run: usize,
    pub stable: bool,
}

impl Verdict {
    pub fn distinguished(&self) -> bool {
        self.outcome == Outcome::Distinguished
    }
}

/// Whether `k`-WL tells `g` and `h` apart within `max_rounds` rounds.
///
/// Both graphs are refined in lockstep with a shared dictionary. At each
/// round the per-vertex color histograms are compared: the coloring itself
/// for `k = 1`, the constant tuples `(v, ..., v)` for `k >= 2`. A difference
/// at round `r` is exactly a Spoiler win within `r` rounds of the bijective
/// `(k+1)`-pebble game started from an empty board.
pub fn distinguish(g: &Graph, h: &Graph, k: usize, max_rounds: Option<usize>) -> Result<Verdict> {
    if g.n() != h.n() {
        return Ok(Verdict {
            outcome: Outcome::Distinguished,
            round_of_separation: Some(0),
            rounds_run: 0,
            stable: false,
        });
    }
    let mut r = JointRefiner::new(vec![g, h], k)?;
    loop {
        if r.vertex_histogram(0) != r.vertex_histogram(1) {
            return Ok(Verdict {
                outcome: Outcome::Distinguished,
                round_of_separation: Some(r.round()),
                rounds_run: r.round(),
                stable: r.is_stable(),
            });
        }
        if r.is_stable() || max_rounds.is_some_and(|m| r.round() >= m) {
            return Ok(Verdict {
                outcome: Outcome::Equivalent,
                round_of_separation: None,
                rounds_run: r.round(),
                stable: r.is_stable(),
            });
        }
        r.step();
    }
}

/// Counts per color of the tuples lying entirely within one side of a
/// disjoint union. A coloring of a graph without side tags has the single
/// side `0`.
pub fn canonical_histogram(c: &TupleColoring, side: Side) -> Result<Vec<(u32, usize)>> {
    let Some(sides) = &c.sides else {
        return if side == 0 {
            Ok(histogram(c.colors.iter().copied()))
        } else {
            Err(Error::UnknownSide(side))
        };
    };
    if side > 1 {
        return Err(Error::UnknownSide(side));
    }
    let colors = c
        .colors
        .iter()
        .enumerate()
        .filter(|&(i, _)| c.tuple(i).iter().all(|&v| sides[v] == side))
        .map(|(_, &col)| col);
    Ok(histogram(colors))
}
