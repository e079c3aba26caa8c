//! The bijective pebble game: rules, exhaustive evaluation, Duplicator
//! models and a Spoiler strategy that plays along a rank decomposition.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::wl::{distinguish, individualize, JointRefiner};

pub type Pair = (Vertex, Vertex);

/// Whether the pebbled pairs fail to define a color-, equality- and
/// adjacency-preserving map.
pub fn spoiler_wins(g: &Graph, h: &Graph, pairs: &[Pair]) -> bool {
    pairs.iter().enumerate().any(|(i, &(v, w))| {
        g.color(v) != h.color(w)
            || pairs[..i]
                .iter()
                .any(|&(x, y)| (v == x) != (w == y) || g.adjacent(v, x) != h.adjacent(w, y))
    })
}

fn extends(g: &Graph, h: &Graph, pairs: &[Pair], (v, w): Pair) -> bool {
    g.color(v) == h.color(w)
        && pairs
            .iter()
            .all(|&(x, y)| (v == x) == (w == y) && g.adjacent(v, x) == h.adjacent(w, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    SpoilerPickup,
    DuplicatorBijection,
    SpoilerPlace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Pickup(usize),
    Bijection(Vec<Vertex>),
    Place(usize, Vertex),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    SpoilerWins,
    Continues,
}

/// A position of the game on `g` and `h` with a fixed number of pebble
/// pairs; moves are checked against the phase they belong to.
#[derive(Clone, Debug)]
pub struct GameState<'a> {
    pub g: &'a Graph,
    pub h: &'a Graph,
    pebbles: Vec<Option<Pair>>,
    round: usize,
    phase: Phase,
    held: Option<usize>,
    bijection: Vec<Vertex>,
}

impl<'a> GameState<'a> {
    pub fn new(g: &'a Graph, h: &'a Graph, pairs: usize) -> Self {
        GameState {
            g,
            h,
            pebbles: vec![None; pairs],
            round: 0,
            phase: Phase::SpoilerPickup,
            held: None,
            bijection: Vec::new(),
        }
    }

    pub fn with_pebbles(mut self, placed: &[(usize, Pair)]) -> Result<Self> {
        for &(i, (v, w)) in placed {
            if i >= self.pebbles.len() {
                return Err(Error::Precondition(format!("no pebble pair {i}")));
            }
            self.check_vertices(v, w)?;
            self.pebbles[i] = Some((v, w));
        }
        Ok(self)
    }

    fn check_vertices(&self, v: Vertex, w: Vertex) -> Result<()> {
        if v >= self.g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.g.n() });
        }
        if w >= self.h.n() {
            return Err(Error::VertexOutOfRange { vertex: w, n: self.h.n() });
        }
        Ok(())
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn pebbles(&self) -> &[Option<Pair>] {
        &self.pebbles
    }

    pub fn placed(&self) -> Vec<Pair> {
        self.pebbles.iter().flatten().copied().collect()
    }

    pub fn status(&self) -> Status {
        if self.g.n() != self.h.n() || spoiler_wins(self.g, self.h, &self.placed()) {
            Status::SpoilerWins
        } else {
            Status::Continues
        }
    }

    pub fn apply(&mut self, m: Move) -> Result<Status> {
        if self.status() == Status::SpoilerWins {
            return Err(Error::Precondition("the game is already over".into()));
        }
        match (self.phase, m) {
            (Phase::SpoilerPickup, Move::Pickup(i)) if i < self.pebbles.len() => {
                self.pebbles[i] = None;
                self.held = Some(i);
                self.round += 1;
                self.phase = Phase::DuplicatorBijection;
            }
            (Phase::DuplicatorBijection, Move::Bijection(f)) => {
                if !is_bijection(&f, self.h.n()) || f.len() != self.g.n() {
                    return Err(Error::Precondition("duplicator must choose a bijection".into()));
                }
                self.bijection = f;
                self.phase = Phase::SpoilerPlace;
            }
            (Phase::SpoilerPlace, Move::Place(i, v)) if Some(i) == self.held => {
                self.check_vertices(v, 0)?;
                self.pebbles[i] = Some((v, self.bijection[v]));
                self.held = None;
                self.phase = Phase::SpoilerPickup;
            }
            (phase, m) => return Err(Error::Precondition(format!("{m:?} is not legal in phase {phase:?}"))),
        }
        Ok(self.status())
    }
}

pub fn is_bijection(f: &[Vertex], n: usize) -> bool {
    let mut seen = vec![false; n];
    f.len() == n && f.iter().all(|&w| w < n && !std::mem::replace(&mut seen[w], true))
}

/// Kuhn's augmenting paths; returns the partner of each left vertex.
fn perfect_matching(n: usize, ok: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(v: usize, n: usize, ok: &dyn Fn(usize, usize) -> bool, seen: &mut [bool], right: &mut [usize]) -> bool {
        for w in 0..n {
            if ok(v, w) && !seen[w] {
                seen[w] = true;
                if right[w] == usize::MAX || augment(right[w], n, ok, seen, right) {
                    right[w] = v;
                    return true;
                }
            }
        }
        false
    }
    let mut right = vec![usize::MAX; n];
    for v in 0..n {
        if !augment(v, n, ok, &mut vec![false; n], &mut right) {
            return None;
        }
    }
    let mut left = vec![0; n];
    for (w, &v) in right.iter().enumerate() {
        left[v] = w;
    }
    Some(left)
}

/// The lexicographically least perfect matching, if any.
fn least_matching(n: usize, ok: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut fixed: Vec<usize> = Vec::new();
    perfect_matching(n, ok)?;
    for v in 0..n {
        let w = (0..n)
            .find(|&w| {
                ok(v, w) && !fixed.contains(&w) && {
                    let f = &fixed;
                    perfect_matching(n, &|x, y| match x.cmp(&v) {
                        std::cmp::Ordering::Less => f[x] == y,
                        std::cmp::Ordering::Equal => y == w,
                        std::cmp::Ordering::Greater => ok(x, y) && !f.contains(&y) && y != w,
                    })
                    .is_some()
                }
            })
            .expect("a perfect matching exists");
        fixed.push(w);
    }
    Some(fixed)
}

pub const DEFAULT_SOLVER_BUDGET: usize = 4_000_000;

/// Exhaustive game-tree evaluation with memoization on (set of pebbled
/// pairs, rounds left). Pebble identities do not matter, so a position is
/// the set of pairs on the board.
pub struct Solver<'a> {
    g: &'a Graph,
    h: &'a Graph,
    pebbles: usize,
    memo: HashMap<(Vec<u8>, u8), bool>,
    budget: usize,
}

impl<'a> Solver<'a> {
    pub fn new(g: &'a Graph, h: &'a Graph, pebbles: usize) -> Result<Self> {
        if g.n() != h.n() {
            return Err(Error::Precondition("the exhaustive solver needs equal orders".into()));
        }
        if g.n() > 15 || pebbles == 0 {
            return Err(Error::SizeBound { what: "exhaustive game search", n: g.n(), bound: 15 });
        }
        Ok(Solver { g, h, pebbles, memo: HashMap::new(), budget: DEFAULT_SOLVER_BUDGET })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    fn key(&self, pairs: &[Pair]) -> Vec<u8> {
        let n = self.g.n();
        let mut k: Vec<u8> = pairs.iter().map(|&(v, w)| (v * n + w) as u8).collect();
        k.sort_unstable();
        k.dedup();
        k
    }

    fn pairs(&self, key: &[u8]) -> Vec<Pair> {
        let n = self.g.n();
        key.iter().map(|&c| (c as usize / n, c as usize % n)).collect()
    }

    /// Whether Duplicator survives `rounds` more rounds from a legal
    /// position.
    pub fn survives(&mut self, pairs: &[Pair], rounds: usize) -> Result<bool> {
        if spoiler_wins(self.g, self.h, pairs) {
            return Ok(false);
        }
        let key = self.key(pairs);
        self.survive_key(key, rounds)
    }

    fn survive_key(&mut self, key: Vec<u8>, rounds: usize) -> Result<bool> {
        if rounds == 0 {
            return Ok(true);
        }
        if let Some(&b) = self.memo.get(&(key.clone(), rounds as u8)) {
            return Ok(b);
        }
        if self.memo.len() >= self.budget {
            return Err(Error::Budget(format!("exhaustive game search exceeded {} positions", self.budget)));
        }
        let mut options: Vec<Vec<u8>> = (0..key.len())
            .map(|i| {
                let mut o = key.clone();
                o.remove(i);
                o
            })
            .collect();
        if key.len() < self.pebbles {
            options.push(key.clone());
        }
        options.sort();
        options.dedup();
        let mut result = true;
        for opt in options {
            if !self.answerable(&opt, rounds - 1)? {
                result = false;
                break;
            }
        }
        self.memo.insert((key, rounds as u8), result);
        Ok(result)
    }

    /// Survival value of every placement after the pickup leaving `key`:
    /// `None` for an immediate loss, else the largest `t <= cap` such that
    /// Duplicator survives `t` further rounds.
    fn values(&mut self, key: &[u8], cap: usize) -> Result<Vec<Vec<Option<usize>>>> {
        let n = self.g.n();
        let pairs = self.pairs(key);
        let mut out = vec![vec![None; n]; n];
        for v in 0..n {
            for w in 0..n {
                if !extends(self.g, self.h, &pairs, (v, w)) {
                    continue;
                }
                let mut next = pairs.clone();
                next.push((v, w));
                let nk = self.key(&next);
                let mut t = 0;
                while t < cap && self.survive_key(nk.clone(), t + 1)? {
                    t += 1;
                }
                out[v][w] = Some(t);
            }
        }
        Ok(out)
    }

    fn answerable(&mut self, key: &[u8], rounds: usize) -> Result<bool> {
        let n = self.g.n();
        let pairs = self.pairs(key);
        let mut ok = vec![vec![false; n]; n];
        for v in 0..n {
            for w in 0..n {
                if extends(self.g, self.h, &pairs, (v, w)) {
                    let mut next = pairs.clone();
                    next.push((v, w));
                    let nk = self.key(&next);
                    ok[v][w] = self.survive_key(nk, rounds)?;
                }
            }
        }
        Ok(perfect_matching(n, &|v, w| ok[v][w]).is_some())
    }

    /// The bijection maximizing the least survival value over all
    /// placements, capped at `cap`; ties go to the lexicographically least
    /// bijection.
    pub fn best_bijection(&mut self, pairs: &[Pair], cap: usize) -> Result<Vec<Vertex>> {
        let n = self.g.n();
        let key = self.key(pairs);
        let vals = self.values(&key, cap)?;
        for threshold in (0..=cap).rev() {
            let ok = |v: usize, w: usize| vals[v][w].is_some_and(|t| t >= threshold);
            if let Some(f) = least_matching(n, &ok) {
                return Ok(f);
            }
        }
        let legal = |v: usize, w: usize| vals[v][w].is_some();
        Ok(least_matching(n, &legal).unwrap_or_else(|| (0..n).collect()))
    }
}

/// Whether Duplicator survives `rounds` rounds of the bijective game with
/// `pebbles` pairs from the initial pairs `initial`.
pub fn duplicator_survives(g: &Graph, h: &Graph, pebbles: usize, rounds: usize, initial: &[Pair]) -> Result<bool> {
    if g.n() != h.n() {
        return Ok(false);
    }
    if initial.len() > pebbles {
        return Err(Error::Precondition("more initial pairs than pebbles".into()));
    }
    Solver::new(g, h, pebbles)?.survives(initial, rounds)
}

/// Whether `r` rounds of `k`-WL and `r` rounds of the `(k+1)`-pebble game
/// give the same verdict on `g` and `h`.
pub fn game_wl_agreement(g: &Graph, h: &Graph, k: usize, r: usize) -> Result<bool> {
    let wl = distinguish(g, h, k, Some(r))?.distinguished();
    let game = !duplicator_survives(g, h, k + 1, r, &[])?;
    Ok(wl == game)
}

/// Chooses a bijection each round given the pairs on the board after the
/// pickup.
pub trait Duplicator {
    fn bijection(&mut self, g: &Graph, h: &Graph, placed: &[Pair]) -> Result<Vec<Vertex>>;
}

/// Optimal play by exhaustive search: each bijection maximizes the number
/// of rounds Duplicator can still survive.
pub struct ExhaustiveDuplicator<'a> {
    solver: Solver<'a>,
    horizon: usize,
}

impl<'a> ExhaustiveDuplicator<'a> {
    /// `pebbles` is the number of pairs Duplicator assumes Spoiler may use.
    pub fn new(g: &'a Graph, h: &'a Graph, pebbles: usize) -> Result<Self> {
        if g.n() > 6 {
            return Err(Error::SizeBound { what: "exhaustive duplicator", n: g.n(), bound: 6 });
        }
        Ok(ExhaustiveDuplicator { solver: Solver::new(g, h, pebbles)?, horizon: g.n() + 1 })
    }
}

impl Duplicator for ExhaustiveDuplicator<'_> {
    fn bijection(&mut self, _: &Graph, _: &Graph, placed: &[Pair]) -> Result<Vec<Vertex>> {
        self.solver.best_bijection(placed, self.horizon)
    }
}

/// Lockstep refinement of `g` and `h` with `s` and `t` individualized,
/// keeping every round's colors.
pub(crate) struct History {
    pub k: usize,
    pub n: usize,
    /// `rounds[r - 1][side]` holds round `r`.
    pub rounds: Vec<[Vec<u32>; 2]>,
}

impl History {
    pub fn new(g: &Graph, h: &Graph, s: &[Vertex], t: &[Vertex], k: usize, cap: usize) -> Result<History> {
        let (gi, hi) = (individualize(g, s)?, individualize(h, t)?);
        let mut r = JointRefiner::new(vec![&gi, &hi], k)?;
        let mut rounds = vec![[r.colors(0).to_vec(), r.colors(1).to_vec()]];
        while r.round() < cap && r.step() {
            rounds.push([r.colors(0).to_vec(), r.colors(1).to_vec()]);
        }
        Ok(History { k, n: g.n(), rounds })
    }

    pub fn last(&self) -> usize {
        self.rounds.len()
    }

    pub fn vertex(&self, round: usize, side: usize, v: Vertex) -> u32 {
        let i = if self.k == 1 { v } else { v * self.n + v };
        self.rounds[round - 1][side][i]
    }

    pub fn pair(&self, round: usize, side: usize, p: Vertex, q: Vertex) -> u32 {
        self.rounds[round - 1][side][p * self.n + q]
    }

    pub fn vertex_colors(&self, side: usize) -> Vec<u32> {
        (0..self.n).map(|v| self.vertex(self.last(), side, v)).collect()
    }

    /// First round whose per-vertex histograms differ.
    pub fn separation(&self) -> Option<usize> {
        (1..=self.last()).find(|&r| {
            let mut a: Vec<u32> = (0..self.n).map(|v| self.vertex(r, 0, v)).collect();
            let mut b: Vec<u32> = (0..self.n).map(|v| self.vertex(r, 1, v)).collect();
            a.sort_unstable();
            b.sort_unstable();
            a != b
        })
    }
}

/// Distinct-vertex prefix of the pebbled pairs, consistent on both sides.
fn pebbled_sequences(placed: &[Pair]) -> (Vec<Vertex>, Vec<Vertex>) {
    let (mut s, mut t) = (Vec::new(), Vec::new());
    for &(v, w) in placed {
        if !s.contains(&v) && !t.contains(&w) {
            s.push(v);
            t.push(w);
        }
    }
    (s, t)
}

/// Matches vertices class by class of the joint 2-WL coloring with the
/// pebbled pairs individualized, breaking ties by vertex id.
pub struct HeuristicDuplicator {
    cap: usize,
}

impl HeuristicDuplicator {
    pub fn new(n: usize) -> Self {
        HeuristicDuplicator { cap: round_cap(n) }
    }
}

impl Duplicator for HeuristicDuplicator {
    fn bijection(&mut self, g: &Graph, h: &Graph, placed: &[Pair]) -> Result<Vec<Vertex>> {
        let (s, t) = pebbled_sequences(placed);
        let hist = History::new(g, h, &s, &t, 2, self.cap)?;
        let (cg, ch) = (hist.vertex_colors(0), hist.vertex_colors(1));
        let mut left: Vec<Vertex> = (0..g.n()).collect();
        let mut right: Vec<Vertex> = (0..h.n()).collect();
        left.sort_by_key(|&v| (cg[v], v));
        right.sort_by_key(|&w| (ch[w], w));
        let mut f = vec![0; g.n()];
        for (&v, &w) in left.iter().zip(&right) {
            f[v] = w;
        }
        Ok(f)
    }
}

/// Replays recorded bijections in order.
pub struct ScriptedDuplicator {
    script: std::vec::IntoIter<Vec<Vertex>>,
}

impl ScriptedDuplicator {
    pub fn new(script: Vec<Vec<Vertex>>) -> Self {
        ScriptedDuplicator { script: script.into_iter() }
    }
}

impl Duplicator for ScriptedDuplicator {
    fn bijection(&mut self, _: &Graph, _: &Graph, _: &[Pair]) -> Result<Vec<Vertex>> {
        self.script.next().ok_or_else(|| Error::Precondition("the script has run out of bijections".into()))
    }
}

/// `⌈3 (log2 n + 1)⌉`, the round cap for the strategy's 2-WL colorings.
pub fn round_cap(n: usize) -> usize {
    crate::decomp::height_bound(n).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Main,
    Connectivity,
    Refinement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pickup: usize,
    pub bijection: Vec<Vertex>,
    pub placed: Pair,
    pub node: Option<usize>,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detour {
    pub kind: Tag,
    pub first_round: usize,
    pub placements: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyBudget {
    pub pebbles_used_max: usize,
    pub rounds_used: usize,
    pub main_rounds: usize,
    pub connectivity_rounds: usize,
    pub refinement_rounds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyOutcome {
    SpoilerWins,
    GivesUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub n: usize,
    pub outcome: StrategyOutcome,
    pub budget: StrategyBudget,
    /// Main-line round allowance `10 (log2 n + 1)`.
    pub main_round_limit: usize,
    /// Round cap of the 2-WL colorings consulted by the strategy.
    pub refinement_cap: usize,
    pub decomposition_width: usize,
    pub decomposition_height: usize,
    pub rounds: Vec<RoundRecord>,
    pub detours: Vec<Detour>,
    pub reason: Option<String>,
    /// Exact isomorphism check, run when `n <= 12`.
    pub isomorphic: Option<bool>,
}

impl Transcript {
    pub fn bijections(&self) -> Vec<Vec<Vertex>> {
        self.rounds.iter().map(|r| r.bijection.clone()).collect()
    }
}

/// Why play stopped early.
enum Stop {
    Won,
    GaveUp(String),
    Failed(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Failed(e)
    }
}

type Play<T> = std::result::Result<T, Stop>;

fn give_up<T>(why: impl Into<String>) -> Play<T> {
    Err(Stop::GaveUp(why.into()))
}

/// Graphs flipped with respect to the cut `x`, using the colors of two
/// rounds of Color Refinement with the context pebbles individualized.
struct FlipView {
    context: Vec<usize>,
    gf: Graph,
    hf: Graph,
    gcomp: Vec<usize>,
    hcomp: Vec<usize>,
}

impl FlipView {
    fn comp(&self, side: usize) -> &[usize] {
        if side == 0 {
            &self.gcomp
        } else {
            &self.hcomp
        }
    }

    fn graph(&self, side: usize) -> &Graph {
        if side == 0 {
            &self.gf
        } else {
            &self.hf
        }
    }
}

/// Runs the rules, hands out pebble slots and records the transcript.
struct Arena<'a> {
    g: &'a Graph,
    h: &'a Graph,
    dup: &'a mut dyn Duplicator,
    slots: Vec<Option<Pair>>,
    needed: std::collections::BTreeSet<usize>,
    rounds: Vec<RoundRecord>,
    detours: Vec<Detour>,
    node: Option<usize>,
    cap: usize,
    main_limit: usize,
    main_rounds: usize,
    finisher: bool,
}

const ROUND_LIMIT: usize = 2000;

impl<'a> Arena<'a> {
    fn n(&self) -> usize {
        self.g.n()
    }

    fn placed(&self) -> Vec<Pair> {
        self.slots.iter().flatten().copied().collect()
    }

    fn pair(&self, slot: usize) -> Pair {
        self.slots[slot].expect("slot is placed")
    }

    /// The slot currently holding `v` in `g`, if any.
    fn slot_of(&self, v: Vertex) -> Option<usize> {
        self.slots.iter().position(|p| p.is_some_and(|(x, _)| x == v))
    }

    /// Picks up the least slot not in use and asks for a bijection.
    fn begin(&mut self) -> Play<(usize, Vec<Vertex>)> {
        if self.rounds.len() >= ROUND_LIMIT {
            return give_up("round limit reached");
        }
        let slot = (0..self.slots.len())
            .find(|s| !self.needed.contains(s))
            .unwrap_or(self.slots.len());
        if slot == self.slots.len() {
            self.slots.push(None);
        }
        self.slots[slot] = None;
        let f = self.dup.bijection(self.g, self.h, &self.placed())?;
        if !is_bijection(&f, self.n()) {
            return Err(Error::Precondition("duplicator returned a non-bijection".into()).into());
        }
        Ok((slot, f))
    }

    /// Places `slot` on `v` and its image; stops with a win if the pebbled
    /// map breaks.
    fn place(&mut self, slot: usize, f: &[Vertex], v: Vertex, tag: Tag) -> Play<()> {
        self.slots[slot] = Some((v, f[v]));
        self.rounds.push(RoundRecord {
            round: self.rounds.len() + 1,
            pickup: slot,
            bijection: f.to_vec(),
            placed: (v, f[v]),
            node: self.node,
            tag,
        });
        if tag == Tag::Main {
            self.main_rounds += 1;
        }
        if spoiler_wins(self.g, self.h, &self.placed()) {
            return Err(Stop::Won);
        }
        if self.main_rounds > self.main_limit {
            return give_up("main-line round limit reached");
        }
        Ok(())
    }

    fn history(&self, slots: &[usize], k: usize, cap: usize) -> Result<History> {
        let pairs: Vec<Pair> = slots.iter().filter_map(|&s| self.slots[s]).collect();
        let (s, t) = pebbled_sequences(&pairs);
        History::new(self.g, self.h, &s, &t, k, cap)
    }

    fn placed_slots(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&s| self.slots[s].is_some()).collect()
    }

    /// Per-vertex colors of 2-WL with the given slots individualized.
    fn kappa(&self, slots: &[usize]) -> Result<[Vec<u32>; 2]> {
        let hist = self.history(slots, 2, self.cap)?;
        Ok([hist.vertex_colors(0), hist.vertex_colors(1)])
    }

    fn flip_view(&self, context: &[usize], x: &crate::graph::VertexSet) -> Play<Option<FlipView>> {
        let hist = self.history(context, 1, 2)?;
        let r = hist.last();
        let gc = (0..self.n()).map(|v| hist.vertex(r, 0, v)).collect();
        let hc = (0..self.n()).map(|v| hist.vertex(r, 1, v)).collect();
        let g2 = self.g.clone().with_colors(gc)?;
        let h2 = self.h.clone().with_colors(hc)?;
        let f = match crate::split::flip_for_cut(&g2, x) {
            Ok(f) => f,
            Err(e) => return give_up(format!("no flip separates the cut: {e}")),
        };
        let mut f = f;
        f.domain.extend(h2.colors().iter().copied());
        let gf = crate::split::flipped_graph(&g2, &f)?;
        let hf = crate::split::flipped_graph(&h2, &f)?;
        Ok(Some(FlipView {
            context: context.to_vec(),
            gcomp: crate::graph::component_labels(&gf),
            hcomp: crate::graph::component_labels(&hf),
            gf,
            hf,
        }))
    }
}

impl Arena<'_> {
    /// Greedily drops slots while the histograms of `k`-WL with the
    /// remaining slots individualized still differ.
    fn minimal_witness(&self, k: usize) -> Result<Option<(Vec<usize>, History)>> {
        let mut keep = self.placed_slots();
        let hist = self.history(&keep, k, self.cap)?;
        if hist.separation().is_none() {
            return Ok(None);
        }
        let mut best = hist;
        for s in keep.clone().into_iter().rev() {
            let trial: Vec<usize> = keep.iter().copied().filter(|&x| x != s).collect();
            let hist = self.history(&trial, k, self.cap)?;
            if hist.separation().is_some() {
                keep = trial;
                best = hist;
            }
        }
        Ok(Some((keep, best)))
    }

    /// Wins from a difference between the refinements of `g` and `h` with
    /// the pebbled pairs individualized, if there is one: Color Refinement
    /// needs two further pebbles, 2-WL three.
    fn finish(&mut self) -> Play<()> {
        let cr = self.minimal_witness(1)?;
        let wl2 = self.minimal_witness(2)?;
        let pick = match (cr, wl2) {
            (Some(c), Some(w)) if w.0.len() + 3 < c.0.len() + 2 => w,
            (Some(c), _) => c,
            (None, Some(w)) => w,
            (None, None) => return Ok(()),
        };
        let (keep, hist) = pick;
        let first = self.rounds.len() + 1;
        let outcome = self.extract(keep, &hist);
        let placements = self.rounds.len() + 1 - first;
        self.detours.push(Detour { kind: Tag::Refinement, first_round: first, placements });
        match outcome {
            Err(Stop::Won) => Err(Stop::Won),
            Err(e) => Err(e),
            Ok(()) => give_up("refinement difference did not yield a win"),
        }
    }

    fn extract(&mut self, keep: Vec<usize>, hist: &History) -> Play<()> {
        let n = self.n();
        let r = hist.separation().expect("histograms differ");
        self.needed = keep.iter().copied().collect();
        let (s, f) = self.begin()?;
        let u = (0..n)
            .find(|&u| hist.vertex(r, 0, u) != hist.vertex(r, 1, f[u]))
            .expect("a bijection cannot match differing histograms");
        self.place(s, &f, u, Tag::Refinement)?;
        self.needed.insert(s);
        if hist.k == 1 {
            self.extract_cr(hist, s, r)
        } else {
            self.extract_pair(hist, (s, s), r)
        }
    }

    /// Color Refinement: follow a vertex whose colors differ down to the
    /// round where its neighborhood tells it apart.
    fn extract_cr(&mut self, hist: &History, mut sp: usize, mut r: usize) -> Play<()> {
        loop {
            let (p, q) = self.pair(sp);
            let Some(r0) = (1..=r).find(|&i| hist.vertex(i, 0, p) != hist.vertex(i, 1, q)) else {
                return give_up("followed vertices agree");
            };
            if r0 == 1 {
                return give_up("initial colors differ without a broken map");
            }
            let prev = r0 - 1;
            let (s, f) = self.begin()?;
            let w = (0..self.n()).find(|&w| {
                let (a, b) = (self.g.adjacent(p, w), self.h.adjacent(q, f[w]));
                a != b || (a && hist.vertex(prev, 0, w) != hist.vertex(prev, 1, f[w]))
            });
            let Some(w) = w else {
                return give_up("neighborhoods agree under the bijection");
            };
            self.place(s, &f, w, Tag::Refinement)?;
            self.needed.remove(&sp);
            self.needed.insert(s);
            sp = s;
            r = prev;
        }
    }

    /// 2-WL: follow a pebbled pair whose colors differ, replacing one entry
    /// per round.
    fn extract_pair(&mut self, hist: &History, (mut sp, mut sq): (usize, usize), mut r: usize) -> Play<()> {
        loop {
            let ((p, p2), (q, q2)) = (self.pair(sp), self.pair(sq));
            let Some(r0) = (1..=r).find(|&i| hist.pair(i, 0, p, q) != hist.pair(i, 1, p2, q2)) else {
                return give_up("followed pairs agree");
            };
            if r0 == 1 {
                return give_up("atomic types differ without a broken map");
            }
            let prev = r0 - 1;
            let (s, f) = self.begin()?;
            let x = (0..self.n()).find(|&x| {
                (hist.pair(prev, 0, x, q), hist.pair(prev, 0, p, x)) != (hist.pair(prev, 1, f[x], q2), hist.pair(prev, 1, p2, f[x]))
            });
            let Some(x) = x else {
                return give_up("pair multisets agree under the bijection");
            };
            self.place(s, &f, x, Tag::Refinement)?;
            let first_differs = hist.pair(prev, 0, x, q) != hist.pair(prev, 1, f[x], q2);
            if first_differs {
                if sp != sq {
                    self.needed.remove(&sp);
                }
                sp = s;
            } else {
                if sq != sp {
                    self.needed.remove(&sq);
                }
                sq = s;
            }
            self.needed.insert(s);
            r = prev;
        }
    }

    /// Runs the finisher if the current position already shows a
    /// refinement difference.
    fn settle(&mut self) -> Play<()> {
        if !self.finisher {
            return Ok(());
        }
        let saved = self.needed.clone();
        self.finish()?;
        self.needed = saved;
        Ok(())
    }

    /// Bisection along a shortest path in the flipped graph on `side`
    /// between the vertices of slots `sp` and `sq`, whose images lie in
    /// different components of the other flipped graph.
    fn connect(&mut self, view: &FlipView, side: usize, (mut sp, mut sq): (usize, usize)) -> Play<()> {
        let first = self.rounds.len() + 1;
        let result = self.bisect(view, side, &mut sp, &mut sq);
        let placements = self.rounds[first - 1..].iter().filter(|r| r.tag == Tag::Connectivity).count();
        self.detours.push(Detour { kind: Tag::Connectivity, first_round: first, placements });
        result
    }

    fn bisect(&mut self, view: &FlipView, side: usize, sp: &mut usize, sq: &mut usize) -> Play<()> {
        let end = |a: &Self, s: usize| if side == 0 { a.pair(s).0 } else { a.pair(s).1 };
        let image = |a: &Self, s: usize| if side == 0 { a.pair(s).1 } else { a.pair(s).0 };
        let Some(mut path) = crate::graph::shortest_path(view.graph(side), end(self, *sp), end(self, *sq)) else {
            return give_up("attack endpoints are not connected");
        };
        if path.len() < 2 {
            return give_up("attack needs two distinct endpoints");
        }
        let other = view.comp(1 - side);
        loop {
            self.needed = view.context.iter().copied().chain([*sp, *sq]).collect();
            if path.len() == 2 {
                self.finish()?;
                return give_up("adjacent endpoints with separated images did not break the map");
            }
            let mid = path.len() / 2;
            let (s, f) = self.begin()?;
            let v = if side == 0 {
                path[mid]
            } else {
                f.iter().position(|&w| w == path[mid]).expect("bijection")
            };
            self.place(s, &f, v, Tag::Connectivity)?;
            self.settle()?;
            let m_image = if side == 0 { f[v] } else { v };
            if other[m_image] != other[image(self, *sp)] {
                path.truncate(mid + 1);
                *sq = s;
            } else {
                path.drain(..mid);
                *sp = s;
            }
        }
    }
}

fn inverse(f: &[Vertex]) -> Vec<Vertex> {
    let mut inv = vec![0; f.len()];
    for (v, &w) in f.iter().enumerate() {
        inv[w] = v;
    }
    inv
}

/// A vertex of `inside_g` sent outside `inside_h` (side 0), or a vertex of
/// `inside_h` whose preimage lies outside `inside_g` (side 1).
fn violation(f: &[Vertex], inside_g: &[bool], inside_h: &[bool]) -> Option<(usize, Vertex)> {
    if let Some(y) = (0..f.len()).find(|&y| inside_g[y] && !inside_h[f[y]]) {
        return Some((0, y));
    }
    let inv = inverse(f);
    (0..f.len()).find(|&y| inside_h[y] && !inside_g[inv[y]]).map(|y| (1, y))
}

fn members(mask: &[bool]) -> Vec<Vertex> {
    (0..mask.len()).filter(|&v| mask[v]).collect()
}

struct Check<'v> {
    view: &'v FlipView,
    inside_g: Vec<bool>,
    inside_h: Vec<bool>,
    anchor: usize,
}

impl Arena<'_> {
    /// Answers a bijection that does not respect a pair of flipped
    /// components with the bisection attack.
    fn guard(&mut self, f: &[Vertex], s: usize, checks: &[Check<'_>]) -> Play<()> {
        for c in checks {
            if let Some((side, y)) = violation(f, &c.inside_g, &c.inside_h) {
                let v = if side == 0 { y } else { inverse(f)[y] };
                self.place(s, f, v, Tag::Main)?;
                self.needed.insert(s);
                self.settle()?;
                self.connect(c.view, side, (c.anchor, s))?;
                return give_up("connectivity attack did not win");
            }
        }
        Ok(())
    }

    /// The slot holding `x`, pebbling it in a main-line round if needed.
    fn ensure(&mut self, x: Vertex, check: &Check<'_>) -> Play<usize> {
        if let Some(s) = self.slot_of(x) {
            self.needed.insert(s);
            return Ok(s);
        }
        let (s, f) = self.begin()?;
        self.guard(&f, s, std::slice::from_ref(check))?;
        self.place(s, &f, x, Tag::Main)?;
        self.needed.insert(s);
        self.settle()?;
        Ok(s)
    }

    fn slots_for(&self, seq: &[Vertex]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &u in seq {
            let s = self.slot_of(u).expect("pebbled");
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    /// First vertex `u` with `inside_g[u]` whose block (a component of the
    /// flipped graph within `inside_g`) is not isomorphic, under the colors
    /// `kappa`, to the block of `f[u]` within `inside_h`.
    fn block_mismatch(
        &self,
        view: &FlipView,
        kappa: &[Vec<u32>; 2],
        inside_g: &[bool],
        inside_h: &[bool],
        f: &[Vertex],
    ) -> Result<Option<Vertex>> {
        let gk = view.gf.clone().with_colors(kappa[0].clone())?;
        let hk = view.hf.clone().with_colors(kappa[1].clone())?;
        let n = self.n();
        Ok((0..n).filter(|&u| inside_g[u]).find(|&u| {
            let pb: Vec<Vertex> = (0..n).filter(|&x| inside_g[x] && view.gcomp[x] == view.gcomp[u]).collect();
            let qb: Vec<Vertex> = (0..n).filter(|&y| inside_h[y] && view.hcomp[y] == view.hcomp[f[u]]).collect();
            !crate::iso::are_isomorphic(&gk.induced(&pb), &hk.induced(&qb))
        }))
    }

    fn component_of(view: &FlipView, side: usize, v: Vertex) -> Vec<bool> {
        let comp = view.comp(side);
        comp.iter().map(|&c| c == comp[v]).collect()
    }

    fn play_strategy(&mut self, d: &crate::decomp::RankDecomposition) -> Play<()> {
        let (g, h, n) = (self.g, self.h, self.n());
        let gamma = d.gamma(n)?;
        self.node = Some(d.root());
        self.needed.clear();
        let (s, f) = self.begin()?;
        let (gcomps, hcomps) = (crate::graph::connected_components(g), crate::graph::connected_components(h));
        let (gl, hl) = (crate::graph::component_labels(g), crate::graph::component_labels(h));
        let root_v = (0..n).find(|&v| {
            !crate::iso::are_isomorphic(&g.induced(&gcomps[gl[v]]), &h.induced(&hcomps[hl[f[v]]]))
        });
        let Some(root_v) = root_v else {
            return give_up("every component is matched by an isomorphic one");
        };
        self.place(s, &f, root_v, Tag::Main)?;
        self.settle()?;
        let (mut t, mut a, mut b, mut vs) = (d.root(), Vec::new(), Vec::new(), s);
        loop {
            self.node = Some(t);
            let ab = self.slots_for(&[a.as_slice(), b.as_slice()].concat());
            self.needed = ab.iter().copied().chain([vs]).collect();
            let Some(view) = self.flip_view(&ab, &gamma[t])? else {
                self.finish()?;
                return give_up("colors fall outside the flip function's domain");
            };
            let (v, v2) = self.pair(vs);
            let here = Check {
                view: &view,
                inside_g: Self::component_of(&view, 0, v),
                inside_h: Self::component_of(&view, 1, v2),
                anchor: vs,
            };
            let kappa = self.kappa(&ab.iter().copied().chain([vs]).collect::<Vec<_>>())?;
            let gk = g.clone().with_colors(kappa[0].clone())?;
            let hk = h.clone().with_colors(kappa[1].clone())?;
            if crate::iso::are_isomorphic(&gk.induced(&members(&here.inside_g)), &hk.induced(&members(&here.inside_h))) {
                self.finish()?;
                return give_up("component pair became isomorphic");
            }
            let node = &d.nodes()[t];
            if node.children.is_empty() {
                let (s, f) = self.begin()?;
                let y = (0..n).find(|&y| here.inside_h[y] && y != v2 && view.hf.adjacent(v2, y));
                let Some(y) = y else {
                    self.finish()?;
                    return give_up("leaf components agree");
                };
                self.place(s, &f, inverse(&f)[y], Tag::Main)?;
                self.finish()?;
                return give_up("leaf placement did not win");
            }
            let (mut t1, mut t2) = (node.children[0], node.children[1]);
            let parent = crate::split::SplitPair { a: a.clone(), b: b.clone(), x: gamma[t].clone() };
            let mut triple = crate::split::nice_split_pairs(g, &gamma[t1], &gamma[t2], &parent)?;
            if !gamma[t1].contains(v) {
                std::mem::swap(&mut t1, &mut t2);
                std::mem::swap(&mut triple.child1, &mut triple.child2);
            }
            let (c1, c2) = (triple.child1, triple.child2);
            let wanted: Vec<Vertex> = c1.a.iter().chain(&c1.b).chain(&c2.a).chain(&c2.b).copied().collect();
            for &u in &wanted {
                if let Some(s) = self.slot_of(u) {
                    self.needed.insert(s);
                }
            }
            for &u in &wanted {
                self.ensure(u, &here)?;
            }
            let mut alpha = self.slots_for(&[a.as_slice(), b.as_slice(), wanted.as_slice()].concat());
            if !alpha.contains(&vs) {
                alpha.push(vs);
            }
            let kappa = self.kappa(&alpha)?;
            let Some(view1) = self.flip_view(&self.slots_for(&[c1.a.as_slice(), c1.b.as_slice()].concat()), &gamma[t1])?
            else {
                self.finish()?;
                return give_up("colors fall outside the first child's flip domain");
            };

            let (s, f) = self.begin()?;
            self.guard(&f, s, std::slice::from_ref(&here))?;
            let Some(w) = self.block_mismatch(&view1, &kappa, &here.inside_g, &here.inside_h, &f)? else {
                self.finish()?;
                return give_up("no mismatching block below the node");
            };
            self.place(s, &f, w, Tag::Main)?;
            let ws = s;
            self.needed.insert(ws);
            self.settle()?;
            let w2 = f[w];
            let inner = Check {
                view: &view1,
                inside_g: Self::component_of(&view1, 0, w),
                inside_h: Self::component_of(&view1, 1, w2),
                anchor: ws,
            };
            if gamma[t1].contains(w) {
                vs = if inner.inside_g[v] && inner.inside_h[v2] { vs } else { ws };
                (t, a, b) = (t1, c1.a, c1.b);
                continue;
            }

            let m: Vec<bool> = (0..n).map(|x| here.inside_g[x] && inner.inside_g[x]).collect();
            let m2: Vec<bool> = (0..n).map(|y| here.inside_h[y] && inner.inside_h[y]).collect();
            alpha.push(ws);
            let kappa2 = self.kappa(&alpha)?;
            let Some(view2) = self.flip_view(&self.slots_for(&[c2.a.as_slice(), c2.b.as_slice()].concat()), &gamma[t2])?
            else {
                self.finish()?;
                return give_up("colors fall outside the second child's flip domain");
            };
            let (s, f) = self.begin()?;
            self.guard(&f, s, &[here, inner])?;
            let Some(z) = self.block_mismatch(&view2, &kappa2, &m, &m2, &f)? else {
                self.finish()?;
                return give_up("no mismatching block in the second child");
            };
            self.place(s, &f, z, Tag::Main)?;
            let zs = s;
            self.needed.insert(zs);
            self.settle()?;
            let same = view2.gcomp[w] == view2.gcomp[z] && view2.hcomp[w2] == view2.hcomp[f[z]];
            vs = if same { ws } else { zs };
            (t, a, b) = (t2, c2.a, c2.b);
        }
    }
}

fn transcript_from(arena: Arena<'_>, outcome: StrategyOutcome, reason: Option<String>) -> Transcript {
    let count = |tag| arena.rounds.iter().filter(|r| r.tag == tag).count();
    let n = arena.n();
    Transcript {
        n,
        outcome,
        budget: StrategyBudget {
            pebbles_used_max: arena.slots.len(),
            rounds_used: arena.rounds.len(),
            main_rounds: count(Tag::Main),
            connectivity_rounds: count(Tag::Connectivity),
            refinement_rounds: count(Tag::Refinement),
        },
        main_round_limit: arena.main_limit,
        refinement_cap: arena.cap,
        decomposition_width: 0,
        decomposition_height: 0,
        isomorphic: (n <= 12).then(|| crate::iso::are_isomorphic(arena.g, arena.h)),
        rounds: arena.rounds,
        detours: arena.detours,
        reason,
    }
}

/// `10 (log2 n + 1)`, rounded down.
pub fn main_round_limit(n: usize) -> usize {
    (10.0 * ((n.max(1) as f64).log2() + 1.0)) as usize
}

/// Plays Spoiler along the decomposition `d` of `g` against `dup`.
///
/// At each node the strategy holds a split pair of the node's set and one
/// vertex `v` whose flipped component is not matched by its image's; it
/// pebbles nice split pairs of the children, finds a mismatching block of
/// the first child's flip and descends. Bijections that break a flipped
/// component are punished by bisection, and any refinement difference with
/// the pebbles individualized is turned into a win directly.
pub fn spoiler_rankwidth_strategy(
    g: &Graph,
    h: &Graph,
    d: &crate::decomp::RankDecomposition,
    dup: &mut dyn Duplicator,
) -> Result<Transcript> {
    spoiler_rankwidth_strategy_with(g, h, d, dup, true)
}

/// As [`spoiler_rankwidth_strategy`]; with `finisher` off, refinement
/// differences are not cashed in early and only the descent itself plays.
pub fn spoiler_rankwidth_strategy_with(
    g: &Graph,
    h: &Graph,
    d: &crate::decomp::RankDecomposition,
    dup: &mut dyn Duplicator,
    finisher: bool,
) -> Result<Transcript> {
    let report = crate::decomp::width(g, d)?;
    let n = g.n();
    let mut arena = Arena {
        g,
        h,
        dup,
        slots: Vec::new(),
        needed: Default::default(),
        rounds: Vec::new(),
        detours: Vec::new(),
        node: None,
        cap: round_cap(n),
        main_limit: main_round_limit(n),
        main_rounds: 0,
        finisher,
    };
    let (outcome, reason) = if g.n() != h.n() {
        (StrategyOutcome::SpoilerWins, Some("orders differ".to_string()))
    } else {
        match arena.play_strategy(d) {
            Err(Stop::Won) => (StrategyOutcome::SpoilerWins, None),
            Err(Stop::GaveUp(r)) => (StrategyOutcome::GivesUp, Some(r)),
            Err(Stop::Failed(e)) => return Err(e),
            Ok(()) => unreachable!("play only ends by stopping"),
        }
    };
    let mut t = transcript_from(arena, outcome, reason);
    t.decomposition_width = report.width;
    t.decomposition_height = report.height;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub won: bool,
    pub placements: usize,
    pub rounds: Vec<RoundRecord>,
}

/// The bisection attack from a position where `initial[u]` and
/// `initial[v]` are pebbled on vertices in one component of `g` whose
/// images lie in different components of `h`. Uses one extra pebble pair.
pub fn connectivity_attack(g: &Graph, h: &Graph, initial: &[Pair], u: usize, v: usize, dup: &mut dyn Duplicator) -> Result<AttackReport> {
    if g.n() != h.n() {
        return Err(Error::Precondition("graphs must have equal order".into()));
    }
    if u >= initial.len() || v >= initial.len() || initial[u].0 == initial[v].0 {
        return Err(Error::Precondition("the attack needs two distinct pebbled vertices".into()));
    }
    if initial.iter().any(|&(x, y)| x >= g.n() || y >= h.n()) {
        return Err(Error::Precondition("pebbled vertex out of range".into()));
    }
    let (gl, hl) = (crate::graph::component_labels(g), crate::graph::component_labels(h));
    if gl[initial[u].0] != gl[initial[v].0] || hl[initial[u].1] == hl[initial[v].1] {
        return Err(Error::Precondition("endpoints must share a component in g but not in h".into()));
    }
    let view = FlipView { context: Vec::new(), gf: g.clone(), hf: h.clone(), gcomp: gl, hcomp: hl };
    let mut arena = Arena {
        g,
        h,
        dup,
        slots: initial.iter().map(|&p| Some(p)).collect(),
        needed: Default::default(),
        rounds: Vec::new(),
        detours: Vec::new(),
        node: None,
        cap: 0,
        main_limit: usize::MAX,
        main_rounds: 0,
        finisher: false,
    };
    let won = if spoiler_wins(g, h, initial) {
        true
    } else {
        match arena.bisect(&view, 0, &mut u.clone(), &mut v.clone()) {
            Err(Stop::Won) => true,
            Err(Stop::GaveUp(_)) => false,
            Err(Stop::Failed(e)) => return Err(e),
            Ok(()) => false,
        }
    };
    Ok(AttackReport { won, placements: arena.rounds.len(), rounds: arena.rounds })
}
