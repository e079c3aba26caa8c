//! Property suites that check the library against independent oracles and
//! report per-instance verdicts as schema-versioned JSON.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::decomp::{balance, exact_rank_width, height_bound, treewidth_exact, validate, width};
use crate::error::{Error, Result};
use crate::game::{
    game_wl_agreement, main_round_limit, spoiler_rankwidth_strategy, Duplicator, ExhaustiveDuplicator, HeuristicDuplicator,
    StrategyOutcome, Tag,
};
use crate::generators::{all_distance_hereditary, all_graphs, gen_cfi_pair, gen_complete, gen_distance_hereditary, gen_random, SplitMix64};
use crate::graph::{connected_components, Graph, VertexSet};
use crate::io::to_graph6;
use crate::iso::are_isomorphic;
use crate::split::{approx_violation, flip_for_cut, flipped_graph, split_pair, FlipFunction};
use crate::wl::{distinguish, individualize_and_refine};

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITES: [&str; 10] = [
    "lemma-3.4",
    "lemma-3.6",
    "lemma-3.9",
    "lemma-3.10",
    "game-equivalence",
    "main-theorem",
    "balance",
    "inequalities",
    "strategy",
    "cfi",
];

/// Knobs shared by every suite; `None` picks the suite's default.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: Option<usize>,
    pub max_n: Option<usize>,
    pub k: Option<usize>,
    pub rounds: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: usize,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub command: Vec<String>,
    pub suite: String,
    pub config: SuiteConfig,
    pub config_hash: String,
    pub instances: Vec<InstanceResult>,
    pub failures: usize,
    pub pass: bool,
    pub aggregate: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn counterexamples(&self) -> impl Iterator<Item = &InstanceResult> {
        self.instances.iter().filter(|i| !i.pass)
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("reports serialize");
        out.push(b'\n');
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{:<18} {:>6} instances {:>4} failures  {}",
            self.suite,
            self.instances.len(),
            self.failures,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// First 16 hex digits of the SHA-256 of the suite name and config.
pub fn config_hash(suite: &str, config: &SuiteConfig) -> String {
    let bytes = serde_json::to_vec(&(suite, config)).expect("configs serialize");
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn instance_rng(seed: u64, id: usize) -> SplitMix64 {
    SplitMix64::new(seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs `check` on every instance in parallel and assembles results by id.
fn run_all<T: Sync>(items: &[T], check: impl Fn(usize, &T) -> Result<(bool, Value)> + Sync) -> Result<Vec<InstanceResult>> {
    items
        .par_iter()
        .enumerate()
        .map(|(id, item)| check(id, item).map(|(pass, detail)| InstanceResult { id, pass, detail }))
        .collect()
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<Report> {
    let mut warnings = Vec::new();
    let (instances, aggregate) = match name {
        "lemma-3.4" => split_refinement(config)?,
        "lemma-3.6" => flip_separation(config)?,
        "lemma-3.9" => flip_isomorphism(config)?,
        "lemma-3.10" => flip_verdicts(config)?,
        "game-equivalence" => game_equivalence(config)?,
        "main-theorem" => main_theorem(config)?,
        "balance" => balancing(config)?,
        "inequalities" => inequalities(config)?,
        "strategy" => strategy(config)?,
        "cfi" => cfi(config)?,
        _ => return Err(Error::Precondition(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    };
    if instances.is_empty() {
        warnings.push("no instances were generated; the suite passes vacuously".to_string());
    }
    let failures = instances.iter().filter(|i| !i.pass).count();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: vec!["suite".to_string(), name.to_string()],
        suite: name.to_string(),
        config: config.clone(),
        config_hash: config_hash(name, config),
        failures,
        pass: failures == 0,
        instances,
        aggregate,
        warnings,
    })
}

type Outcome = Result<(Vec<InstanceResult>, Value)>;

fn random_cut(rng: &mut SplitMix64, n: usize) -> VertexSet {
    VertexSet::from_vertices(n, (0..n).filter(|_| rng.below(2) == 1))
}

fn cut_instances(config: &SuiteConfig) -> Vec<(Graph, VertexSet)> {
    let max_n = config.max_n.unwrap_or(14).max(1);
    (0..config.instances.unwrap_or(100))
        .map(|id| {
            let mut rng = instance_rng(config.seed, id);
            let n = 1 + rng.below(max_n);
            let p = rng.next_f64();
            let g = gen_random(n, p, rng.next_u64());
            let x = random_cut(&mut rng, n);
            (g, x)
        })
        .collect()
}

/// `g` recolored by two rounds of color refinement after individualizing
/// an ordered split pair of `x`.
fn refined_by_split_pair(g: &Graph, x: &VertexSet) -> Result<Graph> {
    let sp = split_pair(g, x);
    let c = individualize_and_refine(g, &sp.sequence(), 1, Some(2))?;
    g.clone().with_colors(c.colors)
}

fn split_refinement(config: &SuiteConfig) -> Outcome {
    let items = cut_instances(config);
    let results = run_all(&items, |_, (g, x)| {
        let r = refined_by_split_pair(g, x)?;
        let v = approx_violation(g, x, r.colors());
        let detail = json!({
            "n": g.n(),
            "x": x.to_vec(),
            "cut_rank": split_pair(g, x).a.len(),
            "violation": v.as_ref().map(|v| json!({"color": v.color, "first": v.first, "second": v.second})),
        });
        Ok((v.is_none(), detail))
    })?;
    Ok((results, json!({})))
}

fn flip_separation(config: &SuiteConfig) -> Outcome {
    let items = cut_instances(config);
    let results = run_all(&items, |_, (g, x)| {
        let r = refined_by_split_pair(g, x)?;
        let f = match flip_for_cut(&r, x) {
            Ok(f) => f,
            Err(e) => return Ok((false, json!({"n": g.n(), "x": x.to_vec(), "error": e.to_string()}))),
        };
        let gf = flipped_graph(&r, &f)?;
        let crossing = gf.edges().filter(|&(u, v)| x.contains(u) != x.contains(v)).count();
        let comps = connected_components(&gf);
        let straddling = comps
            .iter()
            .filter(|c| c.iter().any(|&v| x.contains(v)) && c.iter().any(|&v| !x.contains(v)))
            .count();
        let detail = json!({
            "n": g.n(),
            "x": x.to_vec(),
            "flipped_pairs": f.flipped.len(),
            "crossing_edges": crossing,
            "components": comps.len(),
            "straddling_components": straddling,
        });
        Ok((crossing == 0 && straddling == 0, detail))
    })?;
    Ok((results, json!({})))
}

const COLORS: u32 = 3;

fn random_flip(rng: &mut SplitMix64) -> FlipFunction {
    let mut f = FlipFunction::zero(0..COLORS);
    for c in 0..COLORS {
        for d in c..COLORS {
            if rng.below(2) == 1 {
                f.set(c, d);
            }
        }
    }
    f
}

/// A random colored graph `g`, a second graph with the same color
/// multiset (an isomorphic copy for even ids), the copy's permutation when
/// there is one, and a random flip over the shared colors.
fn colored_pair(config: &SuiteConfig, id: usize) -> Result<(Graph, Graph, Option<Vec<usize>>, FlipFunction, SplitMix64)> {
    let mut rng = instance_rng(config.seed, id);
    let n = 1 + rng.below(config.max_n.unwrap_or(7).max(1));
    let colors: Vec<u32> = (0..n).map(|_| rng.below(COLORS as usize) as u32).collect();
    let p = rng.next_f64();
    let g = gen_random(n, p, rng.next_u64()).with_colors(colors.clone())?;
    let perm = rng.permutation(n);
    let (h, iso) = if id % 2 == 0 {
        (g.permuted(&perm), Some(perm))
    } else {
        let shuffled: Vec<u32> = perm.iter().map(|&i| colors[i]).collect();
        (gen_random(n, p, rng.next_u64()).with_colors(shuffled)?, None)
    };
    let f = random_flip(&mut rng);
    Ok((g, h, iso, f, rng))
}

fn flip_isomorphism(config: &SuiteConfig) -> Outcome {
    let ids: Vec<usize> = (0..config.instances.unwrap_or(100)).collect();
    let results = run_all(&ids, |_, &id| {
        let (g, h, iso, f, mut rng) = colored_pair(config, id)?;
        let (gf, hf) = (flipped_graph(&g, &f)?, flipped_graph(&h, &f)?);
        let mut sampled: Vec<Vec<usize>> = (0..20).map(|_| rng.permutation(g.n())).collect();
        sampled.extend(iso.clone());
        let bad: Vec<&Vec<usize>> =
            sampled.iter().filter(|s| g.is_isomorphism(&h, s) != gf.is_isomorphism(&hf, s)).collect();
        let detail = json!({
            "n": g.n(),
            "isomorphic_copy": iso.is_some(),
            "bijections_checked": sampled.len(),
            "isomorphisms_found": sampled.iter().filter(|s| g.is_isomorphism(&h, s)).count(),
            "disagreements": bad,
        });
        Ok((bad.is_empty(), detail))
    })?;
    Ok((results, json!({})))
}

fn flip_verdicts(config: &SuiteConfig) -> Outcome {
    let ids: Vec<usize> = (0..config.instances.unwrap_or(100)).collect();
    let max_r = config.rounds.unwrap_or(4);
    let results = run_all(&ids, |_, &id| {
        let (g, h, _, f, _) = colored_pair(config, id)?;
        let (gf, hf) = (flipped_graph(&g, &f)?, flipped_graph(&h, &f)?);
        let mut checks = Vec::new();
        let mut ok = true;
        for k in 1..=2 {
            for r in 1..=max_r {
                let plain = distinguish(&g, &h, k, Some(r))?.distinguished();
                let flipped = distinguish(&gf, &hf, k, Some(r))?.distinguished();
                ok &= plain == flipped;
                checks.push(json!({"k": k, "r": r, "plain": plain, "flipped": flipped}));
            }
        }
        Ok((ok, json!({"n": g.n(), "checks": checks})))
    })?;
    Ok((results, json!({})))
}

fn game_equivalence(config: &SuiteConfig) -> Outcome {
    let graphs: Vec<Graph> = (1..=config.max_n.unwrap_or(4)).flat_map(all_graphs).collect();
    let pairs: Vec<(usize, usize)> = (0..graphs.len()).flat_map(|i| (i..graphs.len()).map(move |j| (i, j))).collect();
    let max_k = config.k.unwrap_or(2);
    let max_r = config.rounds.unwrap_or(3);
    let results = run_all(&pairs, |_, &(i, j)| {
        let (g, h) = (&graphs[i], &graphs[j]);
        let mut mismatches = Vec::new();
        for k in 1..=max_k {
            for r in 1..=max_r {
                if !game_wl_agreement(g, h, k, r)? {
                    mismatches.push(json!({"k": k, "r": r}));
                }
            }
        }
        let detail = json!({"g": to_graph6(g), "h": to_graph6(h), "mismatches": mismatches});
        Ok((mismatches.is_empty(), detail))
    })?;
    Ok((results, json!({"graphs": graphs.len(), "pairs": pairs.len()})))
}

/// `⌈3 (log2 n + 1)⌉ + 5`.
pub fn main_theorem_round_cap(n: usize) -> usize {
    height_bound(n).ceil() as usize + 5
}

fn main_theorem(config: &SuiteConfig) -> Outcome {
    let max_n = config.max_n.unwrap_or(8);
    let mut items = Vec::new();
    for n in 1..=max_n {
        let family: Vec<Graph> = all_distance_hereditary(n).into_iter().map(|d| d.graph).collect();
        for i in 0..family.len() {
            items.push((family.clone(), i));
        }
    }
    let results = run_all(&items, |_, (family, i)| {
        let g = &family[*i];
        let n = g.n();
        let cap = main_theorem_round_cap(n);
        let mut by_k = std::collections::BTreeMap::<usize, usize>::new();
        let (mut max_round, mut unresolved) = (0, Vec::new());
        for h in &family[i + 1..] {
            let mut ks: Vec<usize> = vec![2, 3];
            if n <= 6 {
                ks.push(9);
            }
            let mut hit = None;
            for k in ks {
                let v = distinguish(g, h, k, Some(cap))?;
                if let Some(r) = v.round_of_separation {
                    hit = Some((k, r));
                    break;
                }
            }
            match hit {
                Some((k, r)) => {
                    *by_k.entry(k).or_default() += 1;
                    max_round = max_round.max(r);
                }
                None => unresolved.push(to_graph6(h)),
            }
        }
        let detail = json!({
            "n": n,
            "g": to_graph6(g),
            "round_cap": cap,
            "pairs": family.len() - i - 1,
            "distinguished_at_k": by_k,
            "max_round": max_round,
            "unresolved": unresolved,
        });
        Ok((unresolved.is_empty(), detail))
    })?;
    Ok((results, json!({})))
}

fn balancing(config: &SuiteConfig) -> Outcome {
    let max_n = config.max_n.unwrap_or(12).clamp(1, 12);
    let ids: Vec<usize> = (0..config.instances.unwrap_or(50)).collect();
    let results = run_all(&ids, |_, &id| {
        let mut rng = instance_rng(config.seed, id);
        let n = 1 + rng.below(max_n);
        let p = rng.next_f64();
        let g = gen_random(n, p, rng.next_u64());
        let (rw, d) = exact_rank_width(&g)?;
        let b = balance(&g, &d)?;
        let valid = validate(&g, &b).is_ok();
        let before = width(&g, &d)?;
        let after = width(&g, &b)?;
        let bound = height_bound(n);
        let ok = valid && after.width <= 2 * before.width && after.height as f64 <= bound;
        let detail = json!({
            "n": n,
            "g": to_graph6(&g),
            "rank_width": rw,
            "width_before": before.width,
            "height_before": before.height,
            "width_after": after.width,
            "height_after": after.height,
            "height_bound": bound,
            "valid": valid,
        });
        Ok((ok, detail))
    })?;
    Ok((results, json!({})))
}

enum Anchor {
    CompleteRankWidth(usize),
    CompleteTreewidth(usize),
    WidthGap(Graph),
}

fn inequalities(config: &SuiteConfig) -> Outcome {
    let mut items: Vec<Anchor> = (2..=8).map(Anchor::CompleteRankWidth).collect();
    items.extend((1..=8).map(Anchor::CompleteTreewidth));
    items.extend((1..=config.max_n.unwrap_or(7)).flat_map(all_graphs).map(Anchor::WidthGap));
    let results = run_all(&items, |_, a| {
        Ok(match a {
            Anchor::CompleteRankWidth(n) => {
                let rw = exact_rank_width(&gen_complete(*n))?.0;
                (rw == 1, json!({"check": "rank_width_of_complete", "n": n, "rank_width": rw}))
            }
            Anchor::CompleteTreewidth(n) => {
                let tw = treewidth_exact(&gen_complete(*n))?;
                (tw + 1 == *n, json!({"check": "treewidth_of_complete", "n": n, "treewidth": tw}))
            }
            Anchor::WidthGap(g) => {
                let rw = exact_rank_width(g)?.0;
                let tw = treewidth_exact(g)?;
                (rw <= tw + 1, json!({"check": "rank_width_vs_treewidth", "g": to_graph6(g), "rank_width": rw, "treewidth": tw}))
            }
        })
    })?;
    Ok((results, json!({})))
}

fn strategy(config: &SuiteConfig) -> Outcome {
    let max_n = config.max_n.unwrap_or(7).max(3);
    let ids: Vec<usize> = (0..config.instances.unwrap_or(30)).collect();
    let results = run_all(&ids, |_, &id| {
        let mut rng = instance_rng(config.seed, id);
        let n = 3 + rng.below(max_n - 2);
        let (a, b) = loop {
            let a = gen_distance_hereditary(n, rng.next_u64());
            let b = gen_distance_hereditary(n, rng.next_u64());
            if !are_isomorphic(&a.graph, &b.graph) {
                break (a, b);
            }
        };
        let d = balance(&a.graph, &a.decomposition())?;
        let exhaustive = n <= 6;
        let mut dup: Box<dyn Duplicator> = if exhaustive {
            Box::new(ExhaustiveDuplicator::new(&a.graph, &b.graph, 9)?)
        } else {
            Box::new(HeuristicDuplicator::new(n))
        };
        let t = spoiler_rankwidth_strategy(&a.graph, &b.graph, &d, dup.as_mut())?;
        let detour_bound = (n as f64).log2() + 1.0;
        let long_detours = t
            .detours
            .iter()
            .filter(|x| x.kind == Tag::Connectivity && x.placements as f64 > detour_bound)
            .count();
        let ok = t.outcome == StrategyOutcome::SpoilerWins
            && t.budget.pebbles_used_max <= 9
            && t.budget.main_rounds <= main_round_limit(n)
            && long_detours == 0;
        let detail = json!({
            "n": n,
            "g": to_graph6(&a.graph),
            "h": to_graph6(&b.graph),
            "duplicator": if exhaustive { "exhaustive" } else { "heuristic" },
            "outcome": t.outcome,
            "budget": t.budget,
            "main_round_limit": t.main_round_limit,
            "decomposition_height": t.decomposition_height,
            "detours": t.detours,
            "reason": t.reason,
        });
        Ok((ok, detail))
    })?;
    let max = |key: &str| results.iter().map(|r| r.detail["budget"][key].as_u64().unwrap_or(0)).max().unwrap_or(0);
    let aggregate = json!({
        "max_pebbles": max("pebbles_used_max"),
        "max_main_rounds": max("main_rounds"),
        "max_rounds": max("rounds_used"),
    });
    Ok((results, aggregate))
}

fn cfi(_: &SuiteConfig) -> Outcome {
    let bases = [gen_complete(4)];
    let results = run_all(&bases, |_, base| {
        let (g, h) = gen_cfi_pair(base)?;
        let isomorphic = are_isomorphic(&g, &h);
        let verdict = distinguish(&g, &h, 1, None)?;
        let detail = json!({
            "base": to_graph6(base),
            "n": g.n(),
            "isomorphic": isomorphic,
            "color_refinement": verdict,
        });
        Ok((!isomorphic && !verdict.distinguished(), detail))
    })?;
    Ok((results, json!({})))
}
