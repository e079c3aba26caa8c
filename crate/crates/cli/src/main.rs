use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wllab_core::decomp::{balance, exact_rank_width, validate, width, RankDecomposition};
use wllab_core::game::{
    duplicator_survives, spoiler_rankwidth_strategy_with, Duplicator, ExhaustiveDuplicator, HeuristicDuplicator,
};
use wllab_core::generators::{gen_cfi_pair, gen_distance_hereditary, gen_random};
use wllab_core::graph::connected_components;
use wllab_core::io::{apply_colors, read_graph, to_edge_list, to_graph6};
use wllab_core::split::{flip_for_cut, flipped_graph, split_pair, FlipFunction};
use wllab_core::suite::{run_suite, SuiteConfig, SUITES};
use wllab_core::wl::{distinguish, individualize_and_refine, JointRefiner};
use wllab_core::{Error, Graph, VertexSet};

/// Weisfeiler-Leman refinement, rank decompositions and pebble games.
///
/// Graphs are read as graph6 or as an `n m` edge list. WLLAB_THREADS sets
/// the worker count and WLLAB_TUPLE_BUDGET the largest permitted n^k.
#[derive(Parser)]
#[command(name = "wllab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// k-WL refinement of one graph or a pair
    #[command(subcommand)]
    Wl(WlCommand),
    /// Rank decompositions
    #[command(subcommand)]
    Rw(RwCommand),
    /// Flip functions that separate a cut
    #[command(subcommand)]
    Flip(FlipCommand),
    /// Split pairs of a cut
    #[command(subcommand)]
    Split(SplitCommand),
    /// Bijective pebble games
    #[command(subcommand)]
    Game(GameCommand),
    /// Seeded graph families
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a property suite and emit a JSON report
    Suite(SuiteArgs),
}

#[derive(Args)]
struct Colors {
    /// Vertex colors as `v c` lines
    #[arg(long)]
    colors: Option<PathBuf>,
}

#[derive(Subcommand)]
enum WlCommand {
    /// Per-round class counts of k-WL on one graph
    Run {
        #[arg(long)]
        k: usize,
        /// Stop after this many rounds (the initial coloring is round 1)
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        colors: Colors,
    },
    /// Whether k-WL tells two graphs apart
    Distinguish {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rounds: Option<usize>,
        g: PathBuf,
        h: PathBuf,
    },
}

#[derive(Subcommand)]
enum RwCommand {
    /// Optimal rank decomposition (n <= 12)
    Exact { graph: PathBuf },
    /// Rebalance a decomposition to logarithmic height
    Balance {
        #[arg(long)]
        decomp: PathBuf,
        graph: PathBuf,
    },
    /// Check a decomposition and report its width and height
    Validate {
        #[arg(long)]
        decomp: PathBuf,
        graph: PathBuf,
    },
}

#[derive(Subcommand)]
enum FlipCommand {
    /// Refine after individualizing a split pair of the cut, then build the
    /// flip that removes every edge across it
    Build {
        /// JSON array of the vertices on one side
        #[arg(long)]
        cut: PathBuf,
        graph: PathBuf,
    },
    /// Apply a flip written by `flip build`
    Apply {
        #[arg(long)]
        flip: PathBuf,
        graph: PathBuf,
    },
}

#[derive(Subcommand)]
enum SplitCommand {
    /// Ordered split pair of the cut
    Pair {
        #[arg(long)]
        cut: PathBuf,
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DuplicatorKind {
    Exhaustive,
    Heuristic,
}

#[derive(Subcommand)]
enum GameCommand {
    /// Whether Duplicator survives the given rounds (n <= 6)
    Exhaust {
        #[arg(long)]
        pebbles: usize,
        #[arg(long)]
        rounds: usize,
        g: PathBuf,
        h: PathBuf,
    },
    /// Play the decomposition-guided Spoiler and print the transcript
    Strategy {
        /// Decomposition of G; defaults to a balanced optimal one
        #[arg(long)]
        decomp: Option<PathBuf>,
        /// Defaults to exhaustive up to 6 vertices, heuristic above
        #[arg(long, value_enum)]
        duplicator: Option<DuplicatorKind>,
        /// Do not cash in refinement differences early
        #[arg(long)]
        no_finisher: bool,
        g: PathBuf,
        h: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Graph6,
    Edges,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Distance-hereditary graph from seeded pendant and twin steps
    Dh {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Graph6)]
        format: Format,
    },
    /// CFI pair over a base graph: untwisted, then twisted
    Cfi {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Graph6)]
        format: Format,
    },
    /// Random graph with independent edge probability p
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Graph6)]
        format: Format,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// One of the suite names, or `all`
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Write the JSON report here and print only the summary table
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage problems exit with 2, errors and failed checks with 1.
enum Failure {
    Usage(String),
    Run(Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn graph(path: &Path) -> Result<Graph, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!("{}: no such file", path.display())));
    }
    Ok(read_graph(path)?)
}

fn colored(path: &Path, colors: &Colors) -> Result<Graph, Failure> {
    let g = graph(path)?;
    match &colors.colors {
        Some(c) => Ok(apply_colors(g, &input(c)?)?),
        None => Ok(g),
    }
}

fn json_file(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&input(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn decomposition(path: &Path) -> Result<RankDecomposition, Failure> {
    Ok(RankDecomposition::from_json(&json_file(path)?)?)
}

fn cut(path: &Path, n: usize) -> Result<VertexSet, Failure> {
    let vs: Vec<usize> = serde_json::from_value(json_file(path)?)
        .map_err(|e| Failure::Usage(format!("{}: expected a JSON array of vertices: {e}", path.display())))?;
    if let Some(&v) = vs.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n }.into());
    }
    Ok(VertexSet::from_vertices(n, vs))
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("values serialize"));
}

fn format_graph(g: &Graph, format: Format) -> String {
    match format {
        Format::Graph6 => format!("{}\n", to_graph6(g)),
        Format::Edges => to_edge_list(g),
    }
}

fn wl(cmd: WlCommand) -> Result<(), Failure> {
    match cmd {
        WlCommand::Run { k, rounds, graph: path, colors } => {
            let g = colored(&path, &colors)?;
            let mut r = JointRefiner::new(vec![&g], k)?;
            let mut per_round = vec![json!({"round": r.round(), "classes": r.class_count()})];
            while rounds.map_or(true, |m| r.round() < m) && !r.is_stable() {
                r.step();
                per_round.push(json!({"round": r.round(), "classes": r.class_count()}));
            }
            emit(&json!({"k": k, "n": g.n(), "rounds": per_round, "stable": r.is_stable()}));
        }
        WlCommand::Distinguish { k, rounds, g, h } => {
            let v = distinguish(&graph(&g)?, &graph(&h)?, k, rounds)?;
            emit(&json!({"k": k, "max_rounds": rounds, "verdict": v}));
        }
    }
    Ok(())
}

fn rw(cmd: RwCommand) -> Result<(), Failure> {
    match cmd {
        RwCommand::Exact { graph: path } => {
            let g = graph(&path)?;
            let (rw, d) = exact_rank_width(&g)?;
            emit(&json!({"rank_width": rw, "report": width(&g, &d)?, "decomposition": d.to_json()}));
        }
        RwCommand::Balance { decomp, graph: path } => {
            let g = graph(&path)?;
            let d = decomposition(&decomp)?;
            let b = balance(&g, &d)?;
            emit(&json!({"before": width(&g, &d)?, "after": width(&g, &b)?, "decomposition": b.to_json()}));
        }
        RwCommand::Validate { decomp, graph: path } => {
            let g = graph(&path)?;
            let d = decomposition(&decomp)?;
            match validate(&g, &d) {
                Ok(()) => emit(&json!({"valid": true, "report": width(&g, &d)?})),
                Err(violations) => {
                    emit(&json!({"valid": false, "violations": violations}));
                    return Err(Failure::Checks);
                }
            }
        }
    }
    Ok(())
}

fn flip(cmd: FlipCommand) -> Result<(), Failure> {
    match cmd {
        FlipCommand::Build { cut: cut_path, graph: path } => {
            let g = graph(&path)?;
            let x = cut(&cut_path, g.n())?;
            let sp = split_pair(&g, &x);
            let colors = individualize_and_refine(&g, &sp.sequence(), 1, Some(2))?.colors;
            let f = flip_for_cut(&g.clone().with_colors(colors.clone())?, &x)?;
            emit(&json!({"colors": colors, "flip": f}));
        }
        FlipCommand::Apply { flip: flip_path, graph: path } => {
            let g = graph(&path)?;
            let spec = json_file(&flip_path)?;
            let f: FlipFunction = serde_json::from_value(spec["flip"].clone())
                .map_err(|e| Failure::Usage(format!("{}: {e}", flip_path.display())))?;
            let g = match spec.get("colors") {
                Some(c) => g.with_colors(
                    serde_json::from_value(c.clone()).map_err(|e| Failure::Usage(format!("{}: {e}", flip_path.display())))?,
                )?,
                None => g,
            };
            let gf = flipped_graph(&g, &f)?;
            emit(&json!({
                "graph6": to_graph6(&gf),
                "edges": gf.edges().collect::<Vec<_>>(),
                "components": connected_components(&gf),
            }));
        }
    }
    Ok(())
}

fn split(cmd: SplitCommand) -> Result<(), Failure> {
    let SplitCommand::Pair { cut: cut_path, graph: path } = cmd;
    let g = graph(&path)?;
    let x = cut(&cut_path, g.n())?;
    let sp = split_pair(&g, &x);
    emit(&json!({"x": x.to_vec(), "a": sp.a, "b": sp.b, "cut_rank": sp.a.len()}));
    Ok(())
}

fn game(cmd: GameCommand) -> Result<(), Failure> {
    match cmd {
        GameCommand::Exhaust { pebbles, rounds, g, h } => {
            let (g, h) = (graph(&g)?, graph(&h)?);
            let survives = duplicator_survives(&g, &h, pebbles, rounds, &[])?;
            emit(&json!({"pebbles": pebbles, "rounds": rounds, "duplicator_survives": survives}));
        }
        GameCommand::Strategy { decomp, duplicator, no_finisher, g, h } => {
            let (g, h) = (graph(&g)?, graph(&h)?);
            let d = match decomp {
                Some(p) => decomposition(&p)?,
                None => balance(&g, &exact_rank_width(&g)?.1)?,
            };
            let kind = duplicator.unwrap_or(if g.n() <= 6 { DuplicatorKind::Exhaustive } else { DuplicatorKind::Heuristic });
            let mut dup: Box<dyn Duplicator> = match kind {
                DuplicatorKind::Exhaustive => Box::new(ExhaustiveDuplicator::new(&g, &h, 9)?),
                DuplicatorKind::Heuristic => Box::new(HeuristicDuplicator::new(g.n())),
            };
            let t = spoiler_rankwidth_strategy_with(&g, &h, &d, dup.as_mut(), !no_finisher)?;
            emit(&serde_json::to_value(&t).map_err(Error::from)?);
        }
    }
    Ok(())
}

fn generate(cmd: GenCommand) -> Result<(), Failure> {
    match cmd {
        GenCommand::Dh { n, seed, format } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            print!("{}", format_graph(&gen_distance_hereditary(n, seed).graph, format));
        }
        GenCommand::Cfi { base, format } => {
            let (g, h) = gen_cfi_pair(&graph(&base)?)?;
            print!("{}", format_graph(&g, format));
            if matches!(format, Format::Edges) {
                println!();
            }
            print!("{}", format_graph(&h, format));
        }
        GenCommand::Random { n, p, seed, format } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Failure::Usage("--p must lie in [0, 1]".into()));
            }
            print!("{}", format_graph(&gen_random(n, p, seed), format));
        }
    }
    Ok(())
}

fn suite(args: SuiteArgs) -> Result<(), Failure> {
    let names: Vec<&str> = match args.name.as_str() {
        "all" => SUITES.to_vec(),
        name if SUITES.contains(&name) => vec![name],
        name => return Err(Failure::Usage(format!("unknown suite {name:?}; expected all or one of {}", SUITES.join(", ")))),
    };
    let config = SuiteConfig { seed: args.seed, instances: args.instances, max_n: args.max_n, k: args.k, rounds: args.rounds };
    let mut reports = Vec::new();
    for name in names {
        let mut r = run_suite(name, &config)?;
        r.command = std::env::args().skip(1).collect();
        let mut lines = vec![r.summary()];
        lines.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
        lines.extend(r.counterexamples().take(5).map(|c| format!("  counterexample {}: {}", c.id, c.detail)));
        for l in lines {
            // the table goes to stdout only when the report goes to a file
            if args.out.is_some() {
                println!("{l}");
            } else {
                eprintln!("{l}");
            }
        }
        reports.push(r);
    }
    let bytes = if reports.len() == 1 {
        reports[0].to_json_bytes()
    } else {
        let mut b = serde_json::to_vec_pretty(&reports).map_err(Error::from)?;
        b.push(b'\n');
        b
    };
    match &args.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| Failure::Run(Error::Parse(format!("{}: {e}", path.display()))))?,
        None => print!("{}", String::from_utf8(bytes).expect("JSON is UTF-8")),
    }
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WLLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("WLLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Wl(c) => wl(c),
        Command::Rw(c) => rw(c),
        Command::Flip(c) => flip(c),
        Command::Split(c) => split(c),
        Command::Game(c) => game(c),
        Command::Gen(c) => generate(c),
        Command::Suite(a) => suite(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => ExitCode::from(1),
    }
}
