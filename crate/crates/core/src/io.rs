//! Graph file formats: graph6, a plain edge list and vertex-color files.
//!
//! The edge list is an `n m` header line followed by `m` lines `u v`. Color
//! files hold `v c` lines. Blank lines and lines starting with `#` are
//! skipped in both.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Color, Graph, Vertex};

const HEADER: &str = ">>graph6<<";

fn push_size(out: &mut Vec<u8>, n: usize) {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
}

/// graph6 encoding: the size, then the upper triangle column by column
/// (`(0,1), (0,2), (1,2), (0,3), ...`) packed six bits per byte, high bit
/// first, zero-padded.
pub fn to_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out = Vec::new();
    push_size(&mut out, n);
    let mut acc = 0u8;
    let mut bits = 0;
    for v in 1..n {
        for u in 0..v {
            acc = acc << 1 | u8::from(g.adjacent(u, v));
            bits += 1;
            if bits == 6 {
                out.push(acc + 63);
                acc = 0;
                bits = 0;
            }
        }
    }
    if bits > 0 {
        out.push((acc << (6 - bits)) + 63);
    }
    String::from_utf8(out).expect("printable ASCII")
}

pub fn from_graph6(text: &str) -> Result<Graph> {
    let s = text.trim();
    let s = s.strip_prefix(HEADER).unwrap_or(s).as_bytes();
    if s.iter().any(|&b| !(63..=126).contains(&b)) {
        return Err(Error::Parse("graph6 bytes must lie in 63..=126".into()));
    }
    let digits = |bytes: &[u8]| bytes.iter().fold(0usize, |n, &b| n << 6 | (b - 63) as usize);
    let (n, body) = match s {
        [] => return Err(Error::Parse("empty graph6 string".into())),
        [126, 126, rest @ ..] if rest.len() >= 6 => (digits(&rest[..6]), &rest[6..]),
        [126, rest @ ..] if rest.len() >= 3 => (digits(&rest[..3]), &rest[3..]),
        [126, ..] => return Err(Error::Parse("truncated graph6 size".into())),
        [b, rest @ ..] => ((b - 63) as usize, rest),
    };
    let pairs = n * n.saturating_sub(1) / 2;
    if body.len() != pairs.div_ceil(6) {
        return Err(Error::Parse(format!(
            "graph6 body has {} bytes, expected {} for n = {n}",
            body.len(),
            pairs.div_ceil(6)
        )));
    }
    let mut edges = Vec::new();
    let mut i = 0;
    for v in 1..n {
        for u in 0..v {
            let byte = body[i / 6] - 63;
            if byte >> (5 - i % 6) & 1 == 1 {
                edges.push((u, v));
            }
            i += 1;
        }
    }
    let padding = body.last().map_or(0, |&b| (b - 63) & ((1u8 << ((6 - pairs % 6) % 6)) - 1));
    if padding != 0 {
        return Err(Error::Parse("graph6 padding bits must be zero".into()));
    }
    Graph::from_edges(n, edges)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn two_numbers<T: std::str::FromStr>(line: usize, l: &str) -> Result<(T, T)> {
    let mut it = l.split_whitespace().map(str::parse::<T>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(Error::Parse(format!("line {line}: expected two non-negative integers"))),
    }
}

pub fn from_edge_list(text: &str) -> Result<Graph> {
    let mut lines = data_lines(text);
    let (line, header) = lines.next().ok_or_else(|| Error::Parse("missing `n m` header".into()))?;
    let (n, m): (usize, usize) = two_numbers(line, header)?;
    let edges = lines.map(|(i, l)| two_numbers::<Vertex>(i, l)).collect::<Result<Vec<_>>>()?;
    if edges.len() != m {
        return Err(Error::Parse(format!("header announces {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, edges)
}

pub fn to_edge_list(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// Applies a `v c` color file; unlisted vertices keep color 0.
pub fn apply_colors(g: Graph, text: &str) -> Result<Graph> {
    let mut colors = vec![0 as Color; g.n()];
    let mut seen = vec![false; g.n()];
    for (i, l) in data_lines(text) {
        let (v, c) = two_numbers::<u64>(i, l)?;
        let (v, c) = (v as usize, Color::try_from(c).map_err(|_| Error::Parse(format!("line {i}: color too large")))?);
        if v >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Parse(format!("line {i}: vertex {v} colored twice")));
        }
        colors[v] = c;
    }
    g.with_colors(colors)
}

/// Parses either format: text whose first data line holds two integers is
/// an edge list, anything else graph6.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let first = data_lines(text).next().map(|(_, l)| l);
    match first {
        Some(l) if l.split_whitespace().count() == 2 => from_edge_list(text),
        Some(l) => from_graph6(l),
        None => Err(Error::Parse("empty graph file".into())),
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}
