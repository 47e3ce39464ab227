//! Plain-text graph and point files.
//!
//! Graph files start with `n_a n_b m`, followed by `m` lines `a b w`.
//! Lattice coordinates may follow as `# coord A i x y` / `# coord B j x y`,
//! one per vertex. Point files hold lines `A x y` and `B x y`. Blank lines
//! and other `#` lines are ignored in both.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;
use zom::{BipartiteGraph, GraphError, Point, PointSet};

use crate::CliError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, what: &str, tok: Option<&str>) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("{what} {tok:?} is not a valid number")))
}

fn no_trailing<'a>(line: usize, mut rest: impl Iterator<Item = &'a str>) -> Result<(), ParseError> {
    match rest.next() {
        Some(tok) => Err(err(line, format!("unexpected trailing field {tok:?}"))),
        None => Ok(()),
    }
}

pub fn parse_graph(text: &str) -> Result<BipartiteGraph, ParseError> {
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    let mut coords: Vec<(usize, bool, usize, i64, i64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut toks = comment.split_whitespace();
            if toks.next() != Some("coord") {
                continue;
            }
            let is_a = match toks.next() {
                Some("A") => true,
                Some("B") => false,
                other => return Err(err(line, format!("coordinate side must be A or B, got {other:?}"))),
            };
            let idx: usize = field(line, "vertex index", toks.next())?;
            let x: i64 = field(line, "x coordinate", toks.next())?;
            let y: i64 = field(line, "y coordinate", toks.next())?;
            no_trailing(line, toks)?;
            coords.push((line, is_a, idx, x, y));
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        match header {
            None => {
                let n_a = field(line, "n_a", toks.next())?;
                let n_b = field(line, "n_b", toks.next())?;
                let m = field(line, "m", toks.next())?;
                no_trailing(line, toks)?;
                header = Some((n_a, n_b, m, line));
            }
            Some((_, _, m, _)) => {
                if edges.len() == m {
                    return Err(err(line, format!("more than the {m} declared edges")));
                }
                let a: usize = field(line, "endpoint a", toks.next())?;
                let b: usize = field(line, "endpoint b", toks.next())?;
                let w: u64 = field(line, "weight", toks.next())?;
                no_trailing(line, toks)?;
                edges.push((a, b, w));
                edge_lines.push(line);
            }
        }
    }
    let (n_a, n_b, m, header_line) = header.ok_or_else(|| err(1, "missing header \"n_a n_b m\""))?;
    if edges.len() != m {
        return Err(err(header_line, format!("header declares {m} edges, found {}", edges.len())));
    }
    let graph = BipartiteGraph::new(n_a, n_b, edges).map_err(|e| {
        let index = match e {
            GraphError::IndexOutOfRange { index, .. }
            | GraphError::InvalidWeight { index, .. }
            | GraphError::DuplicateEdge { index, .. } => index,
            GraphError::LengthMismatch { .. } => 0,
        };
        err(edge_lines.get(index).copied().unwrap_or(header_line), e.to_string())
    })?;
    if coords.is_empty() {
        return Ok(graph);
    }
    let mut table: Vec<Option<(i64, i64)>> = vec![None; n_a + n_b];
    for &(line, is_a, idx, x, y) in &coords {
        let v = match (is_a, idx) {
            (true, i) if i < n_a => i,
            (false, j) if j < n_b => n_a + j,
            _ => return Err(err(line, "coordinate for a vertex out of range")),
        };
        if table[v].replace((x, y)).is_some() {
            return Err(err(line, "duplicate coordinate"));
        }
    }
    if let Some(v) = table.iter().position(Option::is_none) {
        let name = if v < n_a { format!("A {v}") } else { format!("B {}", v - n_a) };
        return Err(err(coords[0].0, format!("no coordinate for vertex {name}")));
    }
    graph
        .with_coordinates(table.into_iter().map(Option::unwrap).collect())
        .map_err(|e| err(coords[0].0, e.to_string()))
}

pub fn emit_graph(graph: &BipartiteGraph) -> String {
    let mut out = format!("{} {} {}\n", graph.n_a(), graph.n_b(), graph.edge_count());
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", e.a, e.b, e.weight);
    }
    if let Some(coords) = graph.coordinates() {
        for (v, &(x, y)) in coords.iter().enumerate() {
            let (side, idx) = if v < graph.n_a() { ('A', v) } else { ('B', v - graph.n_a()) };
            let _ = writeln!(out, "# coord {side} {idx} {x} {y}");
        }
    }
    out
}

pub fn parse_points(text: &str) -> Result<PointSet, ParseError> {
    let mut set = PointSet::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let side = toks.next();
        let x: f64 = field(line, "x coordinate", toks.next())?;
        let y: f64 = field(line, "y coordinate", toks.next())?;
        no_trailing(line, toks)?;
        if !x.is_finite() || !y.is_finite() {
            return Err(err(line, "coordinates must be finite"));
        }
        match side {
            Some("A") => set.a.push(Point::new(x, y)),
            Some("B") => set.b.push(Point::new(x, y)),
            other => return Err(err(line, format!("side must be A or B, got {other:?}"))),
        }
    }
    Ok(set)
}

/// `Display` for `f64` prints the shortest string that parses back to the
/// same value, so emit and parse round-trip exactly.
pub fn emit_points(points: &PointSet) -> String {
    let mut out = String::new();
    for (side, pts) in [('A', &points.a), ('B', &points.b)] {
        for p in pts.iter() {
            let _ = writeln!(out, "{side} {} {}", p.x, p.y);
        }
    }
    out
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: ParseError) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn read_graph(path: &Path) -> Result<BipartiteGraph, CliError> {
    parse_graph(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn read_points(path: &Path) -> Result<PointSet, CliError> {
    parse_points(&read(path)?).map_err(|e| with_path(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_graph() {
        let g = parse_graph("2 2 1\n0 0 1\n").unwrap();
        assert_eq!((g.n_a(), g.n_b(), g.edge_count()), (2, 2, 1));
        assert_eq!(g.weight(0), 1);
    }

    #[test]
    fn weight_two_names_its_line() {
        let e = parse_graph("2 2 2\n0 0 1\n\n1 1 2\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("weight"));
    }

    #[test]
    fn malformed_lines() {
        assert_eq!(parse_graph("2 2 1\n0 x 1\n").unwrap_err().line, 2);
        assert_eq!(parse_graph("").unwrap_err().line, 1);
        assert_eq!(parse_graph("1 1 2\n0 0 1\n").unwrap_err().line, 1);
        assert_eq!(parse_graph("1 1 1\n0 0 1\n0 0 0\n").unwrap_err().line, 3);
        assert_eq!(parse_graph("1 1 1\n0 0 1 7\n").unwrap_err().line, 2);
        assert_eq!(parse_graph("1 1 1\n0 3 1\n").unwrap_err().line, 2);
    }

    #[test]
    fn coordinates_round_trip() {
        let text = "1 1 1\n0 0 0\n# coord A 0 0 0\n# coord B 0 1 0\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.coordinates(), Some(&[(0, 0), (1, 0)][..]));
        assert_eq!(emit_graph(&g), text);
        assert_eq!(parse_graph("1 1 1\n0 0 0\n# coord A 0 0 0\n").unwrap_err().line, 3);
        assert_eq!(parse_graph("1 1 1\n0 0 0\n# coord C 0 0 0\n").unwrap_err().line, 3);
    }

    #[test]
    fn plain_comments_are_ignored() {
        let g = parse_graph("# a comment\n1 1 1\n# another\n0 0 1\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.coordinates().is_none());
    }

    #[test]
    fn points() {
        let p = parse_points("A 0 0\nB 3 4\n").unwrap();
        assert_eq!((p.a.len(), p.b.len()), (1, 1));
        assert_eq!(p.b[0], Point::new(3.0, 4.0));
        assert_eq!(parse_points("A 0 0\nB 3 four\n").unwrap_err().line, 2);
        assert_eq!(parse_points("C 0 0\n").unwrap_err().line, 1);
        assert_eq!(parse_points("A nan 0\n").unwrap_err().line, 1);
        let odd = PointSet::new(vec![Point::new(0.1, 1e-300)], vec![Point::new(-2.5, 1.0 / 3.0)]);
        assert_eq!(parse_points(&emit_points(&odd)).unwrap(), odd);
    }
}
