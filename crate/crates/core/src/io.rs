//! H3v1 text and JSON serialization of 3-graphs.
//!
//! H3v1: first line `n m`, then `m` lines `i j k` with `i < j < k`, sorted,
//! newline-terminated. Both forms are written canonically so a
//! write/read/write cycle is byte-stable.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph3, HypergraphError, Vertex};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: HypergraphError },
    #[error(transparent)]
    Graph(#[from] HypergraphError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<[Vertex; 3]>,
}

pub fn to_h3v1(h: &Hypergraph3) -> String {
    let mut out = String::with_capacity(16 + h.edge_count() * 12);
    out.push_str(&format!("{} {}\n", h.n(), h.edge_count()));
    for [a, b, c] in h.edges() {
        out.push_str(&format!("{a} {b} {c}\n"));
    }
    out
}

fn parse_fields(line: &str, lineno: usize, want: usize) -> Result<Vec<usize>, IoError> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.len() != want {
        return Err(IoError::Parse {
            line: lineno,
            msg: format!("expected {want} integers, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>().map_err(|_| IoError::Parse {
                line: lineno,
                msg: format!("not a nonnegative integer: {f:?}"),
            })
        })
        .collect()
}

pub fn parse_h3v1(text: &str) -> Result<Hypergraph3, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let hv = parse_fields(header, 1, 2)?;
    let (n, m) = (hv[0], hv[1]);
    if n < 3 {
        return Err(IoError::Invalid {
            line: 1,
            source: HypergraphError::TooFewVertices(n),
        });
    }
    let mut triples = Vec::with_capacity(m);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_fields(line, lineno, 3)?;
        let t = [v[0], v[1], v[2]];
        for &x in &t {
            if x == 0 || x > n {
                return Err(IoError::Invalid {
                    line: lineno,
                    source: HypergraphError::OutOfRange { vertex: x, n },
                });
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(IoError::Invalid {
                line: lineno,
                source: HypergraphError::DegenerateTriple(t),
            });
        }
        triples.push(t);
    }
    if triples.len() != m {
        return Err(IoError::Parse {
            line: 1,
            msg: format!("header announces {m} edges, found {}", triples.len()),
        });
    }
    Ok(Hypergraph3::new(n, triples)?)
}

pub fn to_json(h: &Hypergraph3) -> String {
    let g = JsonGraph {
        n: h.n(),
        edges: h.edges().to_vec(),
    };
    serde_json::to_string(&g).expect("plain data serializes")
}

pub fn parse_json(text: &str) -> Result<Hypergraph3, IoError> {
    let g: JsonGraph = serde_json::from_str(text)?;
    Ok(Hypergraph3::new(g.n, g.edges)?)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads H3v1, or JSON when the extension is `.json`.
pub fn read_hypergraph(path: &Path) -> Result<Hypergraph3, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    if is_json(path) {
        parse_json(&text)
    } else {
        parse_h3v1(&text)
    }
}

pub fn write_hypergraph(h: &Hypergraph3, path: &Path) -> Result<(), IoError> {
    let text = if is_json(path) {
        let mut s = to_json(h);
        s.push('\n');
        s
    } else {
        to_h3v1(h)
    };
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}
