//! Loading graphs and states, and writing canonical JSON.

use std::fs;
use std::io::{Read, Write};

use anyhow::{Context, Result};
use qwalk::graph::{parse_graph, parse_oriented, Format};
use qwalk::state::DensityJson;
use qwalk::{DensityMatrix, Graph, OrientedGraph, WalkGraph};
use serde::Serialize;
use serde_json::Value;

/// Marks an error as bad input (exit code 2).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Lifts a library error, tagging input-class errors for the exit code.
pub fn lib<T>(r: qwalk::Result<T>) -> Result<T> {
    r.map_err(|e| {
        if e.is_input_error() {
            input_error(e.to_string())
        } else {
            anyhow::Error::new(e)
        }
    })
}

pub enum Loaded {
    Graph(Graph),
    Oriented(OrientedGraph),
}

impl Loaded {
    pub fn walk(&self) -> &dyn WalkGraph {
        match self {
            Loaded::Graph(g) => g,
            Loaded::Oriented(x) => x,
        }
    }
}

pub struct Input {
    pub graph: Loaded,
    pub labels: Vec<String>,
}

fn read_text(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_error(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input_error(format!("reading {path}: {e}")))
}

pub fn load_graph(path: &str, format: Format, oriented: bool) -> Result<Input> {
    let text = read_text(path)?;
    let input = if oriented {
        let p = lib(parse_oriented(&text, format))?;
        Input {
            graph: Loaded::Oriented(p.graph),
            labels: p.labels,
        }
    } else {
        let p = lib(parse_graph(&text, format))?;
        Input {
            graph: Loaded::Graph(p.graph),
            labels: p.labels,
        }
    };
    Ok(input)
}

/// `vertex:<label>`, `mixed`, or a path to a `{"re": .., "im": ..}` file.
pub fn load_state(spec: &str, input: &Input, tol: f64) -> Result<(DensityMatrix, Option<usize>)> {
    let n = input.graph.walk().order();
    if let Some(label) = spec.strip_prefix("vertex:") {
        let a = vertex_index(label, input)?;
        return Ok((lib(DensityMatrix::vertex(n, a))?, Some(a)));
    }
    if spec == "mixed" {
        return Ok((DensityMatrix::maximally_mixed(n), None));
    }
    let m = load_state_matrix(spec)?;
    if m.nrows() != n {
        return Err(input_error(format!(
            "state has order {} but the graph has {n} vertices",
            m.nrows()
        )));
    }
    let p = lib(DensityMatrix::new(m, tol))?;
    let a = p.as_vertex(tol);
    Ok((p, a))
}

pub fn load_state_matrix(path: &str) -> Result<qwalk::linalg::CMatrix> {
    let text = read_text(path)?;
    let json: DensityJson =
        serde_json::from_str(&text).map_err(|e| input_error(format!("state file {path}: {e}")))?;
    lib(json.to_matrix())
}

pub fn vertex_index(label: &str, input: &Input) -> Result<usize> {
    input
        .labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| input_error(format!("unknown vertex {label:?}")))
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
pub fn emit<T: Serialize>(value: &T) -> Result<()> {
    let v: Value = serde_json::to_value(value).context("serializing output")?;
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_stdout(&text)
}

/// A closed downstream pipe is not an error.
pub fn write_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
