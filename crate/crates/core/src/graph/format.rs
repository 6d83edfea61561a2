//! Text formats: edge/arc lists, graph6 (undirected only) and JSON.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Graph, OrientedGraph};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    EdgeList,
    Graph6,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "arc-list" => Ok(Format::EdgeList),
            "graph6" | "g6" => Ok(Format::Graph6),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::EdgeList => "edge-list",
            Format::Graph6 => "graph6",
            Format::Json => "json",
        })
    }
}

/// A parsed graph together with the original label of each dense vertex index.
#[derive(Clone, Debug)]
pub struct Parsed<G> {
    pub graph: G,
    pub labels: Vec<String>,
}

pub fn parse_graph(text: &str, format: Format) -> Result<Parsed<Graph>> {
    match format {
        Format::EdgeList => {
            let (labels, pairs) = parse_pairs(text)?;
            let mut g = Graph::empty(labels.len());
            for (line, u, v) in pairs {
                g.add_edge(u, v)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
            }
            Ok(Parsed { graph: g, labels })
        }
        Format::Graph6 => {
            let graph = parse_graph6(text)?;
            Ok(Parsed {
                labels: dense_labels(graph.order()),
                graph,
            })
        }
        Format::Json => {
            let doc: JsonGraph = serde_json::from_str(text)?;
            let edges = doc
                .edges
                .ok_or_else(|| Error::parse(0, "missing \"edges\" array"))?;
            let mut g = Graph::empty(doc.n);
            for (i, [u, v]) in edges.into_iter().enumerate() {
                g.add_edge(u, v)
                    .map_err(|e| Error::parse(0, format!("edges[{i}]: {e}")))?;
            }
            Ok(Parsed {
                labels: dense_labels(doc.n),
                graph: g,
            })
        }
    }
}

pub fn parse_oriented(text: &str, format: Format) -> Result<Parsed<OrientedGraph>> {
    match format {
        Format::EdgeList => {
            let (labels, pairs) = parse_pairs(text)?;
            let mut g = OrientedGraph::empty(labels.len());
            for (line, u, v) in pairs {
                g.add_arc(u, v)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
            }
            Ok(Parsed { graph: g, labels })
        }
        Format::Graph6 => Err(Error::InvalidArgument(
            "graph6 cannot encode oriented graphs; use an arc list or JSON".into(),
        )),
        Format::Json => {
            let doc: JsonGraph = serde_json::from_str(text)?;
            let arcs = doc
                .arcs
                .ok_or_else(|| Error::parse(0, "missing \"arcs\" array"))?;
            let mut g = OrientedGraph::empty(doc.n);
            for (i, [u, v]) in arcs.into_iter().enumerate() {
                g.add_arc(u, v)
                    .map_err(|e| Error::parse(0, format!("arcs[{i}]: {e}")))?;
            }
            Ok(Parsed {
                labels: dense_labels(doc.n),
                graph: g,
            })
        }
    }
}

pub fn serialize_graph(g: &Graph, format: Format) -> String {
    match format {
        Format::EdgeList => write_pairs(g.order(), g.edges()),
        Format::Graph6 => write_graph6(g),
        Format::Json => {
            let doc = JsonGraph {
                n: g.order(),
                edges: Some(g.edges().map(|(u, v)| [u, v]).collect()),
                arcs: None,
            };
            serde_json::to_string(&doc).expect("graph JSON")
        }
    }
}

pub fn serialize_oriented(g: &OrientedGraph, format: Format) -> Result<String> {
    match format {
        Format::EdgeList => Ok(write_pairs(g.order(), g.arcs())),
        Format::Graph6 => Err(Error::InvalidArgument(
            "graph6 cannot encode oriented graphs".into(),
        )),
        Format::Json => {
            let doc = JsonGraph {
                n: g.order(),
                edges: None,
                arcs: Some(g.arcs().map(|(u, v)| [u, v]).collect()),
            };
            Ok(serde_json::to_string(&doc).expect("graph JSON"))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    edges: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    arcs: Option<Vec<[usize; 2]>>,
}

fn dense_labels(n: usize) -> Vec<String> {
    (0..n).map(|v| v.to_string()).collect()
}

/// Parses "u v" lines (and single-token vertex declarations). Labels that are
/// all non-negative integers are ordered numerically, otherwise by first
/// appearance. Returns the label table and `(line, u, v)` index triples.
fn parse_pairs(text: &str) -> Result<(Vec<String>, Vec<(usize, usize, usize)>)> {
    let mut seen: Vec<String> = Vec::new();
    let mut raw: Vec<(usize, String, String)> = Vec::new();
    let note = |label: &str, seen: &mut Vec<String>| {
        if !seen.iter().any(|s| s == label) {
            seen.push(label.to_string());
        }
    };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            [v] => note(v, &mut seen),
            [u, v] => {
                note(u, &mut seen);
                note(v, &mut seen);
                raw.push((line_no, u.to_string(), v.to_string()));
            }
            _ => {
                return Err(Error::parse(
                    line_no,
                    format!("expected \"u v\", found {} tokens", tokens.len()),
                ))
            }
        }
    }

    let numeric: Option<Vec<u64>> = seen.iter().map(|s| s.parse::<u64>().ok()).collect();
    if let Some(mut keyed) =
        numeric.map(|nums| nums.into_iter().zip(seen.clone()).collect::<Vec<_>>())
    {
        keyed.sort();
        seen = keyed.into_iter().map(|(_, s)| s).collect();
    }
    let index: HashMap<&str, usize> = seen
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let pairs = raw
        .iter()
        .map(|(line, u, v)| (*line, index[u.as_str()], index[v.as_str()]))
        .collect();
    Ok((seen, pairs))
}

fn write_pairs(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> String {
    let pairs: Vec<_> = pairs.collect();
    let mut touched = vec![false; n];
    for &(u, v) in &pairs {
        touched[u] = true;
        touched[v] = true;
    }
    let mut out = String::new();
    for (v, _) in touched.iter().enumerate().filter(|(_, t)| !**t) {
        out.push_str(&format!("{v}\n"));
    }
    for (u, v) in pairs {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

const GRAPH6_HEADER: &str = ">>graph6<<";
const MAX_GRAPH6_ORDER: usize = 62;

fn parse_graph6(text: &str) -> Result<Graph> {
    let body = text.trim();
    let body = body.strip_prefix(GRAPH6_HEADER).unwrap_or(body);
    let bytes = body.as_bytes();
    let (&first, rest) = bytes
        .split_first()
        .ok_or_else(|| Error::parse(1, "empty graph6 string"))?;
    if !(63..=126).contains(&first) {
        return Err(Error::parse(
            1,
            format!("offset 0: byte {first} outside graph6 range"),
        ));
    }
    if first == 126 {
        return Err(Error::parse(
            1,
            format!("offset 0: only graphs with at most {MAX_GRAPH6_ORDER} vertices are supported"),
        ));
    }
    let n = (first - 63) as usize;
    let nbits = n * n.saturating_sub(1) / 2;
    let expected = nbits.div_ceil(6);
    if rest.len() != expected {
        return Err(Error::parse(
            1,
            format!(
                "expected {expected} data bytes for n={n}, found {}",
                rest.len()
            ),
        ));
    }
    let mut bits = Vec::with_capacity(expected * 6);
    for (k, &b) in rest.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Error::parse(
                1,
                format!("offset {}: byte {b} outside graph6 range", k + 1),
            ));
        }
        let x = b - 63;
        bits.extend((0..6).rev().map(|s| (x >> s) & 1 == 1));
    }
    if bits[nbits..].iter().any(|&b| b) {
        return Err(Error::parse(1, "non-zero padding bits"));
    }
    let mut g = Graph::empty(n);
    let mut k = 0;
    for v in 1..n {
        for u in 0..v {
            if bits[k] {
                g.add_edge(u, v)?;
            }
            k += 1;
        }
    }
    Ok(g)
}

fn write_graph6(g: &Graph) -> String {
    let n = g.order();
    assert!(
        n <= MAX_GRAPH6_ORDER,
        "graph6 writer supports n <= {MAX_GRAPH6_ORDER}"
    );
    let mut out = vec![(n as u8) + 63];
    let mut bits = Vec::new();
    for v in 1..n {
        for u in 0..v {
            bits.push(g.has_edge(u, v));
        }
    }
    for chunk in bits.chunks(6) {
        let mut x = 0u8;
        for i in 0..6 {
            x = (x << 1) | u8::from(chunk.get(i).copied().unwrap_or(false));
        }
        out.push(x + 63);
    }
    String::from_utf8(out).expect("graph6 is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_single_edge() {
        let p = parse_graph("0 1", Format::EdgeList).unwrap();
        assert_eq!(p.graph, Graph::complete(2));
    }

    #[test]
    fn edge_list_path_with_comments() {
        let p = parse_graph("# P3\n0 1 # first\n1 2\n", Format::EdgeList).unwrap();
        assert_eq!(p.graph, Graph::path(3));
    }

    #[test]
    fn edge_list_remaps_labels() {
        let p = parse_graph("a b\nb c\n", Format::EdgeList).unwrap();
        assert_eq!(p.labels, vec!["a", "b", "c"]);
        assert_eq!(p.graph, Graph::path(3));
        let p = parse_graph("10 2\n", Format::EdgeList).unwrap();
        assert_eq!(p.labels, vec!["2", "10"]);
    }

    #[test]
    fn edge_list_errors_carry_line() {
        match parse_graph("0 1\n1 1\n", Format::EdgeList) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_graph("0 1\n1 0\n", Format::EdgeList) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_graph("0 1 2\n", Format::EdgeList).is_err());
    }

    #[test]
    fn graph6_k2() {
        assert_eq!(
            parse_graph("A_", Format::Graph6).unwrap().graph,
            Graph::complete(2)
        );
        assert_eq!(serialize_graph(&Graph::complete(2), Format::Graph6), "A_");
        assert_eq!(
            parse_graph(">>graph6<<A_\n", Format::Graph6).unwrap().graph,
            Graph::complete(2)
        );
    }

    #[test]
    fn graph6_reference_strings() {
        // Reference encodings from the published format description.
        let k4 = parse_graph("C~", Format::Graph6).unwrap().graph;
        assert_eq!(k4, Graph::complete(4));
        let five = Graph::new(5, [(0, 2), (0, 4), (1, 3), (3, 4)]).unwrap();
        assert_eq!(serialize_graph(&five, Format::Graph6), "DQc");
        assert_eq!(serialize_graph(&Graph::empty(0), Format::Graph6), "?");
    }

    #[test]
    fn graph6_rejects_bad_input() {
        assert!(parse_graph("A", Format::Graph6).is_err());
        assert!(parse_graph("A`", Format::Graph6).is_err()); // padding bit set
        assert!(parse_graph("~?@c", Format::Graph6).is_err());
        assert!(parse_oriented("A_", Format::Graph6).is_err());
    }

    #[test]
    fn json_graph_and_arcs() {
        let g = parse_graph(r#"{"n": 3, "edges": [[0,1],[1,2]]}"#, Format::Json).unwrap();
        assert_eq!(g.graph, Graph::path(3));
        let o = parse_oriented(r#"{"n": 2, "arcs": [[1,0]]}"#, Format::Json).unwrap();
        assert_eq!(o.graph.skew_adjacency()[(1, 0)], 1);
        assert!(parse_graph(r#"{"n": 2, "edges": [[0,2]]}"#, Format::Json).is_err());
        assert!(parse_graph(r#"{"n": 2, "arcs": [[0,1]]}"#, Format::Json).is_err());
    }

    #[test]
    fn isolated_vertices_survive_edge_list() {
        let g = Graph::new(4, [(1, 2)]).unwrap();
        let text = serialize_graph(&g, Format::EdgeList);
        assert_eq!(parse_graph(&text, Format::EdgeList).unwrap().graph, g);
    }
}
