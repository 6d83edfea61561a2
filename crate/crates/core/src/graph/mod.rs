//! Graphs, oriented graphs and their (skew-)adjacency matrices.

mod format;

pub use format::{
    parse_graph, parse_oriented, serialize_graph, serialize_oriented, Format, Parsed,
};

use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{from_integer, CMatrix, IMatrix};

/// Simple undirected graph on vertices `0..n`. Edges are stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        check_pair(self.n, u, v)?;
        if !self.edges.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// 0/1 adjacency matrix.
    pub fn adjacency(&self) -> IMatrix {
        let mut a = IMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1;
            a[(v, u)] = 1;
        }
        a
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|v| (v - 1, v))).expect("path graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least three vertices");
        Graph::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle graph")
    }

    /// The star `K_{1,k}` with centre 0.
    pub fn star(k: usize) -> Self {
        Graph::new(k + 1, (1..=k).map(|v| (0, v))).expect("star graph")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Graph::new(a + b, edges).expect("complete bipartite graph")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.order()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let edges = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + shift, v + shift)));
        Graph::new(self.n + other.n, edges).expect("disjoint union")
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats::from_neighbors(&self.neighbors())
    }
}

/// Oriented graph: at most one arc between any two vertices, no loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrientedGraph {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl OrientedGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = OrientedGraph::empty(n);
        for (u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        OrientedGraph {
            n,
            arcs: BTreeSet::new(),
        }
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        check_pair(self.n, u, v)?;
        if self.arcs.contains(&(u, v)) || self.arcs.contains(&(v, u)) {
            return Err(Error::InvalidGraph(format!(
                "vertices {u} and {v} already share an arc"
            )));
        }
        self.arcs.insert((u, v));
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// `S[u][v] = 1` for an arc `u -> v`, `-1` for `v -> u`, else 0.
    pub fn skew_adjacency(&self) -> IMatrix {
        let mut s = IMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.arcs {
            s[(u, v)] = 1;
            s[(v, u)] = -1;
        }
        s
    }

    pub fn underlying(&self) -> Graph {
        Graph::new(self.n, self.arcs()).expect("arcs form a simple graph")
    }

    /// Orientation of the `n`-cycle with arcs `i -> i+1 (mod n)`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least three vertices");
        OrientedGraph::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("oriented cycle")
    }

    /// Orients each edge `(u, v)`, `u < v`, of `g` as `u -> v` unless
    /// `flips(u, v)` returns true.
    pub fn orient(g: &Graph, mut flips: impl FnMut(usize, usize) -> bool) -> Self {
        let arcs: Vec<_> = g
            .edges()
            .map(|(u, v)| if flips(u, v) { (v, u) } else { (u, v) })
            .collect();
        OrientedGraph::new(g.order(), arcs).expect("orientation of a simple graph")
    }

    pub fn stats(&self) -> GraphStats {
        self.underlying().stats()
    }
}

fn check_pair(n: usize, u: usize, v: usize) -> Result<()> {
    if u >= n || v >= n {
        return Err(Error::VertexOutOfRange {
            vertex: u.max(v),
            n,
        });
    }
    if u == v {
        return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
    }
    Ok(())
}

/// Proper 2-colouring; `color[v]` is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    color: Vec<u8>,
}

impl Bipartition {
    pub fn from_parts(n: usize, first: &[usize]) -> Result<Self> {
        let mut color = vec![1u8; n];
        for &v in first {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            color[v] = 0;
        }
        Ok(Bipartition { color })
    }

    pub fn color(&self, v: usize) -> u8 {
        self.color[v]
    }

    pub fn first(&self) -> Vec<usize> {
        self.part(0)
    }

    pub fn second(&self) -> Vec<usize> {
        self.part(1)
    }

    fn part(&self, c: u8) -> Vec<usize> {
        (0..self.color.len())
            .filter(|&v| self.color[v] == c)
            .collect()
    }

    pub fn is_proper_for(&self, g: &Graph) -> bool {
        self.color.len() == g.order() && g.edges().all(|(u, v)| self.color[u] != self.color[v])
    }
}

/// Breadth-first 2-colouring. In every component the lowest-index vertex gets colour 0.
pub fn bipartition(g: &Graph) -> Option<Bipartition> {
    let adj = g.neighbors();
    let mut color: Vec<Option<u8>> = vec![None; g.order()];
    for root in 0..g.order() {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &w in &adj[u] {
                match color[w] {
                    None => {
                        color[w] = Some(1 - cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(Bipartition {
        color: color.into_iter().map(Option::unwrap).collect(),
    })
}

/// Directs every edge from the second part to the first, giving
/// `S = [[0, -B], [B^T, 0]]` under the part ordering.
pub fn natural_orientation(g: &Graph, parts: &Bipartition) -> Result<OrientedGraph> {
    if !parts.is_proper_for(g) {
        return Err(Error::InvalidArgument(
            "parts do not form a proper bipartition of the graph".into(),
        ));
    }
    let arcs: Vec<_> = g
        .edges()
        .map(|(u, v)| if parts.color(u) == 1 { (u, v) } else { (v, u) })
        .collect();
    OrientedGraph::new(g.order(), arcs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    /// Maximum number of edges (arcs) at a vertex.
    pub max_valency: usize,
    pub connected: bool,
    /// Eccentricities on the underlying graph; `None` when disconnected.
    pub eccentricity: Option<Vec<usize>>,
}

impl GraphStats {
    fn from_neighbors(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let max_valency = adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut ecc = Vec::with_capacity(n);
        let mut connected = true;
        for s in 0..n {
            let dist = bfs(adj, s);
            if dist.iter().any(Option::is_none) {
                connected = false;
                break;
            }
            ecc.push(dist.into_iter().flatten().max().unwrap_or(0));
        }
        GraphStats {
            max_valency,
            connected,
            eccentricity: connected.then_some(ecc),
        }
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Anything a continuous walk can run on: a graph (`H = A`) or an oriented
/// graph (`H = -iS`, so that `exp(itH) = exp(tS)`).
pub trait WalkGraph {
    fn order(&self) -> usize;
    fn hamiltonian(&self) -> CMatrix;
    fn stats(&self) -> GraphStats;
    fn is_oriented(&self) -> bool;
}

impl WalkGraph for Graph {
    fn order(&self) -> usize {
        self.n
    }

    fn hamiltonian(&self) -> CMatrix {
        from_integer(&self.adjacency())
    }

    fn stats(&self) -> GraphStats {
        Graph::stats(self)
    }

    fn is_oriented(&self) -> bool {
        false
    }
}

impl WalkGraph for OrientedGraph {
    fn order(&self) -> usize {
        self.n
    }

    fn hamiltonian(&self) -> CMatrix {
        self.skew_adjacency()
            .map(|x| Complex64::new(0.0, -(x as f64)))
    }

    fn stats(&self) -> GraphStats {
        OrientedGraph::stats(self)
    }

    fn is_oriented(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_adjacency_single_arc() {
        let g = OrientedGraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(
            g.skew_adjacency(),
            IMatrix::from_row_slice(2, 2, &[0, 1, -1, 0])
        );
    }

    #[test]
    fn skew_adjacency_cyclic_triangle_is_circulant() {
        let s = OrientedGraph::cyclic(3).skew_adjacency();
        let expected = IMatrix::from_row_slice(3, 3, &[0, 1, -1, -1, 0, 1, 1, -1, 0]);
        assert_eq!(s, expected);
    }

    #[test]
    fn skew_adjacency_empty() {
        assert_eq!(
            OrientedGraph::empty(4).skew_adjacency(),
            IMatrix::zeros(4, 4)
        );
    }

    #[test]
    fn rejects_loops_duplicates_and_antiparallel_arcs() {
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
        assert!(OrientedGraph::new(2, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn bipartitions() {
        let c4 = bipartition(&Graph::cycle(4)).unwrap();
        assert_eq!(c4.first(), vec![0, 2]);
        assert_eq!(c4.second(), vec![1, 3]);
        assert!(bipartition(&Graph::cycle(3)).is_none());
        let p3 = bipartition(&Graph::path(3)).unwrap();
        assert_eq!(p3.first(), vec![0, 2]);
        assert_eq!(p3.second(), vec![1]);
    }

    #[test]
    fn natural_orientation_of_k2() {
        let parts = Bipartition::from_parts(2, &[0]).unwrap();
        let o = natural_orientation(&Graph::complete(2), &parts).unwrap();
        assert_eq!(
            o.skew_adjacency(),
            IMatrix::from_row_slice(2, 2, &[0, -1, 1, 0])
        );
    }

    #[test]
    fn natural_orientation_rejects_improper_parts() {
        let parts = Bipartition::from_parts(3, &[0, 1]).unwrap();
        assert!(natural_orientation(&Graph::path(3), &parts).is_err());
    }

    #[test]
    fn natural_orientation_squares_to_adjacency() {
        for g in [
            Graph::path(4),
            Graph::cycle(6),
            Graph::complete_bipartite(2, 3),
        ] {
            let parts = bipartition(&g).unwrap();
            let s = natural_orientation(&g, &parts).unwrap().skew_adjacency();
            assert_eq!(s.component_mul(&s), g.adjacency());
            assert_eq!(&s + s.transpose(), IMatrix::zeros(g.order(), g.order()));
        }
    }

    #[test]
    fn stats_of_small_graphs() {
        let star = Graph::star(3).stats();
        assert_eq!(star.max_valency, 3);
        assert_eq!(star.eccentricity, Some(vec![1, 2, 2, 2]));
        let p3 = Graph::path(3).stats();
        assert_eq!(p3.max_valency, 2);
        assert_eq!(p3.eccentricity.unwrap()[0], 2);
        let c3 = OrientedGraph::cyclic(3).stats();
        assert_eq!(c3.max_valency, 2);
        assert!(c3.connected);
        let split = Graph::complete(2)
            .disjoint_union(&Graph::complete(2))
            .stats();
        assert!(!split.connected);
        assert_eq!(split.eccentricity, None);
    }
}
