//! Test corpora: named small graphs, every graph up to isomorphism on a few
//! vertices, and seeded random graphs and orientations.

use std::collections::HashSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::graph::{bipartition, natural_orientation, Graph, OrientedGraph};

/// Largest order accepted by [`all_graphs`].
pub const MAX_EXHAUSTIVE_ORDER: usize = 7;

pub fn named_graphs() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("K2".to_string(), Graph::complete(2)),
        ("P3".into(), Graph::path(3)),
        ("P4".into(), Graph::path(4)),
        ("P5".into(), Graph::path(5)),
        ("C4".into(), Graph::cycle(4)),
        ("C5".into(), Graph::cycle(5)),
        ("C6".into(), Graph::cycle(6)),
        ("K4".into(), Graph::complete(4)),
        ("K2,3".into(), Graph::complete_bipartite(2, 3)),
        ("K3,3".into(), Graph::complete_bipartite(3, 3)),
        (
            "K2+P3".into(),
            Graph::complete(2).disjoint_union(&Graph::path(3)),
        ),
    ];
    for k in 2..=6 {
        out.push((format!("K1,{k}"), Graph::star(k)));
    }
    out
}

/// Oriented C3 plus the natural orientation of every bipartite named graph.
pub fn named_oriented() -> Vec<(String, OrientedGraph)> {
    let mut out = vec![
        ("C3->".to_string(), OrientedGraph::cyclic(3)),
        ("C4->".into(), OrientedGraph::cyclic(4)),
        ("C5->".into(), OrientedGraph::cyclic(5)),
    ];
    for (name, g) in named_graphs() {
        if let Some(parts) = bipartition(&g) {
            let x = natural_orientation(&g, &parts).expect("proper bipartition");
            out.push((format!("nat({name})"), x));
        }
    }
    out
}

fn edge_index(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(n * (n - 1) / 2);
    for v in 1..n {
        for u in 0..v {
            e.push((u, v));
        }
    }
    e
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative of every isomorphism class of graphs on `n` vertices,
/// ordered by edge count and then by edge bitmask.
///
/// # Panics
/// If `n` exceeds [`MAX_EXHAUSTIVE_ORDER`].
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!(
        n <= MAX_EXHAUSTIVE_ORDER,
        "exhaustive enumeration is capped at {MAX_EXHAUSTIVE_ORDER} vertices"
    );
    if n < 2 {
        return vec![Graph::empty(n)];
    }
    let edges = edge_index(n);
    let mut slot = vec![vec![0usize; n]; n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        slot[u][v] = i;
        slot[v][u] = i;
    }
    // Bit i of an edge mask moves to bit maps[p][i] under permutation p.
    let maps: Vec<Vec<usize>> = permutations(n)
        .iter()
        .map(|p| edges.iter().map(|&(u, v)| slot[p[u]][p[v]]).collect())
        .collect();
    let apply = |mask: u32, map: &[usize]| {
        let mut out = 0u32;
        for (i, &j) in map.iter().enumerate() {
            if mask >> i & 1 == 1 {
                out |= 1 << j;
            }
        }
        out
    };

    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for mask in 0u32..(1u32 << edges.len()) {
        if seen.contains(&mask) {
            continue;
        }
        let mut canon = mask;
        for map in &maps {
            let image = apply(mask, map);
            canon = canon.min(image);
            seen.insert(image);
        }
        reps.push(canon);
    }
    reps.sort_by_key(|&m| (m.count_ones(), m));
    reps.into_iter()
        .map(|m| {
            let e = edges
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, &e)| e);
            Graph::new(n, e).expect("valid edge set")
        })
        .collect()
}

/// Every graph on at most `max_n` vertices, up to isomorphism.
pub fn all_graphs_up_to(max_n: usize) -> Vec<Graph> {
    (1..=max_n).flat_map(all_graphs).collect()
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut StdRng) -> Graph {
    let mut g = Graph::empty(n);
    for v in 1..n {
        for u in 0..v {
            if rng.random_bool(p) {
                g.add_edge(u, v).expect("fresh edge");
            }
        }
    }
    g
}

/// Orients every edge of `g` by a fair coin.
pub fn random_orientation(g: &Graph, rng: &mut StdRng) -> OrientedGraph {
    OrientedGraph::orient(g, |_, _| rng.random_bool(0.5))
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
