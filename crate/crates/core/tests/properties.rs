use num_complex::Complex64;
use proptest::prelude::*;
use qwalk::arithmetic::{rational_approx, squarefree_part};
use qwalk::detectors::{detect_pst, verify_transfer, DetectorConfig};
use qwalk::graph::{parse_graph, parse_oriented, serialize_graph, serialize_oriented, Format};
use qwalk::linalg::{frobenius, frobenius_distance, CMatrix, CVector};
use qwalk::state::block_decompose;
use qwalk::{DensityMatrix, Graph, OrientedGraph, SpectralDecomposition};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), m).prop_map(move |bits| {
            let mut g = Graph::empty(n);
            let mut i = 0;
            for v in 1..n {
                for u in 0..v {
                    if bits[i] {
                        g.add_edge(u, v).unwrap();
                    }
                    i += 1;
                }
            }
            g
        })
    })
}

fn oriented_strategy(max_n: usize) -> impl Strategy<Value = OrientedGraph> {
    graph_strategy(max_n).prop_flat_map(|g| {
        let m = g.edge_count();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |flips| {
            let mut it = flips.into_iter();
            OrientedGraph::orient(&g, |_, _| it.next().unwrap())
        })
    })
}

/// A random density matrix: a convex mixture of random pure states.
fn state_for(n: usize, seed: &[f64]) -> DensityMatrix {
    let mut m = CMatrix::zeros(n, n);
    let k = 1 + (seed[0].abs() * 3.0) as usize;
    let mut total = 0.0;
    for j in 0..k {
        let z = CVector::from_fn(n, |i, _| {
            let s = seed[(1 + j * 2 * n + 2 * i) % seed.len()];
            let t = seed[(2 + j * 2 * n + 2 * i) % seed.len()];
            Complex64::new(s, t)
        });
        let norm = z.norm();
        if norm < 1e-6 {
            continue;
        }
        let z = z / Complex64::from(norm);
        let w = 1.0 + j as f64;
        m += &z * z.adjoint() * Complex64::from(w);
        total += w;
    }
    if total == 0.0 {
        return DensityMatrix::maximally_mixed(n);
    }
    DensityMatrix::new(m / Complex64::from(total), 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_formats_round_trip(g in graph_strategy(10)) {
        for f in [Format::EdgeList, Format::Graph6, Format::Json] {
            let text = serialize_graph(&g, f);
            let back = parse_graph(&text, f).unwrap().graph;
            prop_assert_eq!(&back, &g, "format {}", f);
        }
    }

    #[test]
    fn oriented_formats_round_trip(x in oriented_strategy(9)) {
        for f in [Format::EdgeList, Format::Json] {
            let text = serialize_oriented(&x, f).unwrap();
            prop_assert_eq!(&parse_oriented(&text, f).unwrap().graph, &x);
        }
        let s = x.skew_adjacency();
        prop_assert!((&s + s.transpose()).iter().all(|&v| v == 0));
        prop_assert_eq!(s.component_mul(&s), x.underlying().adjacency());
    }

    #[test]
    fn transition_matrix_is_unitary_and_a_group(g in graph_strategy(9), t in 0.0..10.0f64, s in 0.0..10.0f64) {
        let d = SpectralDecomposition::of(&g).unwrap();
        let n = g.order();
        let u = d.transition_matrix(t);
        let tol = n as f64 * 1e-9;
        prop_assert!(frobenius_distance(&(&u * u.adjoint()), &CMatrix::identity(n, n)) <= tol);
        let prod = &u * d.transition_matrix(s);
        prop_assert!(frobenius_distance(&d.transition_matrix(t + s), &prod) <= tol);
    }

    #[test]
    fn oriented_walk_is_real(x in oriented_strategy(8), t in -10.0..10.0f64) {
        let d = SpectralDecomposition::of(&x).unwrap();
        let u = d.transition_matrix(t);
        prop_assert!(u.iter().all(|z| z.im.abs() <= 1e-9));
        let delta = x.stats().max_valency as f64;
        prop_assert!(d.theta().iter().all(|th| th.abs() <= delta + 1e-9));
    }

    #[test]
    fn block_evolution_matches_conjugation(
        g in graph_strategy(7),
        seed in proptest::collection::vec(-1.0..1.0f64, 64),
        t in 0.0..10.0f64,
    ) {
        let n = g.order();
        let d = SpectralDecomposition::of(&g).unwrap();
        let p = state_for(n, &seed);
        let b = block_decompose(&p, &d, None).unwrap();
        let u = d.transition_matrix(t);
        let direct = &u * p.matrix() * u.adjoint();
        let via_blocks = b.evolve_matrix(t);
        prop_assert!(frobenius_distance(&via_blocks, &direct) <= n as f64 * 1e-10);
        prop_assert!((via_blocks.trace() - Complex64::from(1.0)).norm() <= 1e-10);
        prop_assert!(b.support().diagonal_presence_holds());
        prop_assert!(b.product_defect() <= 1e-9);
    }

    #[test]
    fn transfer_residual_is_symmetric_for_real_states(
        g in graph_strategy(7),
        a in 0usize..7,
        b in 0usize..7,
        t in 0.0..10.0f64,
    ) {
        let n = g.order();
        let d = SpectralDecomposition::of(&g).unwrap();
        let p = DensityMatrix::vertex(n, a % n).unwrap();
        let q = DensityMatrix::vertex(n, b % n).unwrap();
        let pq = verify_transfer(p.matrix(), q.matrix(), &d, t).unwrap();
        let qp = verify_transfer(q.matrix(), p.matrix(), &d, t).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-10);
    }

    #[test]
    fn transfer_residual_reverses_time_in_general(
        x in oriented_strategy(6),
        seed in proptest::collection::vec(-1.0..1.0f64, 48),
        t in 0.0..10.0f64,
    ) {
        let n = x.order();
        let d = SpectralDecomposition::of(&x).unwrap();
        let p = state_for(n, &seed);
        let q = DensityMatrix::vertex(n, 0).unwrap();
        let pq = verify_transfer(p.matrix(), q.matrix(), &d, t).unwrap();
        let qp = verify_transfer(q.matrix(), p.matrix(), &d, -t).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-10);
    }

    #[test]
    fn real_return_after_transfer(g in graph_strategy(6), a in 0usize..6) {
        let n = g.order();
        let d = SpectralDecomposition::of(&g).unwrap();
        let p = DensityMatrix::vertex(n, a % n).unwrap();
        let r = detect_pst(&p, &d, &DetectorConfig::default()).unwrap();
        if let Some(tau) = r.witness_time.filter(|_| r.is_yes()) {
            let b = block_decompose(&p, &d, None).unwrap();
            prop_assert!(frobenius_distance(&b.evolve_matrix(2.0 * tau), p.matrix()) <= 1e-8);
            let u2 = d.transition_matrix(2.0 * tau);
            prop_assert!(frobenius(&(&u2 * p.matrix() - p.matrix() * &u2)) <= 1e-8);
        }
    }

    #[test]
    fn rational_approx_recovers_small_fractions(p in -1000i64..1000, q in 1u64..1000) {
        let x = p as f64 / q as f64;
        let r = rational_approx(x, 1_000_000, 1e-9).unwrap();
        let g = num_integer::gcd(p.unsigned_abs(), q).max(1);
        prop_assert_eq!(r.p, p / g as i64);
        prop_assert_eq!(r.q, q / g);
    }

    #[test]
    fn squarefree_part_factors(a in 1u64..2000, b in 1u64..2000) {
        let k = a * a * b;
        let (root, free) = squarefree_part(k);
        prop_assert_eq!(root * root * free, k);
        for p in 2..=free.min(2000) {
            prop_assert!(free % (p * p) != 0);
        }
    }
}
