//! Invariant suite run against a single graph and optional supplied state.
//! Each check reports a residual and the tolerance it was held to.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::arithmetic::{minimum_period, ratio_condition, RatioOutcome};
use crate::detectors::{
    block_signs, detect_periodicity, detect_pst, verify_transfer, DetectorConfig, Verdict,
};
use crate::error::Result;
use crate::graph::{
    bipartition, natural_orientation, parse_graph, parse_oriented, serialize_graph,
    serialize_oriented, Format, Graph, OrientedGraph, WalkGraph,
};
use crate::linalg::{
    frobenius, frobenius_distance, from_integer, hermitian_defect, imag_norm, min_eigenvalue,
    CMatrix,
};
use crate::oracle::{evolve_dense, walk_unitary};
use crate::spectral::SpectralDecomposition;
use crate::state::{block_decompose, DensityMatrix, StateDefects};

/// Vertex states beyond this many vertices are sampled, not exhausted.
const MAX_VERTEX_STATES: usize = 16;
const RANDOM_TIMES: usize = 100;

#[derive(Clone, Copy, Debug)]
pub enum Subject<'a> {
    Graph(&'a Graph),
    Oriented(&'a OrientedGraph),
}

impl Subject<'_> {
    fn walk(&self) -> &dyn WalkGraph {
        match self {
            Subject::Graph(g) => *g,
            Subject::Oriented(x) => *x,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantResult {
    pub name: String,
    /// What the check ran on, e.g. `graph` or `vertex:3`.
    pub subject: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub results: Vec<InvariantResult>,
}

struct Suite {
    results: Vec<InvariantResult>,
}

impl Suite {
    fn check(&mut self, name: &str, subject: &str, residual: f64, tolerance: f64) {
        self.results.push(InvariantResult {
            name: name.to_string(),
            subject: subject.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
        });
    }

    fn flag(&mut self, name: &str, subject: &str, ok: bool) {
        self.check(name, subject, if ok { 0.0 } else { 1.0 }, 0.0);
    }
}

/// Runs every invariant that applies to `subject`, plus the state invariants
/// on its vertex states and on `state` when one is supplied. `seed` drives
/// the random sample times.
pub fn run_suite(
    subject: Subject<'_>,
    state: Option<&CMatrix>,
    cfg: &DetectorConfig,
    seed: u64,
) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut suite = Suite {
        results: Vec::new(),
    };
    let g = subject.walk();
    let n = g.order();
    let nf = n as f64;
    let h = g.hamiltonian();
    let d = SpectralDecomposition::new(&h, cfg.tol)?;

    graph_checks(&mut suite, subject);

    let res = d.residuals();
    let spectral_tol = 1e-8 * d.scale().max(1.0) * nf.max(1.0);
    suite.check(
        "spectral.completeness",
        "graph",
        res.completeness,
        spectral_tol,
    );
    suite.check(
        "spectral.orthogonality",
        "graph",
        res.orthogonality,
        spectral_tol,
    );
    suite.check(
        "spectral.reconstruction",
        "graph",
        res.reconstruction,
        spectral_tol,
    );

    let times: Vec<f64> = (0..RANDOM_TIMES)
        .map(|_| rng.random_range(0.0..10.0))
        .collect();
    let id = CMatrix::identity(n, n);
    let mut unitarity = 0.0f64;
    let mut group = 0.0f64;
    let mut oracle = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let u = d.transition_matrix(t);
        unitarity = unitarity.max(frobenius_distance(&(&u * u.adjoint()), &id));
        let s = times[(k + 1) % times.len()];
        let us = d.transition_matrix(s);
        group = group.max(frobenius_distance(&d.transition_matrix(t + s), &(&u * us)));
        if k < 20 {
            oracle = oracle.max(frobenius_distance(&walk_unitary(&h, t)?, &u));
        }
    }
    suite.check("spectral.unitarity", "graph", unitarity, nf * cfg.tol);
    suite.check("spectral.group_law", "graph", group, nf * cfg.tol);
    suite.check("oracle.path_independence", "graph", oracle, 1e-8);

    if let Subject::Oriented(x) = subject {
        let delta = x.stats().max_valency as f64;
        let excess = d
            .theta()
            .iter()
            .map(|t| t.abs() - delta)
            .fold(0.0, f64::max);
        suite.check("oriented.eigenvalue_bound", "graph", excess, cfg.tol);
        let mut pairing = 0.0f64;
        for r in 0..d.len() {
            match d.negated_index(r) {
                Some(s) => {
                    let conj = d.idempotent(r).map(|z| z.conj());
                    pairing = pairing.max(frobenius_distance(d.idempotent(s), &conj));
                }
                None => pairing = f64::INFINITY,
            }
        }
        suite.check("oriented.conjugate_pairing", "graph", pairing, nf * cfg.tol);
    }
    if let Subject::Graph(y) = subject {
        if let Some(parts) = bipartition(y) {
            let x = natural_orientation(y, &parts)?;
            let s = from_integer(&x.skew_adjacency());
            let a = from_integer(&y.adjacency());
            let mut worst = 0.0f64;
            for &t in times.iter().take(20) {
                let es = crate::oracle::dense_expm(&(&s * Complex64::from(t)))?;
                let ua = walk_unitary(&a, t)?;
                for (p, q) in es.iter().zip(ua.iter()) {
                    worst = worst.max((p.norm() - q.norm()).abs());
                }
            }
            suite.check("bipartite.modulus_equivalence", "graph", worst, 1e-9);
        }
    }

    let mut states: Vec<(String, DensityMatrix)> = Vec::new();
    for a in sample_vertices(n, &mut rng) {
        states.push((format!("vertex:{a}"), DensityMatrix::vertex(n, a)?));
    }
    if let Some(m) = state {
        let subject_name = "state";
        if m.nrows() != n || m.ncols() != n {
            suite.flag("state.dimension", subject_name, false);
        } else {
            let defects = StateDefects::of(m);
            suite.check("state.hermitian", subject_name, defects.hermitian, cfg.tol);
            suite.check("state.trace", subject_name, defects.trace, cfg.tol);
            suite.check(
                "state.psd",
                subject_name,
                (-defects.min_eigenvalue).max(0.0),
                cfg.tol,
            );
            if defects.violations(cfg.tol).is_empty() {
                states.push((subject_name.into(), DensityMatrix::new(m.clone(), cfg.tol)?));
            }
        }
    }
    for (name, p) in &states {
        state_checks(&mut suite, name, p, &d, &h, &times, cfg)?;
    }

    let passed = suite.results.iter().all(|r| r.passed);
    Ok(SuiteReport {
        passed,
        results: suite.results,
    })
}

fn sample_vertices(n: usize, rng: &mut StdRng) -> Vec<usize> {
    if n <= MAX_VERTEX_STATES {
        return (0..n).collect();
    }
    let mut v: Vec<usize> = (0..MAX_VERTEX_STATES)
        .map(|_| rng.random_range(0..n))
        .collect();
    v.sort();
    v.dedup();
    v
}

fn graph_checks(suite: &mut Suite, subject: Subject<'_>) {
    match subject {
        Subject::Graph(g) => {
            for f in [Format::EdgeList, Format::Graph6, Format::Json] {
                if f == Format::Graph6 && g.order() > 62 {
                    continue;
                }
                let text = serialize_graph(g, f);
                let ok = parse_graph(&text, f)
                    .map(|p| &p.graph == g)
                    .unwrap_or(false);
                suite.flag(&format!("graph.round_trip.{f}"), "graph", ok);
            }
            if let Some(parts) = bipartition(g) {
                let ok = natural_orientation(g, &parts)
                    .map(|x| {
                        let s = x.skew_adjacency();
                        s.component_mul(&s) == g.adjacency()
                    })
                    .unwrap_or(false);
                suite.flag("graph.underlying_identity", "graph", ok);
            }
        }
        Subject::Oriented(x) => {
            for f in [Format::EdgeList, Format::Json] {
                let ok = serialize_oriented(x, f)
                    .and_then(|t| parse_oriented(&t, f))
                    .map(|p| &p.graph == x)
                    .unwrap_or(false);
                suite.flag(&format!("graph.round_trip.{f}"), "graph", ok);
            }
            let s = x.skew_adjacency();
            suite.flag(
                "graph.skew_symmetry",
                "graph",
                (&s + s.transpose()).iter().all(|&v| v == 0),
            );
            let ok = s.component_mul(&s) == x.underlying().adjacency();
            suite.flag("graph.underlying_identity", "graph", ok);
        }
    }
}

fn state_checks(
    suite: &mut Suite,
    name: &str,
    p: &DensityMatrix,
    d: &SpectralDecomposition,
    h: &CMatrix,
    times: &[f64],
    cfg: &DetectorConfig,
) -> Result<()> {
    let n = d.order();
    let nf = n as f64;
    let b = block_decompose(p, d, None)?;

    let (mut trace, mut herm, mut psd, mut path) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in times.iter().take(20) {
        let m = b.evolve_matrix(t);
        trace = trace.max((m.trace() - Complex64::from(1.0)).norm());
        herm = herm.max(hermitian_defect(&m));
        psd = psd.max(-min_eigenvalue(&m));
        let u = d.transition_matrix(t);
        path = path.max(frobenius_distance(&m, &(&u * p.matrix() * u.adjoint())));
    }
    suite.check("state.evolve_trace", name, trace, 1e-10);
    suite.check("state.evolve_hermitian", name, herm, nf * cfg.tol);
    suite.check("state.evolve_psd", name, psd.max(0.0), 1e-9);
    suite.check("state.block_vs_direct", name, path, nf * 1e-10);
    suite.flag(
        "state.support_diagonal",
        name,
        b.support().diagonal_presence_holds(),
    );
    suite.check("state.block_products", name, b.product_defect(), cfg.tol);
    if b.support().is_stationary() {
        let worst = times
            .iter()
            .take(20)
            .map(|&t| frobenius_distance(&b.evolve_matrix(t), p.matrix()))
            .fold(0.0, f64::max);
        suite.check("state.stationarity", name, worst, nf * cfg.tol);
    }

    if let RatioOutcome::Certified { certificate } =
        ratio_condition(b.support(), b.theta(), &cfg.ratio_params())
    {
        suite.check(
            "arithmetic.certificate_soundness",
            name,
            certificate.check(d.theta()),
            cfg.cert_tol,
        );
        if p.is_rational() && p.is_real() {
            let sigma = minimum_period(&certificate)?;
            suite.check(
                "arithmetic.rational_period_bound",
                name,
                (sigma - TAU).max(0.0),
                1e-9,
            );
        }
    }

    // Swapping P and Q reverses time; with a real H and real states the
    // reversal is a conjugation and drops out.
    let q = DensityMatrix::vertex(n, (n - 1) / 2)?;
    let time_even = !d.is_skew_source() && d.source().iter().all(|z| z.im == 0.0) && p.is_real();
    let mut sym = 0.0f64;
    for &t in times.iter().take(10) {
        let pq = verify_transfer(p.matrix(), q.matrix(), d, t)?;
        let back = if time_even { t } else { -t };
        let qp = verify_transfer(q.matrix(), p.matrix(), d, back)?;
        sym = sym.max((pq - qp).abs());
    }
    suite.check("detectors.transfer_symmetry", name, sym, 1e-10);

    let periodic = detect_periodicity(p, d, cfg)?;
    if periodic.verdict == Verdict::Yes {
        if let Some(sigma) = periodic.witness_time.filter(|&s| s > 0.0) {
            let back = frobenius_distance(&evolve_dense(p.matrix(), h, sigma)?, p.matrix());
            suite.check(
                "oracle.period_reproduction",
                name,
                back,
                10.0 * cfg.accept_tol,
            );
        }
    }
    if !p.is_real() {
        return Ok(());
    }
    let pst = detect_pst(p, d, cfg)?;
    if pst.verdict != Verdict::Yes {
        return Ok(());
    }
    let (tau, target) = match (pst.witness_time, pst.target.as_ref()) {
        (Some(t), Some(q)) => (t, q),
        _ => {
            suite.flag("detectors.pst_report_complete", name, false);
            return Ok(());
        }
    };
    let u2 = d.transition_matrix(2.0 * tau);
    let mut real_return = frobenius_distance(&b.evolve_matrix(2.0 * tau), p.matrix());
    real_return = real_return.max(frobenius(&(&u2 * p.matrix() - p.matrix() * &u2)));
    suite.check("detectors.real_return", name, real_return, 1e-8);
    suite.flag(
        "detectors.pst_block_signs",
        name,
        block_signs(&b, target.matrix(), d, 1e-8).is_some(),
    );
    let overlap = crate::linalg::trace_inner(p.matrix(), target.matrix()).norm();
    if overlap <= 1e-9 {
        let theta = d.theta();
        let bound = PI / (theta[0] - theta[theta.len() - 1]);
        suite.check("detectors.trace_gap", name, (bound - tau).max(0.0), 1e-9);
    }
    let transfer = frobenius_distance(&evolve_dense(p.matrix(), h, tau)?, target.matrix());
    suite.check(
        "oracle.transfer_reproduction",
        name,
        transfer,
        10.0 * cfg.accept_tol,
    );
    let imag = imag_norm(&b.evolve_matrix(tau));
    suite.check("detectors.target_real", name, imag, cfg.accept_tol);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_graph, seeded};

    #[test]
    fn k2_passes_everything() {
        let g = Graph::complete(2);
        let r = run_suite(Subject::Graph(&g), None, &DetectorConfig::default(), 0).unwrap();
        let failed: Vec<_> = r.results.iter().filter(|x| !x.passed).collect();
        assert!(r.passed, "{failed:?}");
        assert!(r.results.iter().any(|x| x.name == "detectors.trace_gap"));
    }

    #[test]
    fn random_graph_passes() {
        let g = random_graph(8, 0.4, &mut seeded(3));
        let r = run_suite(Subject::Graph(&g), None, &DetectorConfig::default(), 3).unwrap();
        let failed: Vec<_> = r.results.iter().filter(|x| !x.passed).collect();
        assert!(r.passed, "{failed:?}");
    }

    #[test]
    fn oriented_triangle_passes() {
        let x = OrientedGraph::cyclic(3);
        let r = run_suite(Subject::Oriented(&x), None, &DetectorConfig::default(), 1).unwrap();
        let failed: Vec<_> = r.results.iter().filter(|x| !x.passed).collect();
        assert!(r.passed, "{failed:?}");
    }

    #[test]
    fn short_trace_state_fails_by_name() {
        let g = Graph::complete(2);
        let m = CMatrix::identity(2, 2) * Complex64::from(0.45);
        let r = run_suite(Subject::Graph(&g), Some(&m), &DetectorConfig::default(), 0).unwrap();
        assert!(!r.passed);
        let failed: Vec<&str> = r
            .results
            .iter()
            .filter(|x| !x.passed)
            .map(|x| x.name.as_str())
            .collect();
        assert_eq!(failed, vec!["state.trace"]);
    }
}
