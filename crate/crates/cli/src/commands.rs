use anyhow::Result;
use qwalk::arithmetic::ratio_condition;
use qwalk::detectors::{
    detect_local_uniform_mixing, detect_periodicity, detect_pst, detect_uniform_mixing,
    periodic_vertex_bounds, pgst_candidates, DetectionReport, Verdict,
};
use qwalk::graph::{bipartition, natural_orientation, serialize_oriented};
use qwalk::invariants::{run_suite, Subject};
use qwalk::linalg::{frobenius, CMatrix};
use qwalk::oracle::{self, ScanSpec, DEFAULT_STEP};
use qwalk::state::{block_decompose, DensityJson};
use qwalk::{DensityMatrix, SpectralDecomposition};
use serde_json::{json, Value};

use crate::input::{
    emit, input_error, lib, load_graph, load_state, load_state_matrix, write_stdout, Input, Loaded,
};
use crate::{Emit, Run, ScanKind};

/// Snaps values within a few ulps of an integer, so exact spectra print exactly.
fn clean(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 64.0 * f64::EPSILON * x.abs().max(1.0) {
        r + 0.0
    } else {
        x
    }
}

fn decompose(input: &Input, cfg: &Run) -> Result<SpectralDecomposition> {
    let h = input.graph.walk().hamiltonian();
    lib(SpectralDecomposition::with_cap(
        &h,
        cfg.detector.tol,
        cfg.max_n,
    ))
}

fn graph_summary(input: &Input) -> Value {
    let g = input.graph.walk();
    json!({
        "n": g.order(),
        "oriented": g.is_oriented(),
        "labels": input.labels,
    })
}

pub fn spectra(path: &str, cfg: &Run) -> Result<bool> {
    let input = load_graph(path, cfg.format, cfg.oriented)?;
    let d = decompose(&input, cfg)?;
    let checksums: Vec<Value> = d
        .idempotents()
        .iter()
        .map(|e| {
            let sum = e.iter().fold(qwalk::linalg::ZERO, |a, z| a + z);
            json!({
                "trace": clean(e.trace().re),
                "frobenius_sq": clean(frobenius(e).powi(2)),
                "entry_sum": [clean(sum.re), clean(sum.im)],
            })
        })
        .collect();
    emit(&json!({
        "graph": graph_summary(&input),
        "theta": d.theta().iter().map(|&t| clean(t)).collect::<Vec<_>>(),
        "mult": d.multiplicities(),
        "idempotents": checksums,
        "residuals": d.residuals(),
        "warnings": d.warnings(),
    }))?;
    Ok(true)
}

fn scan_spec(cfg: &Run) -> ScanSpec {
    ScanSpec {
        window: (0.0, cfg.detector.t_max),
        step: cfg.detector.grid_step.unwrap_or(DEFAULT_STEP),
        ..ScanSpec::default()
    }
}

fn vertex_pst(pst: &DetectionReport, input: &Input) -> Value {
    match (pst.verdict, pst.target_vertex) {
        (Verdict::Yes, Some(b)) => json!({
            "verdict": "yes",
            "target_vertex": input.labels[b],
            "time": pst.witness_time,
        }),
        (Verdict::Yes, None) => json!({
            "verdict": "no",
            "reason": "the transfer target is not a vertex state",
        }),
        (Verdict::No, _) => json!({ "verdict": "no", "reason": pst.reason }),
        (Verdict::Inconclusive, _) => json!({ "verdict": "inconclusive", "reason": pst.reason }),
    }
}

fn blocks_value(p: &DensityMatrix, d: &SpectralDecomposition) -> Result<Value> {
    let b = lib(block_decompose(p, d, None))?;
    let blocks: Vec<Value> = b
        .blocks()
        .map(|((r, s), m)| {
            json!({ "r": r, "s": s, "norm": frobenius(m), "block": DensityJson::from_matrix(m) })
        })
        .collect();
    Ok(json!({
        "theta": d.theta(),
        "support": b.support().pairs().map(|(r, s)| [r, s]).collect::<Vec<_>>(),
        "blocks": blocks,
        "block_tol": b.block_tol(),
        "dropped_norm": b.dropped_norm(),
        "warnings": b.warnings(),
    }))
}

pub fn analyze(path: &str, spec: &str, cfg: &Run) -> Result<bool> {
    let input = load_graph(path, cfg.format, cfg.oriented)?;
    let d = decompose(&input, cfg)?;
    let (p, vertex) = load_state(spec, &input, cfg.detector.tol)?;
    let h = input.graph.walk().hamiltonian();

    match cfg.emit {
        Emit::Blocks => {
            emit(&blocks_value(&p, &d)?)?;
            return Ok(true);
        }
        Emit::Scan => {
            let sp = scan_spec(cfg);
            let mut out = json!({
                "return": lib(oracle::scan_return(p.matrix(), &h, &sp))?,
                "realness": lib(oracle::scan_realness(p.matrix(), &h, &sp))?,
            });
            if let Some(a) = vertex {
                out["flatness"] = serde_json::to_value(lib(oracle::scan_flatness(&h, a, &sp))?)?;
            }
            emit(&out)?;
            return Ok(true);
        }
        Emit::Report => {}
    }

    let det = &cfg.detector;
    let b = lib(block_decompose(&p, &d, None))?;
    let periodicity = lib(detect_periodicity(&p, &d, det))?;
    let mut out = json!({
        "graph": graph_summary(&input),
        "state": {
            "spec": spec,
            "real": p.is_real(),
            "pure": p.is_pure(),
            "rational": p.is_rational(),
            "vertex": vertex.map(|a| input.labels[a].clone()),
        },
        "spectrum": {
            "theta": d.theta().iter().map(|&t| clean(t)).collect::<Vec<_>>(),
            "mult": d.multiplicities(),
        },
        "support": b.support().pairs().map(|(r, s)| [r, s]).collect::<Vec<_>>(),
        "ratio_condition": ratio_condition(b.support(), b.theta(), &det.ratio_params()),
        "periodicity": periodicity,
        "uniform_mixing": lib(detect_uniform_mixing(&d, det))?,
        "warnings": d.warnings(),
        "config": det,
    });

    if p.is_real() {
        let pst = lib(detect_pst(&p, &d, det))?;
        if vertex.is_some() {
            out["vertex_pst"] = vertex_pst(&pst, &input);
        }
        out["pst"] = serde_json::to_value(&pst)?;
        out["pgst_candidates"] = match pgst_candidates(&p, &b, det) {
            Ok(c) => json!({
                "count": c.len(),
                "candidates": c.iter().map(|x| json!({
                    "signs": x.signs,
                    "state": x.state,
                    "vertex": x.state.as_vertex(det.accept_tol).map(|v| input.labels[v].clone()),
                })).collect::<Vec<_>>(),
            }),
            Err(e) => json!({ "verdict": "inconclusive", "reason": e.to_string() }),
        };
    } else {
        let skipped = json!({ "verdict": "inconclusive", "reason": "state is not real" });
        out["pst"] = skipped.clone();
        out["pgst_candidates"] = skipped;
    }

    if let Some(a) = vertex {
        out["local_mixing"] = serde_json::to_value(lib(detect_local_uniform_mixing(&d, a, det))?)?;
        out["bounds"] = if input.graph.walk().stats().connected {
            serde_json::to_value(lib(periodic_vertex_bounds(input.graph.walk(), &d, a, det))?)?
        } else {
            Value::Null
        };
    }
    emit(&out)?;
    Ok(true)
}

pub fn verify(path: &str, state: Option<&str>, cfg: &Run) -> Result<bool> {
    let input = load_graph(path, cfg.format, cfg.oriented)?;
    let n = input.graph.walk().order();
    if n > cfg.max_n {
        return Err(input_error(format!(
            "matrix order {n} exceeds the configured cap {}",
            cfg.max_n
        )));
    }
    let m: Option<CMatrix> = state.map(load_state_matrix).transpose()?;
    let subject = match &input.graph {
        Loaded::Graph(g) => Subject::Graph(g),
        Loaded::Oriented(x) => Subject::Oriented(x),
    };
    let report = lib(run_suite(subject, m.as_ref(), &cfg.detector, cfg.seed))?;
    emit(&report)?;
    Ok(report.passed)
}

pub fn evolve(path: &str, spec: &str, t: f64, cfg: &Run) -> Result<bool> {
    if !t.is_finite() {
        return Err(input_error("time must be finite"));
    }
    let input = load_graph(path, cfg.format, cfg.oriented)?;
    let d = decompose(&input, cfg)?;
    let (p, _) = load_state(spec, &input, cfg.detector.tol)?;
    if cfg.emit == Emit::Blocks {
        emit(&blocks_value(&p, &d)?)?;
        return Ok(true);
    }
    let b = lib(block_decompose(&p, &d, None))?;
    let pt = b.evolve(t);
    let dense = lib(oracle::evolve_dense(
        p.matrix(),
        &input.graph.walk().hamiltonian(),
        t,
    ))?;
    emit(&json!({
        "time": t,
        "state": pt,
        "real": pt.is_real(),
        "pure": pt.is_pure(),
        "vertex": pt.as_vertex(cfg.detector.accept_tol).map(|v| input.labels[v].clone()),
        "oracle_residual": qwalk::linalg::frobenius_distance(pt.matrix(), &dense),
    }))?;
    Ok(true)
}

pub fn scan(
    path: &str,
    kind: ScanKind,
    state: Option<&str>,
    target: Option<&str>,
    cfg: &Run,
) -> Result<bool> {
    let input = load_graph(path, cfg.format, cfg.oriented)?;
    let n = input.graph.walk().order();
    if n > cfg.max_n {
        return Err(input_error(format!(
            "matrix order {n} exceeds the configured cap {}",
            cfg.max_n
        )));
    }
    let h = input.graph.walk().hamiltonian();
    let sp = scan_spec(cfg);
    let tol = cfg.detector.tol;
    let need_state = || -> Result<(DensityMatrix, Option<usize>)> {
        match state {
            Some(s) => load_state(s, &input, tol),
            None => Err(input_error("this scan needs --state")),
        }
    };
    let result = match kind {
        ScanKind::Return => lib(oracle::scan_return(need_state()?.0.matrix(), &h, &sp))?,
        ScanKind::Realness => lib(oracle::scan_realness(need_state()?.0.matrix(), &h, &sp))?,
        ScanKind::Transfer => {
            let p = need_state()?.0;
            let Some(q) = target else {
                return Err(input_error("--kind transfer needs --target"));
            };
            let q = load_state(q, &input, tol)?.0;
            lib(oracle::scan_transfer(p.matrix(), q.matrix(), &h, &sp))?
        }
        ScanKind::Flatness => match need_state()? {
            (_, Some(a)) => lib(oracle::scan_flatness(&h, a, &sp))?,
            _ => return Err(input_error("--kind flatness needs a vertex state")),
        },
        ScanKind::Uniform => lib(oracle::scan_uniform_flatness(&h, &sp))?,
    };
    emit(&result)?;
    Ok(true)
}

pub fn orient(path: &str, cfg: &Run) -> Result<bool> {
    if cfg.oriented {
        return Err(input_error("orient takes an undirected graph"));
    }
    let input = load_graph(path, cfg.format, false)?;
    let Loaded::Graph(g) = &input.graph else {
        unreachable!("loaded as undirected")
    };
    let parts = bipartition(g).ok_or_else(|| input_error("graph is not bipartite"))?;
    let x = lib(natural_orientation(g, &parts))?;
    let text = lib(serialize_oriented(&x, cfg.format))?;
    if text.ends_with('\n') {
        write_stdout(&text)?;
    } else {
        write_stdout(&format!("{text}\n"))?;
    }
    Ok(true)
}
