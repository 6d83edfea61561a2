//! Decision procedures: periodicity, state transfer between real states,
//! pretty-good-transfer candidates, uniform mixing and the finiteness bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::arithmetic::{
    minimum_period, ratio_condition, RatioCertificate, RatioOutcome, RatioParams, RatioWitness,
    DEFAULT_CERT_TOL, DEFAULT_MAX_DEN,
};
use crate::error::{Error, Result};
use crate::graph::WalkGraph;
use crate::linalg::{frobenius, frobenius_distance, imag_norm, min_eigenvalue, real_part, CMatrix};
use crate::search::scan_minimize;
use crate::spectral::SpectralDecomposition;
use crate::state::{algebra_dimension, block_decompose, BlockDecomposition, DensityMatrix};

/// Sign patterns are enumerated only up to this many unordered off-diagonal pairs.
pub const PGST_PAIR_CAP: usize = 20;
const TIME_RESOLUTION: f64 = 1e-12;

/// Tolerances and search windows shared by the detectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectorConfig {
    /// State validation, realness and support tolerance.
    pub tol: f64,
    pub cert_tol: f64,
    /// Frobenius tolerance for accepting a return or transfer.
    pub accept_tol: f64,
    /// Per-entry probability defect for flatness.
    pub flat_tol: f64,
    pub max_den: u64,
    pub t_max: f64,
    /// `None` selects each search's default grid.
    pub grid_step: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            tol: 1e-9,
            cert_tol: DEFAULT_CERT_TOL,
            accept_tol: 1e-8,
            flat_tol: 1e-9,
            max_den: DEFAULT_MAX_DEN,
            t_max: 20.0,
            grid_step: None,
        }
    }
}

impl DetectorConfig {
    pub fn ratio_params(&self) -> RatioParams {
        RatioParams {
            max_den: self.max_den,
            cert_tol: self.cert_tol,
            ..RatioParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("tol", self.tol),
            ("cert_tol", self.cert_tol),
            ("accept_tol", self.accept_tol),
            ("flat_tol", self.flat_tol),
            ("t_max", self.t_max),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "grid_step must be positive, got {step}"
                )));
            }
        }
        if self.max_den < 1 {
            return Err(Error::InvalidArgument("max_den must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

/// Ratio-condition status attached to mixing reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessaryCondition {
    pub ratio_condition: RatioOutcome,
    /// True when a failed ratio condition rules mixing out; false when advisory.
    pub binding: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub verdict: Verdict,
    /// Period, transfer time or mixing time.
    pub witness_time: Option<f64>,
    pub target: Option<DensityMatrix>,
    /// Set when the target is a vertex state.
    pub target_vertex: Option<usize>,
    /// Residual of the check behind the verdict; `NaN` (JSON `null`) when no
    /// evaluation took place.
    pub residual: f64,
    pub certificate: Option<RatioCertificate>,
    pub ratio_witness: Option<RatioWitness>,
    pub necessary_condition: Option<NecessaryCondition>,
    pub reason: String,
    pub warnings: Vec<String>,
}

impl DetectionReport {
    fn new(verdict: Verdict, reason: impl Into<String>) -> Self {
        DetectionReport {
            verdict,
            witness_time: None,
            target: None,
            target_vertex: None,
            residual: f64::NAN,
            certificate: None,
            ratio_witness: None,
            necessary_condition: None,
            reason: reason.into(),
            warnings: Vec::new(),
        }
    }

    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }
}

/// Signs `eps_{r,s}` over unordered off-diagonal support pairs `r < s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignPattern {
    pub eps: BTreeMap<(usize, usize), i8>,
}

impl SignPattern {
    pub fn sign(&self, r: usize, s: usize) -> i8 {
        if r == s {
            return 1;
        }
        self.eps.get(&(r.min(s), r.max(s))).copied().unwrap_or(1)
    }

    pub fn is_all_positive(&self) -> bool {
        self.eps.values().all(|&e| e == 1)
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.eps.len()))?;
        for (&(r, s), &e) in &self.eps {
            seq.serialize_element(&(r, s, e))?;
        }
        seq.end()
    }
}

fn carry_warnings(d: &SpectralDecomposition, b: Option<&BlockDecomposition>) -> Vec<String> {
    let mut w = d.warnings().to_vec();
    if let Some(b) = b {
        w.extend(b.warnings().iter().cloned());
    }
    w
}

/// Whether `P` returns to itself, and the minimum period when it does.
pub fn detect_periodicity(
    p: &DensityMatrix,
    d: &SpectralDecomposition,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    let b = block_decompose(p, d, None)?;
    detect_periodicity_blocks(&b, d, cfg)
}

fn detect_periodicity_blocks(
    b: &BlockDecomposition,
    d: &SpectralDecomposition,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    cfg.validate()?;
    let warnings = carry_warnings(d, Some(b));
    let p = b.state();
    let mut report = if !warnings.is_empty() {
        DetectionReport::new(
            Verdict::Inconclusive,
            "eigenvalue grouping or block support is ambiguous at the threshold",
        )
    } else if b.support().off_diagonal().next().is_none() {
        let mut r = DetectionReport::new(Verdict::Yes, "stationary: the state commutes with H");
        r.witness_time = Some(0.0);
        r.residual = frobenius_distance(&b.evolve_matrix(1.0), p);
        r
    } else {
        match ratio_condition(b.support(), b.theta(), &cfg.ratio_params()) {
            RatioOutcome::Stationary => unreachable!("support has off-diagonal pairs"),
            RatioOutcome::Failed { witness, reason } => {
                let mut r = DetectionReport::new(Verdict::No, reason);
                r.ratio_witness = Some(witness);
                r
            }
            RatioOutcome::Certified { certificate } => {
                let sigma = minimum_period(&certificate)?;
                let residual = frobenius_distance(&b.evolve_matrix(sigma), p);
                let mut r = if residual <= cfg.accept_tol {
                    DetectionReport::new(Verdict::Yes, "ratio condition certified")
                } else {
                    DetectionReport::new(
                        Verdict::Inconclusive,
                        "certified period does not return the state within accept_tol",
                    )
                };
                r.witness_time = Some(sigma);
                r.residual = residual;
                r.certificate = Some(certificate);
                r
            }
            RatioOutcome::Inconclusive { reason, frequency } => match frequency {
                Some(omega) => {
                    let sigma = 2.0 * PI / omega;
                    let residual = frobenius_distance(&b.evolve_matrix(sigma), p);
                    let mut r = if residual <= cfg.accept_tol {
                        let mut r = DetectionReport::new(
                            Verdict::Yes,
                            "period from rational ratios of eigenvalue differences",
                        );
                        r.warnings
                            .push(format!("no square-free certificate: {reason}"));
                        r
                    } else {
                        DetectionReport::new(Verdict::Inconclusive, reason)
                    };
                    r.witness_time = Some(sigma);
                    r.residual = residual;
                    r
                }
                None => DetectionReport::new(Verdict::Inconclusive, reason),
            },
        }
    };
    report.warnings.extend(warnings);
    Ok(report)
}

/// Transfer from a real state to a distinct real state. Such a transfer can
/// only happen at half the minimum period, so a single evaluation decides it.
pub fn detect_pst(
    p: &DensityMatrix,
    d: &SpectralDecomposition,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    if !p.is_real() {
        return Err(Error::InvalidArgument(
            "state transfer detection needs a real state".into(),
        ));
    }
    let b = block_decompose(p, d, None)?;
    let periodic = detect_periodicity_blocks(&b, d, cfg)?;
    match periodic.verdict {
        Verdict::Yes => {}
        Verdict::No => {
            let mut r = DetectionReport::new(
                Verdict::No,
                format!("state is not periodic: {}", periodic.reason),
            );
            r.ratio_witness = periodic.ratio_witness;
            r.warnings = periodic.warnings;
            return Ok(r);
        }
        Verdict::Inconclusive => {
            let mut r = DetectionReport::new(
                Verdict::Inconclusive,
                format!("periodicity inconclusive: {}", periodic.reason),
            );
            r.warnings = periodic.warnings;
            return Ok(r);
        }
    }
    let sigma = periodic.witness_time.unwrap_or(0.0);
    if sigma == 0.0 {
        let mut r = DetectionReport::new(Verdict::No, "stationary state: it never moves");
        r.residual = periodic.residual;
        r.warnings = periodic.warnings;
        return Ok(r);
    }
    let tau = sigma / 2.0;
    let q = b.evolve_matrix(tau);
    let imag = imag_norm(&q);
    let qr = real_part(&q);
    let moved = frobenius_distance(&qr, p.matrix());
    let mut r = if imag > cfg.accept_tol {
        DetectionReport::new(Verdict::No, "state at half the period is not real")
    } else if moved <= cfg.accept_tol {
        DetectionReport::new(
            Verdict::No,
            "state at half the period equals the initial state",
        )
    } else {
        let target = DensityMatrix::new(qr, cfg.tol.max(cfg.accept_tol))?;
        let mut r = DetectionReport::new(Verdict::Yes, "real state at half the period");
        r.target_vertex = target.as_vertex(cfg.accept_tol);
        r.target = Some(target);
        r
    };
    r.witness_time = Some(tau);
    r.residual = imag;
    r.certificate = periodic.certificate;
    r.warnings = periodic.warnings;
    Ok(r)
}

/// `||U(t) P U(t)* - Q||`.
pub fn verify_transfer(p: &CMatrix, q: &CMatrix, d: &SpectralDecomposition, t: f64) -> Result<f64> {
    let n = d.order();
    for m in [p, q] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
    }
    let u = d.transition_matrix(t);
    Ok(frobenius_distance(&(&u * p * u.adjoint()), q))
}

#[derive(Clone, Debug, Serialize)]
pub struct PgstCandidate {
    pub signs: SignPattern,
    pub state: DensityMatrix,
}

/// Every state whose blocks agree with those of `P` up to sign on the
/// off-diagonal support, kept when positive semidefinite. The first entry is
/// always `P` itself.
pub fn pgst_candidates(
    p: &DensityMatrix,
    b: &BlockDecomposition,
    cfg: &DetectorConfig,
) -> Result<Vec<PgstCandidate>> {
    if !p.is_real() {
        return Err(Error::InvalidArgument(
            "candidate enumeration needs a real state".into(),
        ));
    }
    let pairs: Vec<(usize, usize)> = b.support().upper_pairs().collect();
    if pairs.len() > PGST_PAIR_CAP {
        return Err(Error::InvalidArgument(format!(
            "{} off-diagonal pairs would give 2^{} sign patterns (cap {PGST_PAIR_CAP} pairs)",
            pairs.len(),
            pairs.len()
        )));
    }
    let n = b.order();
    let mut base = CMatrix::zeros(n, n);
    for r in b.support().diagonal() {
        if let Some(block) = b.block(r, r) {
            base += block;
        }
    }
    let sym: Vec<CMatrix> = pairs
        .iter()
        .map(|&(r, s)| {
            let mut m = CMatrix::zeros(n, n);
            if let Some(x) = b.block(r, s) {
                m += x;
            }
            if let Some(x) = b.block(s, r) {
                m += x;
            }
            m
        })
        .collect();

    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut q = base.clone();
        let mut eps = BTreeMap::new();
        for (i, (&pair, m)) in pairs.iter().zip(&sym).enumerate() {
            let e: i8 = if mask >> i & 1 == 1 { -1 } else { 1 };
            eps.insert(pair, e);
            q += m * Complex64::from(e as f64);
        }
        if min_eigenvalue(&q) < -cfg.tol * n as f64 {
            continue;
        }
        let state = DensityMatrix::new(q, cfg.tol * n as f64)?;
        out.push(PgstCandidate {
            signs: SignPattern { eps },
            state,
        });
    }
    Ok(out)
}

/// Signs relating the blocks of `Q` to those of `P`, if every block of `Q`
/// is `+` or `-` the matching block of `P` (diagonal blocks `+`) within `tol`.
pub fn block_signs(
    b: &BlockDecomposition,
    q: &CMatrix,
    d: &SpectralDecomposition,
    tol: f64,
) -> Option<SignPattern> {
    let e = d.idempotents();
    let mut eps = BTreeMap::new();
    for r in 0..e.len() {
        for s in 0..e.len() {
            let qb = &e[r] * q * &e[s];
            let pb = b
                .block(r, s)
                .cloned()
                .unwrap_or_else(|| CMatrix::zeros(q.nrows(), q.ncols()));
            let plus = frobenius_distance(&qb, &pb);
            let minus = frobenius(&(&qb + &pb));
            let sign = if plus <= tol {
                1
            } else if minus <= tol && r != s {
                -1
            } else {
                return None;
            };
            if r < s && b.block(r, s).is_some() {
                eps.insert((r, s), sign);
            } else if r > s && b.block(r, s).is_some() {
                if let Some(&prev) = eps.get(&(s, r)) {
                    if prev != sign {
                        return None;
                    }
                }
            }
        }
    }
    Some(SignPattern { eps })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessSearch {
    pub time: f64,
    pub residual: f64,
    /// Residual at or below `accept_tol` somewhere in `[0, t_max]`.
    pub witnessed: bool,
}

/// Best time in `[0, t_max]` for moving `P` close to `Q`. A miss is only
/// evidence up to `t_max`, never a proof of absence.
pub fn pgst_witness_search(
    p: &DensityMatrix,
    q: &CMatrix,
    d: &SpectralDecomposition,
    t_max: f64,
    step: Option<f64>,
    accept_tol: f64,
) -> Result<WitnessSearch> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let b = block_decompose(p, d, None)?;
    if q.nrows() != b.order() || q.ncols() != b.order() {
        return Err(Error::DimensionMismatch {
            expected: b.order(),
            found: q.nrows(),
        });
    }
    let step = step.unwrap_or(1e-2).min(t_max);
    let theta = d.theta();
    let spread = theta[0] - theta[theta.len() - 1];
    let slope = 2.0 * spread * frobenius(p.matrix());
    let f = |t: f64| frobenius_distance(&b.evolve_matrix(t), q);
    let r = scan_minimize(f, (0.0, t_max), step, slope, accept_tol, TIME_RESOLUTION);
    let (time, residual) = r.first_hit.unwrap_or(r.best);
    Ok(WitnessSearch {
        time,
        residual,
        witnessed: residual <= accept_tol,
    })
}

fn column_flatness(
    d: &SpectralDecomposition,
    cols: &[Vec<Complex64>],
    theta: &[f64],
    t: f64,
) -> f64 {
    let n = d.order();
    let target = 1.0 / n as f64;
    let phases: Vec<Complex64> = theta
        .iter()
        .map(|&th| Complex64::from_polar(1.0, t * th))
        .collect();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut z = Complex64::new(0.0, 0.0);
        for (c, ph) in cols.iter().zip(&phases) {
            z += c[j] * ph;
        }
        worst = worst.max((z.norm_sqr() - target).abs());
    }
    worst
}

fn mixing_scan<F>(f: F, d: &SpectralDecomposition, cfg: &DetectorConfig) -> (f64, f64, bool)
where
    F: Fn(f64) -> f64,
{
    let theta = d.theta();
    let spread = theta[0] - theta[theta.len() - 1];
    let step = cfg.grid_step.unwrap_or(cfg.t_max / 1e5).min(cfg.t_max);
    let r = scan_minimize(
        f,
        (0.0, cfg.t_max),
        step,
        2.0 * spread,
        cfg.flat_tol,
        TIME_RESOLUTION,
    );
    match r.first_hit {
        Some((t, v)) => (t, v, true),
        None => (r.best.0, r.best.1, false),
    }
}

/// Whether the column `U(t) e_a` becomes flat for some `t` in `[0, t_max]`.
pub fn detect_local_uniform_mixing(
    d: &SpectralDecomposition,
    a: usize,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    cfg.validate()?;
    let n = d.order();
    if a >= n {
        return Err(Error::VertexOutOfRange { vertex: a, n });
    }
    let p = DensityMatrix::vertex(n, a)?;
    let b = block_decompose(&p, d, None)?;
    let condition = NecessaryCondition {
        ratio_condition: ratio_condition(b.support(), b.theta(), &cfg.ratio_params()),
        binding: d.is_skew_source(),
    };

    let support = d.vertex_support(a, cfg.tol);
    let cols: Vec<Vec<Complex64>> = support
        .iter()
        .map(|&r| d.column(r, a).iter().copied().collect())
        .collect();
    let theta: Vec<f64> = support.iter().map(|&r| d.theta()[r]).collect();
    let (t, defect, hit) = mixing_scan(|t| column_flatness(d, &cols, &theta, t), d, cfg);

    let condition_fails = matches!(condition.ratio_condition, RatioOutcome::Failed { .. });
    let mut r = if hit {
        if condition.binding && condition_fails {
            let mut r = DetectionReport::new(
                Verdict::Inconclusive,
                "flat column found although the necessary ratio condition fails",
            );
            r.warnings
                .push("scan and necessary condition disagree".into());
            r
        } else {
            DetectionReport::new(Verdict::Yes, format!("column {a} is flat"))
        }
    } else if condition.binding && condition_fails {
        DetectionReport::new(Verdict::No, "necessary ratio condition fails")
    } else {
        DetectionReport::new(
            Verdict::No,
            format!("no flat column found for t in [0, {}]", cfg.t_max),
        )
    };
    r.witness_time = Some(t);
    r.residual = defect;
    r.necessary_condition = Some(condition);
    r.warnings.extend(carry_warnings(d, Some(&b)));
    Ok(r)
}

/// Whether every column of `U(t)` is flat at one common `t` in `[0, t_max]`.
pub fn detect_uniform_mixing(
    d: &SpectralDecomposition,
    cfg: &DetectorConfig,
) -> Result<DetectionReport> {
    cfg.validate()?;
    let n = d.order();
    let target = 1.0 / n as f64;
    let f = |t: f64| {
        let u = d.transition_matrix(t);
        u.iter()
            .map(|z| (z.norm_sqr() - target).abs())
            .fold(0.0, f64::max)
    };
    let (t, defect, hit) = mixing_scan(f, d, cfg);
    let mut r = if hit {
        DetectionReport::new(Verdict::Yes, "all columns flat at a common time")
    } else {
        DetectionReport::new(
            Verdict::No,
            format!("no common flat time found for t in [0, {}]", cfg.t_max),
        )
    };
    r.witness_time = Some(t);
    r.residual = defect;
    r.warnings.extend(carry_warnings(d, None));
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexBounds {
    pub vertex: usize,
    /// Eccentricity plus one.
    pub ecc_plus_one: usize,
    /// Number of distinct eigenvalues `theta_r` with `E_r e_a != 0`.
    pub support_size: usize,
    pub max_valency: usize,
    /// `2 Delta + 1`.
    pub upper: usize,
    pub periodic: bool,
    /// `ecc_plus_one <= support_size`, and `support_size <= upper` when periodic.
    pub consistent: bool,
}

pub fn periodic_vertex_bounds<G: WalkGraph + ?Sized>(
    g: &G,
    d: &SpectralDecomposition,
    a: usize,
    cfg: &DetectorConfig,
) -> Result<VertexBounds> {
    let n = g.order();
    if d.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d.order(),
        });
    }
    if a >= n {
        return Err(Error::VertexOutOfRange { vertex: a, n });
    }
    let stats = g.stats();
    let ecc = stats
        .eccentricity
        .ok_or_else(|| Error::InvalidGraph("bounds need a connected graph".into()))?;
    let support_size = d.vertex_support(a, cfg.tol).len();
    let report = detect_periodicity(&DensityMatrix::vertex(n, a)?, d, cfg)?;
    let periodic = report.is_yes() && report.certificate.is_some();
    let upper = 2 * stats.max_valency + 1;
    let ecc_plus_one = ecc[a] + 1;
    Ok(VertexBounds {
        vertex: a,
        ecc_plus_one,
        support_size,
        max_valency: stats.max_valency,
        upper,
        periodic,
        consistent: ecc_plus_one <= support_size && (!periodic || support_size <= upper),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseCheck {
    pub controllable: bool,
    /// `P(t)` is real within `accept_tol`.
    pub real_at_t: bool,
    /// `U(2t)` is scalar within `accept_tol`.
    pub scalar: bool,
    pub zeta: Complex64,
    /// `||U(2t) - zeta I||`.
    pub scalar_defect: f64,
    /// `|zeta^n - 1|`.
    pub root_defect: f64,
    /// Preconditions hold and the conclusions follow from them.
    pub holds: bool,
}

/// For a controllable state that is real at time `t`, `U(2t)` must be a
/// scalar `zeta I` with `zeta^n = 1`.
pub fn controllability_phase_check(
    p: &DensityMatrix,
    d: &SpectralDecomposition,
    t: f64,
    cfg: &DetectorConfig,
) -> Result<PhaseCheck> {
    let n = d.order();
    let controllable = algebra_dimension(d.source(), p, None)?.controllable;
    let b = block_decompose(p, d, None)?;
    let real_at_t = imag_norm(&b.evolve_matrix(t)) <= cfg.accept_tol;
    let u2 = d.transition_matrix(2.0 * t);
    let zeta = u2.trace() / Complex64::from(n as f64);
    let scalar_defect = frobenius_distance(&u2, &(CMatrix::identity(n, n) * zeta));
    let root_defect = (zeta.powu(n as u32) - Complex64::new(1.0, 0.0)).norm();
    let scalar = scalar_defect <= cfg.accept_tol;
    Ok(PhaseCheck {
        controllable,
        real_at_t,
        scalar,
        zeta,
        scalar_defect,
        root_defect,
        holds: !(controllable && real_at_t) || (scalar && root_defect <= cfg.accept_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, OrientedGraph};
    use std::f64::consts::SQRT_2;

    fn cfg() -> DetectorConfig {
        DetectorConfig::default()
    }

    fn vertex(n: usize, a: usize) -> DensityMatrix {
        DensityMatrix::vertex(n, a).unwrap()
    }

    #[test]
    fn periodicity_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let r = detect_periodicity(&vertex(2, 0), &d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.witness_time.unwrap() - PI).abs() < 1e-12);

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let r = detect_periodicity(&vertex(3, 0), &d, &cfg()).unwrap();
        assert!((r.witness_time.unwrap() - PI * SQRT_2).abs() < 1e-12);
        assert!(r.residual <= 1e-8);
    }

    #[test]
    fn union_with_mixed_gaps_is_not_periodic() {
        let g = Graph::complete(2).disjoint_union(&Graph::path(3));
        let d = SpectralDecomposition::of(&g).unwrap();
        let m = (vertex(5, 0).matrix() + vertex(5, 2).matrix()) * Complex64::from(0.5);
        let p = DensityMatrix::new(m, 1e-9).unwrap();
        let r = detect_periodicity(&p, &d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        assert!((r.ratio_witness.unwrap().ratio - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn stationary_state_is_periodic_at_zero() {
        let d = SpectralDecomposition::of(&Graph::cycle(5)).unwrap();
        let r = detect_periodicity(&DensityMatrix::maximally_mixed(5), &d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert_eq!(r.witness_time, Some(0.0));
        let pst = detect_pst(&DensityMatrix::maximally_mixed(5), &d, &cfg()).unwrap();
        assert_eq!(pst.verdict, Verdict::No);
    }

    #[test]
    fn pst_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let r = detect_pst(&vertex(2, 0), &d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.witness_time.unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(r.target_vertex, Some(1));

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let r = detect_pst(&vertex(3, 0), &d, &cfg()).unwrap();
        assert!((r.witness_time.unwrap() - PI / SQRT_2).abs() < 1e-12);
        assert_eq!(r.target_vertex, Some(2));
    }

    #[test]
    fn star_centre_transfers_to_leaf_superposition_only() {
        let d = SpectralDecomposition::of(&Graph::star(3)).unwrap();
        let r = detect_pst(&vertex(4, 0), &d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert_eq!(r.target_vertex, None);
        let q = r.target.unwrap();
        for j in 1..4 {
            for k in 1..4 {
                assert!((q.matrix()[(j, k)].re - 1.0 / 3.0).abs() < 1e-9);
            }
        }
        let leaf = vertex(4, 1);
        let w = pgst_witness_search(&vertex(4, 0), leaf.matrix(), &d, 20.0, None, 1e-8).unwrap();
        assert!(!w.witnessed && w.residual > 0.5);
    }

    #[test]
    fn complex_state_is_rejected_for_pst() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let z = crate::linalg::CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]) / Complex64::from(SQRT_2);
        let p = DensityMatrix::pure(&z, 1e-9).unwrap();
        assert!(detect_pst(&p, &d, &cfg()).is_err());
    }

    #[test]
    fn verify_transfer_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let (d0, d1) = (vertex(2, 0), vertex(2, 1));
        assert!(verify_transfer(d0.matrix(), d1.matrix(), &d, PI / 2.0).unwrap() <= 1e-12);
        assert!(verify_transfer(d0.matrix(), d0.matrix(), &d, PI).unwrap() <= 1e-12);
        // Frobenius norm of [[1/2, i/2], [-i/2, -1/2]]; its operator norm is 1/sqrt(2).
        let half = verify_transfer(d0.matrix(), d1.matrix(), &d, PI / 4.0).unwrap();
        assert!((half - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgst_candidates_k2() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let p = vertex(2, 0);
        let b = block_decompose(&p, &d, None).unwrap();
        let c = pgst_candidates(&p, &b, &cfg()).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[0].signs.is_all_positive());
        assert!(frobenius_distance(c[0].state.matrix(), p.matrix()) < 1e-12);
        assert!(frobenius_distance(c[1].state.matrix(), vertex(2, 1).matrix()) < 1e-12);
    }

    #[test]
    fn pgst_candidates_stationary_and_p3() {
        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3);
        let b = block_decompose(&mixed, &d, None).unwrap();
        assert_eq!(pgst_candidates(&mixed, &b, &cfg()).unwrap().len(), 1);

        let p = vertex(3, 0);
        let b = block_decompose(&p, &d, None).unwrap();
        let c = pgst_candidates(&p, &b, &cfg()).unwrap();
        let has = |v: usize| {
            c.iter()
                .any(|x| frobenius_distance(x.state.matrix(), vertex(3, v).matrix()) < 1e-9)
        };
        assert!(has(0) && has(2));
        assert!(c.iter().all(|x| min_eigenvalue(x.state.matrix()) > -1e-9));
    }

    #[test]
    fn block_signs_of_pst_target() {
        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let p = vertex(3, 0);
        let b = block_decompose(&p, &d, None).unwrap();
        let s = block_signs(&b, vertex(3, 2).matrix(), &d, 1e-8).unwrap();
        assert!(!s.is_all_positive());
        assert!(block_signs(&b, vertex(3, 1).matrix(), &d, 1e-8).is_none());
    }

    #[test]
    fn witness_search_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let w =
            pgst_witness_search(&vertex(2, 0), vertex(2, 1).matrix(), &d, 2.0, None, 1e-8).unwrap();
        assert!(w.witnessed && (w.time - PI / 2.0).abs() < 1e-9 && w.residual <= 1e-9);

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let w =
            pgst_witness_search(&vertex(3, 0), vertex(3, 2).matrix(), &d, 5.0, None, 1e-8).unwrap();
        assert!((w.time - PI / SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn local_mixing_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let r = detect_local_uniform_mixing(&d, 0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.witness_time.unwrap() - PI / 4.0).abs() < 1e-9);

        let d = SpectralDecomposition::of(&Graph::star(3)).unwrap();
        let r = detect_local_uniform_mixing(&d, 0, &cfg()).unwrap();
        assert!((r.witness_time.unwrap() - PI / (3.0 * 3f64.sqrt())).abs() < 1e-9);

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let r = detect_local_uniform_mixing(&d, 0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        assert!(r.residual > 1e-9);
        assert!(!r.necessary_condition.unwrap().binding);
    }

    #[test]
    fn uniform_mixing_examples() {
        let d = SpectralDecomposition::of(&Graph::star(3)).unwrap();
        let r = detect_uniform_mixing(&d, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.witness_time.unwrap() - 2.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-6);

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        assert_eq!(
            detect_uniform_mixing(&d, &cfg()).unwrap().verdict,
            Verdict::No
        );
    }

    #[test]
    fn bounds_examples() {
        let g = Graph::path(3);
        let d = SpectralDecomposition::of(&g).unwrap();
        let b = periodic_vertex_bounds(&g, &d, 0, &cfg()).unwrap();
        assert_eq!((b.ecc_plus_one, b.support_size, b.upper), (3, 3, 5));
        assert!(b.consistent && b.periodic);

        let c3 = OrientedGraph::cyclic(3);
        let d = SpectralDecomposition::of(&c3).unwrap();
        let b = periodic_vertex_bounds(&c3, &d, 0, &cfg()).unwrap();
        assert_eq!((b.ecc_plus_one, b.support_size, b.upper), (2, 3, 5));
        assert!(b.consistent);

        let star = Graph::star(3);
        let d = SpectralDecomposition::of(&star).unwrap();
        let b = periodic_vertex_bounds(&star, &d, 0, &cfg()).unwrap();
        assert_eq!((b.ecc_plus_one, b.support_size), (2, 2));
        assert!(b.consistent);

        let split = Graph::complete(2).disjoint_union(&Graph::complete(2));
        let d = SpectralDecomposition::of(&split).unwrap();
        assert!(periodic_vertex_bounds(&split, &d, 0, &cfg()).is_err());
    }

    #[test]
    fn phase_check_examples() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        let c = controllability_phase_check(&vertex(2, 0), &d, PI / 2.0, &cfg()).unwrap();
        assert!(c.controllable && c.real_at_t && c.scalar && c.holds);
        assert!((c.zeta + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let c = controllability_phase_check(&vertex(2, 0), &d, PI, &cfg()).unwrap();
        assert!((c.zeta - Complex64::new(1.0, 0.0)).norm() < 1e-12 && c.holds);

        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let c = controllability_phase_check(&vertex(3, 0), &d, PI / SQRT_2, &cfg()).unwrap();
        assert!(c.controllable && c.real_at_t && c.scalar && c.holds);
        assert!(c.root_defect < 1e-9);
    }

    #[test]
    fn sign_pattern_serializes_as_triples() {
        let mut eps = BTreeMap::new();
        eps.insert((0, 2), -1);
        let s = serde_json::to_string(&SignPattern { eps }).unwrap();
        assert_eq!(s, "[[0,2,-1]]");
    }
}
