//! Density matrices, their spectral block decomposition `E_r P E_s`, time
//! evolution, flatness and the algebra generated by `H` and `P`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{rational_approx, DEFAULT_MAX_DEN, DEFAULT_RATIONAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, frobenius_distance, hermitian_defect, max_imag, min_eigenvalue, trace_inner,
    CMatrix, CVector, ONE,
};
use crate::spectral::SpectralDecomposition;

pub const DEFAULT_STATE_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite, trace-one matrix together with its
/// classification flags.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
    real: bool,
    pure: bool,
    rational: bool,
}

/// Individual invariant defects of a candidate density matrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StateDefects {
    pub hermitian: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl StateDefects {
    pub fn of(m: &CMatrix) -> Self {
        StateDefects {
            hermitian: hermitian_defect(m),
            trace: (m.trace() - ONE).norm(),
            min_eigenvalue: min_eigenvalue(m),
        }
    }

    pub fn violations(&self, tol: f64) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.hermitian > tol {
            out.push("state.hermitian");
        }
        if self.trace > tol {
            out.push("state.trace");
        }
        if self.min_eigenvalue < -tol {
            out.push("state.psd");
        }
        out
    }
}

impl DensityMatrix {
    /// Validates the density-matrix invariants within `tol`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let defects = StateDefects::of(&m);
        let bad = defects.violations(tol);
        if !bad.is_empty() {
            return Err(Error::InvalidState(format!(
                "{} (hermitian {:.3e}, trace {:.3e}, min eigenvalue {:.3e})",
                bad.join(", "),
                defects.hermitian,
                defects.trace,
                defects.min_eigenvalue
            )));
        }
        Ok(Self::classify(m, tol))
    }

    /// Wraps `m` without validating it; only computes the flags.
    pub(crate) fn classify(m: CMatrix, tol: f64) -> Self {
        let n = m.nrows();
        let real = max_imag(&m) <= tol;
        let pure = frobenius_distance(&(&m * &m), &m) <= n.max(1) as f64 * tol;
        let rational = m.iter().all(|z| {
            rational_approx(z.re, DEFAULT_MAX_DEN, DEFAULT_RATIONAL_TOL).is_some()
                && rational_approx(z.im, DEFAULT_MAX_DEN, DEFAULT_RATIONAL_TOL).is_some()
        });
        DensityMatrix {
            m,
            real,
            pure,
            rational,
        }
    }

    /// `e_a e_a^T`.
    pub fn vertex(n: usize, a: usize) -> Result<Self> {
        if a >= n {
            return Err(Error::VertexOutOfRange { vertex: a, n });
        }
        let mut m = CMatrix::zeros(n, n);
        m[(a, a)] = ONE;
        Ok(DensityMatrix {
            m,
            real: true,
            pure: true,
            rational: true,
        })
    }

    /// `z z*` for a unit vector `z`.
    pub fn pure(z: &CVector, tol: f64) -> Result<Self> {
        let norm = z.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        let mut d = Self::classify(z * z.adjoint(), tol);
        d.pure = true;
        Ok(d)
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::classify(
            CMatrix::identity(n, n) / Complex64::from(n as f64),
            DEFAULT_STATE_TOL,
        )
    }

    /// Convex combination `sum w_i P_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let n = parts
            .first()
            .map(|(_, p)| p.order())
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut m = CMatrix::zeros(n, n);
        for (w, p) in parts {
            if p.order() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.order(),
                });
            }
            if *w < 0.0 {
                return Err(Error::InvalidArgument("negative mixture weight".into()));
            }
            m += &p.m * Complex64::from(*w);
        }
        Self::new(m, DEFAULT_STATE_TOL)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn is_rational(&self) -> bool {
        self.rational
    }

    /// The vertex `a` with `P = e_a e_a^T` within `tol`, if any.
    pub fn as_vertex(&self, tol: f64) -> Option<usize> {
        let n = self.order();
        let a = (0..n).find(|&a| (self.m[(a, a)] - ONE).norm() <= tol)?;
        let target = DensityMatrix::vertex(n, a).ok()?;
        (frobenius_distance(&self.m, &target.m) <= tol).then_some(a)
    }

    /// Drops imaginary parts; used once a state is known to be real.
    pub fn real_part(&self) -> Self {
        let m = self.m.map(|z| Complex64::new(z.re, 0.0));
        let mut d = Self::classify(m, DEFAULT_STATE_TOL);
        d.pure = self.pure;
        d
    }

    pub fn to_json(&self) -> DensityJson {
        DensityJson::from_matrix(&self.m)
    }
}

/// `{"re": [[..]], "im": [[..]]}` with row-major arrays. A missing `im`
/// reads as zero.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl DensityJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        DensityJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Raw matrix, checking only the shape.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.re.len();
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        let real_only = self.im.is_empty() && n > 0;
        if !square(&self.re) || !(real_only || square(&self.im)) {
            return Err(Error::InvalidState(
                "\"re\" and \"im\" must be square arrays of equal size".into(),
            ));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let im = if real_only { 0.0 } else { self.im[i][j] };
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn to_state(&self, tol: f64) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?, tol)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Index pairs `(r, s)` with `E_r P E_s != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenvalueSupport {
    pairs: BTreeSet<(usize, usize)>,
}

impl EigenvalueSupport {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        EigenvalueSupport {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, r: usize, s: usize) -> bool {
        self.pairs.contains(&(r, s))
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs().filter(|(r, s)| r != s)
    }

    /// Off-diagonal pairs with `r < s`.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs().filter(|(r, s)| r < s)
    }

    /// Eigenvalue indices `r` with `E_r P E_r != 0`. For a pure state `zz*`
    /// these are exactly the `r` with `E_r z != 0`.
    pub fn diagonal(&self) -> Vec<usize> {
        self.pairs()
            .filter(|(r, s)| r == s)
            .map(|(r, _)| r)
            .collect()
    }

    pub fn is_stationary(&self) -> bool {
        self.off_diagonal().next().is_none()
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(r, s)| self.contains(s, r))
    }

    /// If `(r, s)` is in the support then so are `(r, r)` and `(s, s)`.
    pub fn diagonal_presence_holds(&self) -> bool {
        self.pairs()
            .all(|(r, s)| self.contains(r, r) && self.contains(s, s))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The non-negligible blocks `E_r P E_s` of a state.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    theta: Vec<f64>,
    blocks: BTreeMap<(usize, usize), CMatrix>,
    support: EigenvalueSupport,
    state: CMatrix,
    block_tol: f64,
    dropped: f64,
    warnings: Vec<String>,
}

/// Splits `P` into blocks `E_r P E_s`, keeping those with norm above
/// `block_tol` (default `1e-9 ||P||`).
pub fn block_decompose(
    p: &DensityMatrix,
    d: &SpectralDecomposition,
    block_tol: Option<f64>,
) -> Result<BlockDecomposition> {
    let n = d.order();
    if p.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.order(),
        });
    }
    let block_tol = block_tol.unwrap_or(1e-9 * frobenius(p.matrix()));
    let left: Vec<CMatrix> = d.idempotents().iter().map(|e| e * p.matrix()).collect();
    let mut blocks = BTreeMap::new();
    let mut dropped = 0.0f64;
    let mut warnings = Vec::new();
    for (r, er_p) in left.iter().enumerate() {
        for (s, es) in d.idempotents().iter().enumerate() {
            let b = er_p * es;
            let norm = frobenius(&b);
            if norm > block_tol / 10.0 && norm <= 10.0 * block_tol {
                warnings.push(format!(
                    "block ({r},{s}) norm {norm:.3e} is within a factor 10 of block_tol {block_tol:.3e}"
                ));
            }
            if norm > block_tol {
                blocks.insert((r, s), b);
            } else {
                dropped = dropped.max(norm);
            }
        }
    }
    let support = EigenvalueSupport::from_pairs(blocks.keys().copied());
    Ok(BlockDecomposition {
        theta: d.theta().to_vec(),
        blocks,
        support,
        state: p.matrix().clone(),
        block_tol,
        dropped,
        warnings,
    })
}

impl BlockDecomposition {
    pub fn support(&self) -> &EigenvalueSupport {
        &self.support
    }

    pub fn block(&self, r: usize, s: usize) -> Option<&CMatrix> {
        self.blocks.get(&(r, s))
    }

    pub fn blocks(&self) -> impl Iterator<Item = ((usize, usize), &CMatrix)> {
        self.blocks.iter().map(|(k, v)| (*k, v))
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn state(&self) -> &CMatrix {
        &self.state
    }

    pub fn block_tol(&self) -> f64 {
        self.block_tol
    }

    /// Largest norm among the dropped blocks.
    pub fn dropped_norm(&self) -> f64 {
        self.dropped
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn order(&self) -> usize {
        self.state.nrows()
    }

    /// `sum e^{it(theta_r - theta_s)} E_r P E_s`.
    pub fn evolve_matrix(&self, t: f64) -> CMatrix {
        let n = self.order();
        let mut out = CMatrix::zeros(n, n);
        for (&(r, s), b) in &self.blocks {
            out += b * Complex64::from_polar(1.0, t * (self.theta[r] - self.theta[s]));
        }
        out
    }

    pub fn evolve(&self, t: f64) -> DensityMatrix {
        DensityMatrix::classify(self.evolve_matrix(t), DEFAULT_STATE_TOL)
    }

    /// `||sum blocks - P||`.
    pub fn reconstruction_error(&self) -> f64 {
        frobenius_distance(&self.evolve_matrix(0.0), &self.state)
    }

    /// Largest `|<B_rs, B_kl>|` over distinct kept blocks.
    pub fn orthogonality_defect(&self) -> f64 {
        let keys: Vec<_> = self.blocks.keys().copied().collect();
        let mut worst = 0.0f64;
        for (i, a) in keys.iter().enumerate() {
            for b in &keys[i + 1..] {
                worst = worst.max(trace_inner(&self.blocks[a], &self.blocks[b]).norm());
            }
        }
        worst
    }

    /// Largest `||B_rs B_kl||` over kept blocks with `s != k`.
    pub fn product_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(_, s), x) in &self.blocks {
            for (&(k, _), y) in &self.blocks {
                if s != k {
                    worst = worst.max(frobenius(&(x * y)));
                }
            }
        }
        worst
    }

    /// Largest `||B_rs B_kl||` over off-diagonal kept blocks with `s == k`.
    /// These products need not vanish; the value is reported, not asserted.
    pub fn chained_offdiagonal_product(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(r, s), x) in &self.blocks {
            for (&(k, l), y) in &self.blocks {
                if r != s && k != l && s == k {
                    worst = worst.max(frobenius(&(x * y)));
                }
            }
        }
        worst
    }
}

/// `max_j | |v_j|^2 / ||v||^2 - 1/n |`.
pub fn flatness_defect(v: &CVector) -> Result<f64> {
    let norm_sq = v.norm_squared();
    if v.is_empty() || norm_sq == 0.0 {
        return Err(Error::InvalidArgument("zero vector".into()));
    }
    let target = 1.0 / v.len() as f64;
    Ok(v.iter()
        .map(|z| (z.norm_sqr() / norm_sq - target).abs())
        .fold(0.0, f64::max))
}

/// True iff all entries of `v` have the same modulus (within `tol` on the
/// normalised probabilities).
pub fn is_flat(v: &CVector, tol: f64) -> Result<bool> {
    Ok(flatness_defect(v)? <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraDimension {
    pub dim: usize,
    pub controllable: bool,
}

const ALGEBRA_TOL: f64 = 1e-8;

/// Dimension of the algebra generated by `H` and `P`: words of length at most
/// `max_word_len` are added greedily (left multiplication by `H` and `P`)
/// until an extension round adds nothing. Pass `None` for the default `2 n^2`.
pub fn algebra_dimension(
    h: &CMatrix,
    p: &DensityMatrix,
    max_word_len: Option<usize>,
) -> Result<AlgebraDimension> {
    let n = h.nrows();
    if p.order() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.order(),
        });
    }
    let full = n * n;
    let cap = max_word_len.unwrap_or(2 * full);
    if cap < full {
        return Err(Error::InvalidArgument(format!(
            "word-length cap {cap} is below n^2 = {full}"
        )));
    }
    let generators = [h, p.matrix()];
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut queue: VecDeque<(CMatrix, usize)> = VecDeque::new();

    let extend = |w: CMatrix, len: usize, basis: &mut Vec<CMatrix>, queue: &mut VecDeque<_>| {
        let norm = frobenius(&w);
        if norm <= ALGEBRA_TOL {
            return;
        }
        let w = w / Complex64::from(norm);
        let mut r = w.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = trace_inner(b, &r);
                r -= b * c;
            }
        }
        let rn = frobenius(&r);
        if rn > ALGEBRA_TOL {
            basis.push(r / Complex64::from(rn));
            queue.push_back((w, len));
        }
    };

    extend(CMatrix::identity(n, n), 0, &mut basis, &mut queue);
    while let Some((w, len)) = queue.pop_front() {
        if basis.len() == full || len >= cap {
            break;
        }
        for g in generators {
            extend(g * &w, len + 1, &mut basis, &mut queue);
        }
    }
    Ok(AlgebraDimension {
        dim: basis.len(),
        controllable: basis.len() == full,
    })
}
