//! Spectral decomposition of Hermitian matrices into distinct eigenvalues and
//! orthogonal idempotents, and the walk's transition matrix built from them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WalkGraph;
use crate::linalg::{
    frobenius, frobenius_distance, hermitian_defect, hermitian_eigenvalues, max_imag, CMatrix,
    CVector,
};

/// Default eigenvalue grouping tolerance, relative to `max(1, ||H||)`.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default cap on the matrix order.
pub const DEFAULT_MAX_N: usize = 512;

/// Distinct eigenvalues `theta[0] > theta[1] > ...` of a Hermitian matrix with
/// the orthogonal projections onto their eigenspaces.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    theta: Vec<f64>,
    idempotents: Vec<CMatrix>,
    mult: Vec<usize>,
    source: CMatrix,
    tol: f64,
    scale: f64,
    warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecompositionResiduals {
    /// `||sum_r E_r - I||`
    pub completeness: f64,
    /// `max_{r,s} ||E_r E_s - delta_rs E_r||`
    pub orthogonality: f64,
    /// `||H - sum_r theta_r E_r||`
    pub reconstruction: f64,
    /// `max_r ||E_r - E_r*||`
    pub hermiticity: f64,
    /// `max_r |tr(E_r) - mult_r|`
    pub trace: f64,
}

impl SpectralDecomposition {
    pub fn new(h: &CMatrix, tol: f64) -> Result<Self> {
        Self::with_cap(h, tol, DEFAULT_MAX_N)
    }

    pub fn of<G: WalkGraph + ?Sized>(g: &G) -> Result<Self> {
        Self::new(&g.hamiltonian(), DEFAULT_TOL)
    }

    pub fn with_cap(h: &CMatrix, tol: f64, max_n: usize) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                found: h.ncols(),
            });
        }
        let n = h.nrows();
        if n > max_n {
            return Err(Error::TooLarge { n, cap: max_n });
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let defect = hermitian_defect(h);
        if defect > tol {
            return Err(Error::NotHermitian { defect });
        }

        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let raw: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(
                "eigensolver returned non-finite values".into(),
            ));
        }

        let scale = raw.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let threshold = tol * scale;
        let mut warnings = Vec::new();

        // Consecutive raw eigenvalues closer than the threshold share a group.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, &x) in raw.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if raw[g[g.len() - 1]] - x <= threshold => {
                    let gap = raw[g[g.len() - 1]] - x;
                    if gap > threshold / 10.0 {
                        warnings.push(format!(
                            "eigenvalues {:.12} and {:.12} merged with gap {gap:.3e} near threshold {threshold:.3e}",
                            raw[g[g.len() - 1]], x
                        ));
                    }
                    g.push(k);
                }
                Some(g) => {
                    let gap = raw[g[g.len() - 1]] - x;
                    if gap <= 10.0 * threshold {
                        warnings.push(format!(
                            "eigenvalues {:.12} and {:.12} separated with gap {gap:.3e} near threshold {threshold:.3e}",
                            raw[g[g.len() - 1]], x
                        ));
                    }
                    groups.push(vec![k]);
                }
                None => groups.push(vec![k]),
            }
        }

        let mut theta = Vec::with_capacity(groups.len());
        let mut idempotents = Vec::with_capacity(groups.len());
        let mut mult = Vec::with_capacity(groups.len());
        for g in &groups {
            theta.push(g.iter().map(|&k| raw[k]).sum::<f64>() / g.len() as f64);
            let mut e = CMatrix::zeros(n, n);
            for &k in g {
                let v = eig.eigenvectors.column(order[k]);
                e += &v * v.adjoint();
            }
            idempotents.push(e);
            mult.push(g.len());
        }

        Ok(SpectralDecomposition {
            theta,
            idempotents,
            mult,
            source: h.clone(),
            tol,
            scale,
            warnings,
        })
    }

    pub fn order(&self) -> usize {
        self.source.nrows()
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn idempotents(&self) -> &[CMatrix] {
        &self.idempotents
    }

    pub fn idempotent(&self, r: usize) -> &CMatrix {
        &self.idempotents[r]
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.mult
    }

    pub fn source(&self) -> &CMatrix {
        &self.source
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `max(1, ||H||)` with the spectral norm.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Ambiguous-grouping warnings; detectors propagate these.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.warnings.is_empty()
    }

    /// True when `H` is purely imaginary, i.e. `H = -iS` for a real skew `S`.
    pub fn is_skew_source(&self) -> bool {
        self.source.iter().all(|z| z.re.abs() <= self.tol)
    }

    /// `U(t) = sum_r exp(i t theta_r) E_r`.
    pub fn transition_matrix(&self, t: f64) -> CMatrix {
        let n = self.order();
        let mut u = CMatrix::zeros(n, n);
        for (theta, e) in self.theta.iter().zip(&self.idempotents) {
            u += e * Complex64::from_polar(1.0, t * theta);
        }
        u
    }

    /// `E_r e_a`.
    pub fn column(&self, r: usize, a: usize) -> CVector {
        self.idempotents[r].column(a).into_owned()
    }

    /// Indices `r` with `E_r e_a != 0`: the eigenvalue support of vertex `a`.
    pub fn vertex_support(&self, a: usize, tol: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&r| self.idempotents[r].column(a).norm() > tol)
            .collect()
    }

    pub fn residuals(&self) -> DecompositionResiduals {
        let n = self.order();
        let id = CMatrix::identity(n, n);
        let sum: CMatrix = self
            .idempotents
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, e| acc + e);
        let mut orthogonality = 0.0f64;
        for (r, er) in self.idempotents.iter().enumerate() {
            for (s, es) in self.idempotents.iter().enumerate() {
                let prod = er * es;
                let d = if r == s {
                    frobenius_distance(&prod, er)
                } else {
                    frobenius(&prod)
                };
                orthogonality = orthogonality.max(d);
            }
        }
        let rebuilt = self
            .theta
            .iter()
            .zip(&self.idempotents)
            .fold(CMatrix::zeros(n, n), |acc, (t, e)| {
                acc + e * Complex64::from(*t)
            });
        DecompositionResiduals {
            completeness: frobenius_distance(&sum, &id),
            orthogonality,
            reconstruction: frobenius_distance(&self.source, &rebuilt),
            hermiticity: self
                .idempotents
                .iter()
                .map(hermitian_defect)
                .fold(0.0, f64::max),
            trace: self
                .idempotents
                .iter()
                .zip(&self.mult)
                .map(|(e, &m)| (e.trace() - Complex64::from(m as f64)).norm())
                .fold(0.0, f64::max),
        }
    }

    /// For skew sources: index of the eigenvalue `-theta_r`, if present.
    pub fn negated_index(&self, r: usize) -> Option<usize> {
        let target = -self.theta[r];
        let threshold = 10.0 * self.tol * self.scale;
        (0..self.len()).find(|&s| (self.theta[s] - target).abs() <= threshold)
    }

    pub fn vertex_spectral_relation(
        &self,
        a: usize,
        b: usize,
        tol: f64,
    ) -> Result<SpectralRelation> {
        let n = self.order();
        for v in [a, b] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        if a == b {
            return Err(Error::InvalidArgument("vertices must be distinct".into()));
        }
        let mut signs = Vec::with_capacity(self.len());
        let mut strong = true;
        for r in 0..self.len() {
            let ea = self.idempotents[r].column(a);
            let eb = self.idempotents[r].column(b);
            if (ea.norm() - eb.norm()).abs() > tol {
                return Ok(SpectralRelation::Unrelated);
            }
            if ea.norm() <= tol {
                signs.push(0);
            } else if (ea - eb).norm() <= tol {
                signs.push(1);
            } else if (ea + eb).norm() <= tol {
                signs.push(-1);
            } else {
                strong = false;
            }
        }
        Ok(if strong {
            SpectralRelation::StronglyCospectral { signs }
        } else {
            SpectralRelation::Cospectral
        })
    }
}

pub fn spectral_decompose(h: &CMatrix, tol: f64) -> Result<SpectralDecomposition> {
    SpectralDecomposition::new(h, tol)
}

/// How two vertices relate spectrally.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum SpectralRelation {
    Unrelated,
    /// `||E_r e_a|| = ||E_r e_b||` for every `r`.
    Cospectral,
    /// `E_r e_a = signs[r] E_r e_b`; a zero sign marks `E_r e_a = 0`.
    StronglyCospectral {
        signs: Vec<i8>,
    },
}

/// Checks that the eigenvalues of the principal submatrix on `subset`
/// interlace those of `h` (Cauchy interlacing, with multiplicity).
pub fn interlacing_check(h: &CMatrix, subset: &[usize], tol: f64) -> Result<bool> {
    let n = h.nrows();
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() || idx.len() >= n {
        return Err(Error::InvalidArgument(
            "subset must be non-empty and proper".into(),
        ));
    }
    if let Some(&v) = idx.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    let defect = hermitian_defect(h);
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    let m = idx.len();
    let sub = CMatrix::from_fn(m, m, |i, j| h[(idx[i], idx[j])]);
    let big = hermitian_eigenvalues(h);
    let small = hermitian_eigenvalues(&sub);
    Ok((0..m).all(|i| big[i] + tol >= small[i] && small[i] + tol >= big[i + n - m]))
}

/// Largest imaginary entry of `U(t)`; zero for skew sources up to rounding.
pub fn transition_imaginary_defect(d: &SpectralDecomposition, t: f64) -> f64 {
    max_imag(&d.transition_matrix(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, OrientedGraph};
    use crate::linalg::{frobenius_distance, I};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn k2_by_hand() {
        let d = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        assert_eq!(d.len(), 2);
        assert!(close(d.theta()[0], 1.0, 1e-14) && close(d.theta()[1], -1.0, 1e-14));
        let half = Complex64::from(0.5);
        let e1 = CMatrix::from_element(2, 2, half);
        let e2 = CMatrix::from_row_slice(2, 2, &[half, -half, -half, half]);
        assert!(frobenius_distance(d.idempotent(0), &e1) < 1e-14);
        assert!(frobenius_distance(d.idempotent(1), &e2) < 1e-14);
    }

    #[test]
    fn p3_spectrum() {
        // Characteristic polynomial t^3 - 2t.
        let d = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        let expect = [SQRT_2, 0.0, -SQRT_2];
        for (x, y) in d.theta().iter().zip(expect) {
            assert!(close(*x, y, 1e-14));
        }
        assert_eq!(d.multiplicities(), &[1, 1, 1]);
        let r = d.residuals();
        assert!(r.completeness < 1e-12 && r.orthogonality < 1e-12 && r.reconstruction < 1e-12);
    }

    #[test]
    fn oriented_triangle_spectrum() {
        // Circulant eigenvalues 2 sin(2 pi k / 3).
        let d = SpectralDecomposition::of(&OrientedGraph::cyclic(3)).unwrap();
        let s3 = 3f64.sqrt();
        for (x, y) in d.theta().iter().zip([s3, 0.0, -s3]) {
            assert!(close(*x, y, 1e-14));
        }
        assert!(d.is_skew_source());
        assert_eq!(d.negated_index(0), Some(2));
    }

    #[test]
    fn repeated_eigenvalues_group() {
        let d = SpectralDecomposition::of(&Graph::star(3)).unwrap();
        assert_eq!(d.multiplicities(), &[1, 2, 1]);
        assert!(!d.is_ambiguous());
        let k4 = SpectralDecomposition::of(&Graph::complete(4)).unwrap();
        assert_eq!(k4.multiplicities(), &[1, 3]);
    }

    #[test]
    fn near_threshold_gap_warns() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::from(1.0),
            Complex64::from(1.0 + 5e-9),
            Complex64::from(-1.0),
        ]));
        let d = SpectralDecomposition::new(&h, 1e-9).unwrap();
        assert!(d.is_ambiguous());
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        let h = CMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()]);
        assert!(matches!(
            SpectralDecomposition::new(&h, 1e-9),
            Err(Error::NotHermitian { .. })
        ));
        let big = CMatrix::zeros(5, 5);
        assert!(matches!(
            SpectralDecomposition::with_cap(&big, 1e-9, 4),
            Err(Error::TooLarge { .. })
        ));
        assert!(SpectralDecomposition::new(&big, 0.0).is_err());
    }

    #[test]
    fn transition_k2_quarter_period() {
        let g = Graph::complete(2);
        let d = SpectralDecomposition::of(&g).unwrap();
        let u = d.transition_matrix(PI / 2.0);
        let expect = g.hamiltonian() * I;
        assert!(frobenius_distance(&u, &expect) < 1e-12);
        let u0 = d.transition_matrix(0.0);
        assert!(frobenius_distance(&u0, &CMatrix::identity(2, 2)) < 1e-14);
    }

    #[test]
    fn transition_oriented_triangle_returns() {
        let d = SpectralDecomposition::of(&OrientedGraph::cyclic(3)).unwrap();
        let u = d.transition_matrix(2.0 * PI / 3f64.sqrt());
        assert!(frobenius_distance(&u, &CMatrix::identity(3, 3)) < 1e-9);
        assert!(transition_imaginary_defect(&d, 0.7) < 1e-12);
    }

    #[test]
    fn spectral_relations() {
        let k2 = SpectralDecomposition::of(&Graph::complete(2)).unwrap();
        assert_eq!(
            k2.vertex_spectral_relation(0, 1, 1e-9).unwrap(),
            SpectralRelation::StronglyCospectral { signs: vec![1, -1] }
        );
        let p3 = SpectralDecomposition::of(&Graph::path(3)).unwrap();
        assert_eq!(
            p3.vertex_spectral_relation(0, 2, 1e-9).unwrap(),
            SpectralRelation::StronglyCospectral {
                signs: vec![1, -1, 1]
            }
        );
        assert_eq!(
            p3.vertex_spectral_relation(0, 1, 1e-9).unwrap(),
            SpectralRelation::Unrelated
        );
        assert!(close(p3.column(1, 0).norm(), FRAC_1_SQRT_2, 1e-14));
        assert!(p3.vertex_spectral_relation(0, 0, 1e-9).is_err());
    }

    #[test]
    fn cospectral_but_not_strongly() {
        // In K_{1,3} two leaves share the 0-eigenspace without E_0 e_a = +-E_0 e_b.
        let d = SpectralDecomposition::of(&Graph::star(3)).unwrap();
        assert_eq!(
            d.vertex_spectral_relation(1, 2, 1e-9).unwrap(),
            SpectralRelation::Cospectral
        );
    }

    #[test]
    fn interlacing() {
        let a = Graph::path(3).hamiltonian();
        assert!(interlacing_check(&a, &[0, 2], 1e-9).unwrap());
        let h = OrientedGraph::cyclic(3).hamiltonian();
        for pair in [[0, 1], [0, 2], [1, 2]] {
            assert!(interlacing_check(&h, &pair, 1e-9).unwrap());
        }
        assert!(interlacing_check(&a, &[0, 1, 2], 1e-9).is_err());
        assert!(interlacing_check(&a, &[], 1e-9).is_err());
    }
}
