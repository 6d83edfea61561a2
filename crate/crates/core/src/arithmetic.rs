//! Exact-certificate layer: rational approximation, the ratio condition on an
//! eigenvalue support, square-free `Delta` extraction and period formulas.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::{Integer, Roots};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use crate::state::EigenvalueSupport;

pub const DEFAULT_MAX_DEN: u64 = 1_000_000;
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;
pub const DEFAULT_CERT_TOL: f64 = 1e-7;

/// `p / q` in lowest terms with `|x - p/q| = residual`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RationalApprox {
    pub p: i64,
    pub q: u64,
    pub residual: f64,
}

impl RationalApprox {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// First continued-fraction convergent `p/q` of `x` with `q <= max_den` whose
/// integer relation `|q x - p|` is at most `tol`.
///
/// Testing `q |x - p/q|` rather than `|x - p/q|` is what lets the test reject
/// irrationals: every real has convergents with `|x - p/q| < 1/q^2`, so a bare
/// residual test accepts any `x` once `q` reaches about `tol^(-1/2)`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<RationalApprox> {
    if !x.is_finite() || max_den == 0 {
        return None;
    }
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    loop {
        let residual = (x - h as f64 / k as f64).abs();
        if k as f64 * residual <= tol {
            let p = i64::try_from(h).ok()?;
            return Some(RationalApprox {
                p,
                q: k as u64,
                residual,
            });
        }
        if frac == 0.0 {
            return None;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i128;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_den as i128 {
            return None;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
    }
}

/// Writes `k = a^2 b` with `b` square-free.
///
/// Trial division only runs up to the cube root of the remaining cofactor;
/// what is left then has at most two prime factors, so it is either a perfect
/// square or square-free.
pub fn squarefree_part(k: u64) -> (u64, u64) {
    assert!(k >= 1, "squarefree_part requires k >= 1");
    let mut rest = k;
    let (mut a, mut b) = (1u64, 1u64);
    let mut p = 2u64;
    while (p as u128).pow(3) <= rest as u128 {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            a *= p.pow(e / 2);
            if e % 2 == 1 {
                b *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let s = rest.sqrt();
    if s > 1 && s * s == rest {
        a *= s;
    } else {
        b *= rest;
    }
    (a, b)
}

/// Every off-diagonal support difference is `m_rs * sqrt(delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioCertificate {
    pub delta: u64,
    /// `m_rs` for `r < s`; `theta_r - theta_s = m_rs sqrt(delta)`.
    pub multipliers: BTreeMap<(usize, usize), i64>,
    pub residual: f64,
    /// gcd of the `|m_rs|`.
    pub g: u64,
}

impl RatioCertificate {
    /// Antisymmetric multiplier lookup.
    pub fn multiplier(&self, r: usize, s: usize) -> Option<i64> {
        if r < s {
            self.multipliers.get(&(r, s)).copied()
        } else {
            self.multipliers.get(&(s, r)).map(|m| -m)
        }
    }

    /// `max |(theta_r - theta_s) - m_rs sqrt(delta)|` recomputed against `theta`.
    pub fn check(&self, theta: &[f64]) -> f64 {
        let root = (self.delta as f64).sqrt();
        self.multipliers
            .iter()
            .map(|(&(r, s), &m)| ((theta[r] - theta[s]) - m as f64 * root).abs())
            .fold(0.0, f64::max)
    }

    /// Fundamental angular frequency `g sqrt(delta)`.
    pub fn frequency(&self) -> f64 {
        self.g as f64 * (self.delta as f64).sqrt()
    }
}

impl Serialize for RatioCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("RatioCertificate", 4)?;
        st.serialize_field("delta", &self.delta)?;
        let triples: Vec<(usize, usize, i64)> = self
            .multipliers
            .iter()
            .map(|(&(r, s), &m)| (r, s, m))
            .collect();
        st.serialize_field("multipliers", &triples)?;
        st.serialize_field("g", &self.g)?;
        st.serialize_field("residual", &self.residual)?;
        st.end()
    }
}

/// Two support differences whose ratio has no acceptable rational approximation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioWitness {
    pub pair: (usize, usize),
    pub reference: (usize, usize),
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RatioOutcome {
    /// No off-diagonal pairs: nothing to check.
    Stationary,
    Certified {
        certificate: RatioCertificate,
    },
    Failed {
        witness: RatioWitness,
        reason: String,
    },
    /// Ratios look rational but no square-free certificate could be confirmed.
    /// `frequency` is the common angular frequency implied by the rational
    /// ratios, when one exists.
    Inconclusive {
        reason: String,
        frequency: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct RatioParams {
    pub max_den: u64,
    pub tol: f64,
    pub cert_tol: f64,
}

impl Default for RatioParams {
    fn default() -> Self {
        RatioParams {
            max_den: DEFAULT_MAX_DEN,
            tol: DEFAULT_RATIONAL_TOL,
            cert_tol: DEFAULT_CERT_TOL,
        }
    }
}

/// Decides whether all ratios of off-diagonal support differences are
/// rational and, if so, certifies them as integer multiples of one `sqrt(delta)`.
pub fn ratio_condition(
    support: &EigenvalueSupport,
    theta: &[f64],
    params: &RatioParams,
) -> RatioOutcome {
    let pairs: Vec<(usize, usize)> = support.upper_pairs().collect();
    if pairs.is_empty() {
        return RatioOutcome::Stationary;
    }
    let diff = |(r, s): (usize, usize)| theta[r] - theta[s];

    // Compare everything against the smallest gap.
    let reference = *pairs
        .iter()
        .min_by(|a, b| diff(**a).total_cmp(&diff(**b)))
        .unwrap();
    let d_ref = diff(reference);
    let mut fractions = Vec::with_capacity(pairs.len());
    for &pair in &pairs {
        let ratio = diff(pair) / d_ref;
        match rational_approx(ratio, params.max_den, params.tol) {
            Some(f) => fractions.push(f),
            None => {
                return RatioOutcome::Failed {
                    witness: RatioWitness {
                        pair,
                        reference,
                        ratio,
                    },
                    reason: "ratio of eigenvalue differences is not rational".into(),
                }
            }
        }
    }
    let frequency = common_frequency(d_ref, &fractions);

    let mut squares = Vec::with_capacity(pairs.len());
    for &pair in &pairs {
        let sq = diff(pair).powi(2);
        let k = sq.round();
        if k < 1.0 || (sq - k).abs() > params.cert_tol * sq.max(1.0) {
            return RatioOutcome::Inconclusive {
                reason: format!(
                    "squared difference {sq:.12} for pair {pair:?} is not an integer; no square-free certificate"
                ),
                frequency,
            };
        }
        squares.push(k as u64);
    }
    let delta = squarefree_part(squares[0]).1;
    for (i, &k) in squares.iter().enumerate() {
        let b = squarefree_part(k).1;
        if b != delta {
            return RatioOutcome::Failed {
                witness: RatioWitness {
                    pair: pairs[i],
                    reference: pairs[0],
                    ratio: diff(pairs[i]) / diff(pairs[0]),
                },
                reason: format!(
                    "squared differences {k} and {} have distinct square-free parts {b} and {delta}",
                    squares[0]
                ),
            };
        }
    }

    let root = (delta as f64).sqrt();
    let mut multipliers = BTreeMap::new();
    let mut residual = 0.0f64;
    let mut g = 0u64;
    for &pair in &pairs {
        let m = (diff(pair) / root).round() as i64;
        residual = residual.max((diff(pair) - m as f64 * root).abs());
        g = g.gcd(&m.unsigned_abs());
        multipliers.insert(pair, m);
    }
    if residual > params.cert_tol {
        let band = if residual <= 10.0 * params.cert_tol {
            "near miss"
        } else {
            "inconsistent certificate"
        };
        return RatioOutcome::Inconclusive {
            reason: format!(
                "{band}: residual {residual:.3e} exceeds {:.3e}",
                params.cert_tol
            ),
            frequency,
        };
    }
    RatioOutcome::Certified {
        certificate: RatioCertificate {
            delta,
            multipliers,
            residual,
            g,
        },
    }
}

/// `omega` with every difference an integer multiple of it, given the
/// rational ratios `d_i / d_ref = p_i / q_i`.
fn common_frequency(d_ref: f64, fractions: &[RationalApprox]) -> Option<f64> {
    let lcm = fractions
        .iter()
        .try_fold(1u64, |acc, f| acc.checked_mul(f.q / acc.gcd(&f.q)))?;
    let g = fractions
        .iter()
        .map(|f| (f.p.unsigned_abs()).checked_mul(lcm / f.q))
        .try_fold(0u64, |acc, n| n.map(|n| acc.gcd(&n)))?;
    (g > 0).then(|| d_ref * g as f64 / lcm as f64)
}

/// Minimum period `2 pi / (sqrt(delta) g)`.
pub fn minimum_period(cert: &RatioCertificate) -> Result<f64> {
    if cert.multipliers.is_empty() || cert.g == 0 {
        return Err(Error::InvalidArgument(
            "empty off-diagonal support: the state is stationary".into(),
        ));
    }
    Ok(2.0 * PI / cert.frequency())
}

/// `pi / (theta_1 - theta_m)`, the earliest possible transfer time between
/// trace-orthogonal states.
pub fn pst_time_lower_bound(d: &SpectralDecomposition) -> Result<f64> {
    let theta = d.theta();
    if theta.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two distinct eigenvalues".into(),
        ));
    }
    Ok(PI / (theta[0] - theta[theta.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn rational_approx_basics() {
        let half = rational_approx(0.5, DEFAULT_MAX_DEN, 1e-9).unwrap();
        assert_eq!((half.p, half.q, half.residual), (1, 2, 0.0));
        let two = rational_approx(2.0, DEFAULT_MAX_DEN, 1e-9).unwrap();
        assert_eq!((two.p, two.q), (2, 1));
        let neg = rational_approx(-2.0 / 3.0, DEFAULT_MAX_DEN, 1e-9).unwrap();
        assert_eq!((neg.p, neg.q), (-2, 3));
        assert!(rational_approx(f64::NAN, 10, 1e-9).is_none());
    }

    #[test]
    fn sqrt2_is_rejected() {
        // Convergents of sqrt(2) up to q = 1e6, computed independently by the
        // Pell recurrence p' = p + 2q, q' = p + q: the integer relation
        // |q sqrt(2) - p| never drops below 1e-9.
        let (mut p, mut q) = (1u64, 1u64);
        while q <= DEFAULT_MAX_DEN {
            assert!((q as f64 * SQRT_2 - p as f64).abs() > 1e-9);
            (p, q) = (p + 2 * q, p + q);
        }
        assert!(rational_approx(SQRT_2, DEFAULT_MAX_DEN, 1e-9).is_none());
    }

    #[test]
    fn noisy_rational_is_recovered() {
        let f = rational_approx(3.0 / 7.0 + 1e-13, DEFAULT_MAX_DEN, 1e-9).unwrap();
        assert_eq!((f.p, f.q), (3, 7));
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(12), (2, 3));
        assert_eq!(squarefree_part(1), (1, 1));
        assert_eq!(squarefree_part(18), (3, 2));
        assert_eq!(squarefree_part(49), (7, 1));
        assert_eq!(squarefree_part(2 * 1_000_003 * 1_000_003), (1_000_003, 2));
        assert_eq!(
            squarefree_part(999_983 * 1_000_003),
            (1, 999_983 * 1_000_003)
        );
    }

    #[test]
    fn common_frequency_of_rationals() {
        let f = |p, q| RationalApprox {
            p,
            q,
            residual: 0.0,
        };
        let w = common_frequency(2.0, &[f(1, 1), f(3, 2), f(2, 1)]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn period_formula() {
        let cert = RatioCertificate {
            delta: 3,
            multipliers: BTreeMap::from([((0, 2), 2)]),
            residual: 0.0,
            g: 2,
        };
        assert!((minimum_period(&cert).unwrap() - PI / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(cert.multiplier(2, 0), Some(-2));
        let empty = RatioCertificate {
            delta: 1,
            multipliers: BTreeMap::new(),
            residual: 0.0,
            g: 0,
        };
        assert!(minimum_period(&empty).is_err());
    }
}
