//! Brute-force verification path. Everything here goes through a dense Padé
//! matrix exponential and never touches the spectral decomposition, so its
//! answers can be used to check the spectral machinery.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, frobenius_distance, imag_norm, CMatrix, CVector, I};

/// Inputs with a larger 1-norm are rejected.
pub const MAX_EXPM_NORM: f64 = 1e4;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_WINDOW: (f64, f64) = (0.0, 20.0);
/// Golden-section refinement stops once the bracket is this narrow.
pub const TIME_RESOLUTION: f64 = 1e-12;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(m: &CMatrix, x: f64) -> CMatrix {
    m * Complex64::from(x)
}

/// Matrix exponential by the [13/13] Padé approximant with scaling and squaring.
pub fn dense_expm(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let norm = one_norm(m);
    if norm > MAX_EXPM_NORM {
        return Err(Error::Numerical(format!(
            "matrix norm {norm:.3e} exceeds {MAX_EXPM_NORM:.0e}"
        )));
    }
    let id = CMatrix::identity(n, n);
    if norm == 0.0 {
        return Ok(id);
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = scaled(m, 0.5f64.powi(squarings));
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]))
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]);
    let u = &a * u_inner;
    let v = &a6 * (scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]))
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    let lu = (&v - &u).lu();
    let mut r = lu
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// `exp(i t H)`.
pub fn walk_unitary(h: &CMatrix, t: f64) -> Result<CMatrix> {
    dense_expm(&(h * (I * t)))
}

/// `U(t) P U(t)*` through the dense exponential.
pub fn evolve_dense(p: &CMatrix, h: &CMatrix, t: f64) -> Result<CMatrix> {
    let u = walk_unitary(h, t)?;
    Ok(&u * p * u.adjoint())
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub grid_step: f64,
    /// Refined interior local minima below the recording threshold, by time.
    pub minima: Vec<(f64, f64)>,
    /// Smallest value seen anywhere on the window, and where.
    pub floor: f64,
    pub floor_time: f64,
}

impl ScanResult {
    pub fn first_minimum(&self) -> Option<(f64, f64)> {
        self.minima.first().copied()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScanSpec {
    pub window: (f64, f64),
    pub step: f64,
    /// Refined minima at or below this value are recorded.
    pub threshold: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            window: DEFAULT_WINDOW,
            step: DEFAULT_STEP,
            threshold: 1e-7,
        }
    }
}

/// `||P(t) - P||`.
pub fn scan_return(p: &CMatrix, h: &CMatrix, spec: &ScanSpec) -> Result<ScanResult> {
    scan_transfer(p, p, h, spec)
}

/// `||P(t) - Q||`.
pub fn scan_transfer(p: &CMatrix, q: &CMatrix, h: &CMatrix, spec: &ScanSpec) -> Result<ScanResult> {
    let slope = 2.0 * one_norm(h) * frobenius(p).max(1.0);
    scan_unitary(h, spec, slope, |u| {
        frobenius_distance(&(u * p * u.adjoint()), q)
    })
}

/// `||Im P(t)||`: zero exactly when the evolved state is real.
pub fn scan_realness(p: &CMatrix, h: &CMatrix, spec: &ScanSpec) -> Result<ScanResult> {
    let slope = 2.0 * one_norm(h) * frobenius(p).max(1.0);
    scan_unitary(h, spec, slope, |u| imag_norm(&(u * p * u.adjoint())))
}

/// `max_j | |U(t)_{ja}|^2 - 1/n |`.
pub fn scan_flatness(h: &CMatrix, a: usize, spec: &ScanSpec) -> Result<ScanResult> {
    let n = h.nrows();
    if a >= n {
        return Err(Error::VertexOutOfRange { vertex: a, n });
    }
    let slope = 2.0 * one_norm(h);
    scan_unitary(h, spec, slope, |u| column_flatness(u, a))
}

/// Flatness defect of every column at once.
pub fn scan_uniform_flatness(h: &CMatrix, spec: &ScanSpec) -> Result<ScanResult> {
    let slope = 2.0 * one_norm(h);
    scan_unitary(h, spec, slope, |u| {
        (0..u.ncols())
            .map(|a| column_flatness(u, a))
            .fold(0.0, f64::max)
    })
}

fn column_flatness(u: &CMatrix, a: usize) -> f64 {
    let target = 1.0 / u.nrows() as f64;
    u.column(a)
        .iter()
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max)
}

/// Steps between re-anchoring the propagated grid unitary on a fresh exponential.
const REANCHOR: usize = 128;

/// Grid scan of `objective(exp(i t H))` followed by golden-section refinement
/// of every grid local minimum that could hide a value below the threshold.
/// `slope` bounds the objective's rate of change in `t`.
fn scan_unitary<F>(h: &CMatrix, spec: &ScanSpec, slope: f64, objective: F) -> Result<ScanResult>
where
    F: Fn(&CMatrix) -> f64,
{
    let (start, end) = spec.window;
    if !(spec.step > 0.0) || !(end >= start) {
        return Err(Error::InvalidArgument(format!(
            "bad scan window {:?} / step {}",
            spec.window, spec.step
        )));
    }
    let count = ((end - start) / spec.step).floor() as usize + 1;
    let step_u = walk_unitary(h, spec.step)?;
    let mut times = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    let mut u = walk_unitary(h, start)?;
    for k in 0..count {
        let t = start + k as f64 * spec.step;
        if k > 0 {
            u = if k % REANCHOR == 0 {
                walk_unitary(h, t)?
            } else {
                &u * &step_u
            };
        }
        times.push(t);
        values.push(objective(&u));
    }

    let eval = |t: f64| -> Result<f64> { Ok(objective(&walk_unitary(h, t)?)) };
    let (mut floor, mut floor_time) = (f64::INFINITY, start);
    for (&t, &v) in times.iter().zip(&values) {
        if v < floor {
            floor = v;
            floor_time = t;
        }
    }

    let screen = spec.threshold + slope * spec.step;
    let mut minima = Vec::new();
    for k in 1..count.saturating_sub(1) {
        let v = values[k];
        if v > screen || v > values[k - 1] || v > values[k + 1] {
            continue;
        }
        // Plateaus: only refine the first grid point of a run of equal values.
        if v == values[k - 1] {
            continue;
        }
        let (t, fv) = golden_section(&eval, times[k - 1], times[k + 1])?;
        if fv < floor {
            floor = fv;
            floor_time = t;
        }
        if fv <= spec.threshold {
            minima.push((t, fv));
        }
    }
    Ok(ScanResult {
        grid_step: spec.step,
        minima,
        floor,
        floor_time,
    })
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section<F>(f: &F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > TIME_RESOLUTION {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// `U(t) e_a` through the dense exponential.
pub fn walk_column(h: &CMatrix, a: usize, t: f64) -> Result<CVector> {
    Ok(walk_unitary(h, t)?.column(a).into_owned())
}
