//! One-dimensional minimisation over time windows.

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `resolution`.
pub fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, resolution: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > resolution {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Result of [`scan_minimize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanMinimum {
    /// Global best (time, value) found.
    pub best: (f64, f64),
    /// Earliest refined minimum at or below the acceptance level, if any.
    pub first_hit: Option<(f64, f64)>,
}

/// Samples `f` on a grid over `[start, end]`, then refines every grid local
/// minimum that could hide a value at or below `accept` given that `f`
/// changes by at most `slope` per unit time. The global grid minimum is
/// always refined as well.
pub fn scan_minimize<F>(
    f: F,
    (start, end): (f64, f64),
    step: f64,
    slope: f64,
    accept: f64,
    resolution: f64,
) -> ScanMinimum
where
    F: Fn(f64) -> f64,
{
    let count = ((end - start) / step).floor() as usize + 1;
    let times: Vec<f64> = (0..count).map(|k| start + k as f64 * step).collect();
    let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();

    let mut best = (times[0], values[0]);
    for (&t, &v) in times.iter().zip(&values) {
        if v < best.1 {
            best = (t, v);
        }
    }
    let grid_best = best.0;
    let screen = accept + slope * step;
    let mut first_hit = None;
    for k in 0..count {
        let v = values[k];
        let left = if k > 0 { values[k - 1] } else { f64::INFINITY };
        let right = values.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let is_local_min = v <= left && v <= right && v != left;
        if !(is_local_min && v <= screen) && times[k] != grid_best {
            continue;
        }
        let lo = times[k.saturating_sub(1)];
        let hi = times[(k + 1).min(count - 1)];
        let (t, fv) = if hi > lo {
            golden_section(&f, lo, hi, resolution)
        } else {
            (times[k], v)
        };
        if fv < best.1 {
            best = (t, fv);
        }
        if fv <= accept && first_hit.is_none() {
            first_hit = Some((t, fv));
        }
    }
    ScanMinimum { best, first_hit }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_vertex_of_v() {
        let (t, v) = golden_section(|t| (t - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((t - 0.3).abs() < 1e-11 && v < 1e-11);
    }

    #[test]
    fn scan_reports_earliest_zero() {
        let f = |t: f64| (t.sin()).abs();
        let r = scan_minimize(f, (0.5, 10.0), 1e-2, 1.0, 1e-9, 1e-13);
        let (t, v) = r.first_hit.unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-9 && v < 1e-9);
    }

    #[test]
    fn scan_without_zero_reports_floor() {
        let f = |t: f64| 1.0 + (t - 2.0).powi(2);
        let r = scan_minimize(f, (0.0, 5.0), 0.1, 10.0, 1e-9, 1e-12);
        assert!(r.first_hit.is_none());
        assert!((r.best.0 - 2.0).abs() < 1e-5 && (r.best.1 - 1.0).abs() < 1e-9);
    }
}
