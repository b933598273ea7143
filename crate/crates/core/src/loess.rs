//! Locally weighted polynomial regression over index positions.
//!
//! This is the smoother underneath the STL decomposition: at every output
//! position the `window` nearest points (by index distance) are fit with a
//! degree-0 or degree-1 polynomial under tricube kernel weights, optionally
//! multiplied by caller-supplied robustness weights, and the fit is
//! evaluated at that position.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Tricube kernel: `(1 - u^3)^3` for `u < 1`, else `0`.
#[inline]
fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

/// Smooth `y` with locally weighted regression of the given degree (0 or 1).
///
/// The neighborhood of output position `t` is the `window` nearest indices,
/// which at the boundaries slides inside the series so the fit always sees
/// `min(window, len)` points. When a neighborhood ends up with zero total
/// weight the fit falls back to an unweighted one over the same points.
pub fn loess_smooth(
    y: &[f64],
    window: usize,
    degree: usize,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::EmptySequence("loess_smooth"));
    }
    if window < 3 || window % 2 == 0 {
        return Err(Error::BadWindow(alloc::format!(
            "loess window must be odd and >= 3, got {window}"
        )));
    }
    if degree > 1 {
        return Err(Error::BadConfig(alloc::format!(
            "loess degree must be 0 or 1, got {degree}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("loess_smooth input"));
    }
    if let Some(w) = weights {
        if w.len() != y.len() {
            return Err(Error::BadWeights(alloc::format!(
                "weights length {} does not match series length {}",
                w.len(),
                y.len()
            )));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::BadWeights(
                "weights must be finite and non-negative".into(),
            ));
        }
    }

    let n = y.len();
    let q = window.min(n);
    let mut out = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(q);

    for t in 0..n {
        // Contiguous block of the q nearest indices, slid inside at edges.
        let half = (q - 1) / 2;
        let lo = if t < half {
            0
        } else if t + (q - half) > n {
            n - q
        } else {
            t - half
        };
        let d_max = ((t - lo).max(lo + q - 1 - t)) as f64;

        if d_max == 0.0 {
            out.push(y[t]);
            continue;
        }

        local.clear();
        let mut total = 0.0;
        for i in lo..lo + q {
            let dist = i.abs_diff(t) as f64;
            let mut w = tricube(dist / d_max);
            if let Some(rw) = weights {
                w *= rw[i];
            }
            total += w;
            local.push(w);
        }
        if total <= 0.0 {
            for w in local.iter_mut() {
                *w = 1.0;
            }
        }

        out.push(fit_at(y, lo, t as f64, &local, degree));
    }
    Ok(out)
}

/// Weighted polynomial fit over `y[lo..lo + w.len()]`, evaluated at
/// position `x0` (not necessarily an integer or inside the data range).
fn fit_at(y: &[f64], lo: usize, x0: f64, w: &[f64], degree: usize) -> f64 {
    let mut sw = 0.0;
    let mut sy = 0.0;
    for (k, wi) in w.iter().enumerate() {
        sw += wi;
        sy += wi * y[lo + k];
    }
    if degree == 0 {
        return sy / sw;
    }

    let mut sx = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (k, wi) in w.iter().enumerate() {
        let dx = (lo + k) as f64 - x0;
        sx += wi * dx;
        sxx += wi * dx * dx;
        sxy += wi * dx * y[lo + k];
    }
    let denom = sw * sxx - sx * sx;
    // All effective weight on a single position makes the line fit
    // degenerate; the weighted mean is the fit in that case.
    if denom <= f64::EPSILON * sw * sxx {
        return sy / sw;
    }
    (sxx * sy - sx * sxy) / denom
}

/// Locally weighted fit evaluated at an arbitrary position `x0`, used to
/// extend cycle-subseries one step beyond each end.
///
/// The neighborhood is the `window` indices nearest to `x0`; the tricube
/// scale is the distance to the farthest of them.
pub(crate) fn loess_fit_at(
    y: &[f64],
    window: usize,
    degree: usize,
    weights: Option<&[f64]>,
    x0: f64,
) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptySequence("loess_fit_at"));
    }
    let n = y.len();
    let q = window.min(n);
    let ideal = x0 - (q - 1) as f64 / 2.0;
    let lo = if ideal <= 0.0 {
        0
    } else if ideal as usize + q > n {
        n - q
    } else {
        // Round to the nearest start so the block is centered on x0.
        (ideal + 0.5) as usize
    };
    let mut d_max = 0.0f64;
    for i in lo..lo + q {
        d_max = d_max.max(math::abs(i as f64 - x0));
    }
    if d_max == 0.0 {
        return Ok(y[lo]);
    }
    let mut local = Vec::with_capacity(q);
    let mut total = 0.0;
    for i in lo..lo + q {
        let mut w = tricube(math::abs(i as f64 - x0) / d_max);
        if let Some(rw) = weights {
            w *= rw[i];
        }
        total += w;
        local.push(w);
    }
    if total <= 0.0 {
        for w in local.iter_mut() {
            *w = 1.0;
        }
    }
    Ok(fit_at(y, lo, x0, &local, degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Independent oracle: per-point weighted least squares solved from the
    /// normal equations on (intercept, slope) without index centering.
    fn wls_oracle(y: &[f64], window: usize, degree: usize) -> Vec<f64> {
        let n = y.len();
        let q = window.min(n);
        let mut out = Vec::new();
        for t in 0..n {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by_key(|&i| (i.abs_diff(t), i));
            let mut neigh: Vec<usize> = idx.into_iter().take(q).collect();
            neigh.sort_unstable();
            let d_max = neigh.iter().map(|&i| i.abs_diff(t)).max().unwrap() as f64;
            if d_max == 0.0 {
                out.push(y[t]);
                continue;
            }
            let w: Vec<f64> = neigh
                .iter()
                .map(|&i| {
                    let u = i.abs_diff(t) as f64 / d_max;
                    if u >= 1.0 {
                        0.0
                    } else {
                        (1.0 - u.powi(3)).powi(3)
                    }
                })
                .collect();
            if degree == 0 {
                let sw: f64 = w.iter().sum();
                let sy: f64 = neigh.iter().zip(&w).map(|(&i, wi)| wi * y[i]).sum();
                out.push(sy / sw);
                continue;
            }
            // Solve [sw sx; sx sxx] [a; b] = [sy; sxy] for uncentered x = i.
            let sw: f64 = w.iter().sum();
            let sx: f64 = neigh.iter().zip(&w).map(|(&i, wi)| wi * i as f64).sum();
            let sxx: f64 = neigh
                .iter()
                .zip(&w)
                .map(|(&i, wi)| wi * (i as f64) * (i as f64))
                .sum();
            let sy: f64 = neigh.iter().zip(&w).map(|(&i, wi)| wi * y[i]).sum();
            let sxy: f64 = neigh
                .iter()
                .zip(&w)
                .map(|(&i, wi)| wi * (i as f64) * y[i])
                .sum();
            let det = sw * sxx - sx * sx;
            if det <= f64::EPSILON * sw * sxx {
                // Same degenerate-fit rule as the implementation: all
                // effective weight on one position means the fit is the
                // weighted mean.
                out.push(sy / sw);
                continue;
            }
            let a = (sy * sxx - sx * sxy) / det;
            let b = (sw * sxy - sx * sy) / det;
            out.push(a + b * t as f64);
        }
        out
    }

    #[test]
    fn constant_series_reproduced() {
        let y = [3.25; 11];
        for window in [3, 5, 7, 11] {
            for degree in [0, 1] {
                let s = loess_smooth(&y, window, degree, None).unwrap();
                for v in s {
                    assert!((v - 3.25).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degree_one_reproduces_lines() {
        let y: Vec<f64> = (0..15).map(|i| -2.5 + 0.75 * i as f64).collect();
        for window in (3..=15).step_by(2) {
            let s = loess_smooth(&y, window, 1, None).unwrap();
            for (a, b) in s.iter().zip(&y) {
                assert!((a - b).abs() < 1e-9, "window {window}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn matches_independent_wls_oracle() {
        let mut rng = SplitMix64::new(2024);
        let y: Vec<f64> = (0..9).map(|_| rng.next_range(-5.0, 5.0)).collect();
        let got = loess_smooth(&y, 5, 1, None).unwrap();
        let want = wls_oracle(&y, 5, 1);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn oracle_agreement_random_suite() {
        let mut rng = SplitMix64::new(99);
        for case in 0..50 {
            let n = 4 + rng.next_index(20);
            let y: Vec<f64> = (0..n).map(|_| rng.next_range(-10.0, 10.0)).collect();
            let window = [3, 5, 7, 9][rng.next_index(4)];
            let degree = rng.next_index(2);
            let got = loess_smooth(&y, window, degree, None).unwrap();
            let want = wls_oracle(&y, window, degree);
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-9,
                    "case {case}: n={n} window={window} degree={degree}: {g} vs {w}"
                );
            }
        }
    }

    #[test]
    fn zero_weights_fall_back_to_unweighted() {
        let y = [1.0, 2.0, 4.0, 8.0, 16.0];
        let s = loess_smooth(&y, 5, 1, Some(&[0.0; 5])).unwrap();
        // Oracle: plain OLS over all five points, evaluated per index.
        let n = y.len() as f64;
        let sx: f64 = (0..5).map(|i| i as f64).sum();
        let sxx: f64 = (0..5).map(|i| (i * i) as f64).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = y.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        let det = n * sxx - sx * sx;
        let a = (sy * sxx - sx * sxy) / det;
        let b = (n * sxy - sx * sy) / det;
        for (t, v) in s.iter().enumerate() {
            let want = a + b * t as f64;
            assert!((v - want).abs() < 1e-9, "{v} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            loess_smooth(&[], 3, 1, None),
            Err(Error::EmptySequence(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, 2.0], 4, 1, None),
            Err(Error::BadWindow(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, 2.0], 1, 1, None),
            Err(Error::BadWindow(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, f64::NAN], 3, 1, None),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, 2.0], 3, 2, None),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, 2.0], 3, 1, Some(&[1.0])),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            loess_smooth(&[1.0, 2.0], 3, 1, Some(&[1.0, -1.0])),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn window_larger_than_series_is_clamped() {
        let y: Vec<f64> = (0..5).map(|i| 1.0 + 2.0 * i as f64).collect();
        let s = loess_smooth(&y, 11, 1, None).unwrap();
        for (a, b) in s.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
