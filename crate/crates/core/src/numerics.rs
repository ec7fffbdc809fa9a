//! Shared numerical routines: adaptive quadrature, 1D minimization and root
//! finding, high-order cumulative integration on uniform grids, and the small
//! statistical helpers used by the samplers and the estimation harness.

use crate::error::{Error, Result};

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Recursion splits an interval until the local Richardson error estimate is
/// below the interval's share of `tol` (absolute).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!(
            "non-finite bounds [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureFailure(format!(
            "non-finite integral on [{a}, {b}]"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if !err.is_finite() {
        // A poisoned integrand never converges; bubble the failure up
        // instead of recursing to full depth.
        return f64::NAN;
    }
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate to a relative tolerance: a first coarse pass estimates the scale,
/// a second pass resolves to `rel_tol` times that scale.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let coarse = integrate(f, a, b, 1e-6)?;
    let scale = coarse.abs().max(1e-300);
    integrate(f, a, b, rel_tol * scale)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f(x_min))` with `x_min` resolved to absolute tolerance
/// `xtol`.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
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
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Minimize over a bracket by iterated grid refinement, then polish with a
/// golden section on the final sub-bracket. Robust for objectives that are
/// only piecewise smooth (the quotient-metric shift searches).
pub fn grid_refine_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const POINTS: usize = 65;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    if hi - lo <= xtol {
        let xm = 0.5 * (lo + hi);
        return (xm, f(xm));
    }
    while hi - lo > xtol.max(1e-15) {
        let step = (hi - lo) / (POINTS - 1) as f64;
        let mut best = (lo, f(lo));
        for k in 1..POINTS {
            let x = lo + step * k as f64;
            let fx = f(x);
            if fx < best.1 {
                best = (x, fx);
            }
        }
        let new_lo = (best.0 - step).max(lo);
        let new_hi = (best.0 + step).min(hi);
        if new_hi - new_lo >= hi - lo {
            break;
        }
        lo = new_lo;
        hi = new_hi;
        if hi - lo <= 64.0 * xtol {
            break;
        }
    }
    let (xg, fg) = golden_min(f, lo, hi, xtol);
    // The golden polish assumes unimodality; keep whichever point is better.
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if fm < fg {
        (xm, fm)
    } else {
        (xg, fg)
    }
}

/// Bisection root finding for a continuous `f` with a sign change on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fourth-order cumulative integral of samples at uniformly spaced points.
///
/// `out[i]` approximates the integral from the first point to point `i`
/// (so `out[0] = 0`). Each increment integrates the cubic through the four
/// nearest samples. Requires at least 4 points.
pub fn cumulative_integral(values: &[f64], dx: f64) -> Vec<f64> {
    let m = values.len();
    assert!(m >= 4, "cumulative_integral needs at least 4 samples");
    let mut out = Vec::with_capacity(m);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..m - 1 {
        let inc = if i == 0 {
            (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3]) / 24.0
        } else if i == m - 2 {
            (values[m - 4] - 5.0 * values[m - 3] + 19.0 * values[m - 2] + 9.0 * values[m - 1])
                / 24.0
        } else {
            (-values[i - 1] + 13.0 * values[i] + 13.0 * values[i + 1] - values[i + 2]) / 24.0
        };
        acc += inc * dx;
        out.push(acc);
    }
    out
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Jackknife standard error of the sample mean of `xs`.
///
/// For the plain mean this coincides with s/sqrt(n); kept in the leave-one-out
/// form so the same helper extends to other statistics.
pub fn jackknife_se_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let total: f64 = xs.iter().sum();
    let full = total / n as f64;
    let mut ss = 0.0;
    for &x in xs {
        let loo = (total - x) / (n - 1) as f64;
        ss += (loo - full).powi(2);
    }
    (ss * (n - 1) as f64 / n as f64).sqrt()
}

/// Integrated autocorrelation time of a scalar series via Geyer's initial
/// positive sequence, and the corresponding effective sample size.
pub fn ess(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0: f64 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let autocov = |lag: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n - lag {
            s += (series[i] - mean) * (series[i + lag] - mean);
        }
        s / n as f64
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
        if lag > n / 2 {
            break;
        }
    }
    (n as f64 / tau).max(1.0)
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, total: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against the CDF `f`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], f: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = f(x);
        d = d.max(cdf - i as f64 / n).max((i + 1) as f64 / n - cdf);
    }
    d
}
