//! Confining potential machinery: the normalizer of `exp(-2 eta |x|^l /
//! sigma^2)`, the effective potential obtained by integrating a confined
//! configuration over common translations, and the translation-infimum moment
//! functional.

use crate::error::{Error, Result};
use crate::measures::{CenteredConfiguration, EmpiricalMeasure};
use crate::numerics::{golden_min, integrate, integrate_rel};
use serde::{Deserialize, Serialize};

/// Parameters of the confining potential `eta |x|^l` at temperature
/// `sigma_sq`, acting in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfiningSpec {
    pub eta: f64,
    pub ell: f64,
    pub d: usize,
    pub sigma_sq: f64,
}

impl ConfiningSpec {
    pub fn new(eta: f64, ell: f64, d: usize, sigma_sq: f64) -> Result<Self> {
        if eta <= 0.0 {
            return Err(Error::InvalidArgument("eta must be positive".into()));
        }
        if ell < 1.0 {
            return Err(Error::InvalidOrder(ell));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if sigma_sq <= 0.0 {
            return Err(Error::InvalidArgument("sigma_sq must be positive".into()));
        }
        Ok(Self {
            eta,
            ell,
            d,
            sigma_sq,
        })
    }
}

/// Normalizer `z = integral of exp(-2 eta |x|^l / sigma^2) dx`.
///
/// Closed forms for `l = 1, d = 1` and `l = 2` (any `d`); otherwise adaptive
/// quadrature in `d = 1` with an analytically truncated tail.
pub fn z_eta(s: &ConfiningSpec) -> Result<f64> {
    let c = 2.0 * s.eta / s.sigma_sq;
    if s.ell == 2.0 {
        // Product of d Gaussian integrals.
        return Ok((std::f64::consts::PI / c).powf(s.d as f64 / 2.0));
    }
    if s.d != 1 {
        return Err(Error::NotImplemented(
            "z_eta in d > 1 only for quadratic confinement".into(),
        ));
    }
    if s.ell == 1.0 {
        return Ok(2.0 / c); // sigma^2 / eta
    }
    // Tail beyond R contributes < exp(-c R^l), pushed below 1e-14 of the
    // peak (which is 1 at the origin).
    let r = (40.0 / c).powf(1.0 / s.ell).max(1.0);
    let f = |x: f64| (-c * x.abs().powf(s.ell)).exp();
    let half = integrate_rel(&f, 0.0, r, 1e-12)?;
    Ok(2.0 * half)
}

/// Effective confining potential of a centered configuration: the log of the
/// Gibbs weight left after integrating the confinement over all common
/// translations of the configuration.
///
/// Quadratic confinement has a closed form (the cross terms vanish by
/// centering); `l = 1, d = 1` integrates the piecewise-exponential integrand
/// exactly over the sorted-breakpoint partition; other orders in `d = 1` use
/// adaptive quadrature.
pub fn hat_v(c: &CenteredConfiguration, s: &ConfiningSpec) -> Result<f64> {
    if c.dim() != s.d {
        return Err(Error::DimensionMismatch {
            expected: s.d,
            got: c.dim(),
        });
    }
    let n = c.len() as f64;
    if s.ell == 2.0 {
        let sum_sq: f64 = c.coords().iter().map(|x| x * x).sum();
        let log_gauss = (std::f64::consts::PI * s.sigma_sq / (2.0 * s.eta * n)).ln();
        return Ok(s.eta / n * sum_sq - s.sigma_sq / (4.0 * n) * s.d as f64 * log_gauss);
    }
    if s.d != 1 {
        return Err(Error::NotImplemented(
            "effective potential in d > 1 only for quadratic confinement".into(),
        ));
    }
    if s.ell == 1.0 {
        return Ok(hat_v_piecewise_exponential(c, s));
    }
    hat_v_quadrature(c, s)
}

/// Exact `l = 1` route: between consecutive breakpoints the exponent is
/// affine in the shift, so every segment integrates in closed form.
fn hat_v_piecewise_exponential(c: &CenteredConfiguration, s: &ConfiningSpec) -> f64 {
    let n = c.len();
    let nf = n as f64;
    let cc = 2.0 * s.eta / s.sigma_sq;
    // Breakpoints of sum_i |x_i + z| as a function of z, ascending.
    let mut v: Vec<f64> = c.coords().iter().map(|x| -x).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // On (v_k, v_{k+1}): sum |x_i + z| = a_k + m_k z with m_k = 2k - n and
    // a_k = -2 * prefix_sum(v, k); the total sum of v vanishes by centering.
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + v[k];
    }
    let seg = |k: usize, z: f64| -> f64 {
        let m = 2.0 * k as f64 - nf;
        -2.0 * prefix[k] + m * z
    };
    // Minimum of the piecewise-affine exponent (attained at a median
    // breakpoint); factored out to avoid total underflow.
    let g_min = seg(n / 2, v[(n - 1) / 2]).min(seg(n / 2, v[(n / 2).min(n - 1)]));

    let mut total = 0.0;
    // Left tail: slope -n, intercept 0.
    total += (-cc * (-nf * v[0] - g_min)).exp() / (cc * nf);
    // Right tail: slope n, intercept 0.
    total += (-cc * (nf * v[n - 1] - g_min)).exp() / (cc * nf);
    for k in 1..n {
        let (lo, hi) = (v[k - 1], v[k]);
        if hi <= lo {
            continue;
        }
        let m = 2.0 * k as f64 - nf;
        let a = -2.0 * prefix[k] - g_min;
        if m == 0.0 {
            total += (-cc * a).exp() * (hi - lo);
        } else {
            total += ((-cc * (a + m * lo)).exp() - (-cc * (a + m * hi)).exp()) / (cc * m);
        }
    }
    -s.sigma_sq / (2.0 * nf) * (total.ln() - cc * g_min)
}

/// Generic quadrature route in `d = 1` (any order l >= 1); also the
/// cross-check for the quadratic closed form.
pub fn hat_v_quadrature(c: &CenteredConfiguration, s: &ConfiningSpec) -> Result<f64> {
    if c.dim() != 1 || s.d != 1 {
        return Err(Error::UnsupportedDimension(c.dim().max(s.d)));
    }
    let n = c.len() as f64;
    let cc = 2.0 * s.eta / s.sigma_sq;
    let xs = c.coords();
    let exponent = |z: f64| -> f64 { cc * xs.iter().map(|x| (x + z).abs().powf(s.ell)).sum::<f64>() };
    // The exponent is convex in the shift; locate its minimum.
    let lo = -xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let hi = -xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let (z_star, h_min) = golden_min(&exponent, lo - 1.0, hi + 1.0, 1e-12);
    // Expand outward until the exponent rises 60 above its minimum; the
    // neglected tail is then below 1e-14 of the peak contribution.
    let mut r = 1.0;
    while exponent(z_star + r) - h_min < 60.0 || exponent(z_star - r) - h_min < 60.0 {
        r *= 2.0;
        if r > 1e12 {
            return Err(Error::QuadratureFailure(
                "effective-potential integrand does not decay".into(),
            ));
        }
    }
    let f = |z: f64| (-(exponent(z) - h_min)).exp();
    let scaled = integrate(&f, z_star - r, z_star + r, 1e-13 * r.max(1.0))?;
    if scaled <= 0.0 {
        return Err(Error::QuadratureFailure(
            "effective-potential integral vanished".into(),
        ));
    }
    Ok(-s.sigma_sq / (2.0 * n) * (scaled.ln() - h_min))
}

/// Two-sided bracket of Lemma-type bounds for the effective potential:
/// `(lower, upper)` for the given centered configuration.
pub fn hat_v_bracket(c: &CenteredConfiguration, s: &ConfiningSpec) -> Result<(f64, f64)> {
    let n = c.len() as f64;
    let d = s.d as f64;
    let z = z_eta(s)?;
    let lower = s.sigma_sq / (2.0 * n) * (n.powf(d / s.ell) / z).ln();
    let pow = (2.0f64).powf(s.ell - 1.0);
    let sum_l: f64 = if s.d == 1 {
        c.coords().iter().map(|x| x.abs().powf(s.ell)).sum()
    } else {
        (0..c.len())
            .map(|i| {
                c.point(i)
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
                    .powf(s.ell)
            })
            .sum()
    };
    let upper =
        pow * s.eta / n * sum_l + s.sigma_sq / (2.0 * n) * ((pow * n).powf(d / s.ell) / z).ln();
    Ok((lower, upper))
}

/// Smallest l-th absolute moment over all translations:
/// `inf_y (1/n) sum |x_i + y|^l`.
///
/// Closed solutions for `l = 2` (center at the mean) and `l = 1` (lower
/// median); convex golden-section search otherwise. Translation invariant.
pub fn vartheta(m: &EmpiricalMeasure, l: f64) -> Result<f64> {
    if m.dim() != 1 {
        return Err(Error::UnsupportedDimension(m.dim()));
    }
    if l < 1.0 {
        return Err(Error::InvalidOrder(l));
    }
    let xs = m.atoms();
    let n = xs.len() as f64;
    if l == 2.0 {
        let mean = xs.iter().sum::<f64>() / n;
        return Ok(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n);
    }
    if l == 1.0 {
        let mut sorted = xs.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = sorted[(sorted.len() - 1) / 2];
        return Ok(xs.iter().map(|x| (x - med).abs()).sum::<f64>() / n);
    }
    let f = |y: f64| xs.iter().map(|x| (x + y).abs().powf(l)).sum::<f64>() / n;
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let (_, value) = golden_min(&f, -max - 1.0, -min + 1.0, 1e-10);
    Ok(value)
}
