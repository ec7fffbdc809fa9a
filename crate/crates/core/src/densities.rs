//! Probability densities on a uniform 1D grid and the functional calculus on
//! them: Boltzmann entropy, relative entropy, interaction energies, free
//! energy, the stationary fixed point of the rank-based dynamics, direct
//! free-energy minimization for pairwise models, and the induced rate
//! functions.

use crate::error::{Error, Result};
use crate::models::{Model, MvModel, RbModel};
use crate::numerics::cumulative_integral;
use serde::{Deserialize, Serialize};

/// Uniform grid on `[a, b]` with `m` cells; values live at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidArgument(format!("bad domain [{a}, {b}]")));
        }
        if m < 16 {
            return Err(Error::InvalidArgument("grid needs at least 16 cells".into()));
        }
        Ok(Self { a, b, m })
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.m as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.center(i)).collect()
    }
}

/// The default grid for a given temperature: wide enough that the shipped
/// stationary densities (exponential tails with rate `2/sigma_sq`) fall below
/// 1e-16 at the boundary, at the reference resolution of 16000 cells.
pub fn default_grid(sigma_sq: f64) -> GridSpec {
    let half = 20.0 * sigma_sq;
    GridSpec::new(-half, half, 16_000).expect("valid by construction")
}

/// A probability density sampled at the cell centers of a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridDensity {
    /// Validates nonnegativity, finiteness and midpoint-rule normalization
    /// (within 1e-10).
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.m {
            return Err(Error::IncompatibleGrids(format!(
                "{} values on a {}-cell grid",
                values.len(),
                spec.m
            )));
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidArgument(
                "density values must be finite and nonnegative".into(),
            ));
        }
        let mass: f64 = values.iter().sum::<f64>() * spec.dx();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density mass {mass} deviates from 1 beyond tolerance"
            )));
        }
        Ok(Self { spec, values })
    }

    /// Evaluates `f` at the cell centers and normalizes on the grid.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..spec.m).map(|i| f(spec.center(i))).collect();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "density generator produced negative or non-finite values".into(),
            ));
        }
        let mass: f64 = values.iter().sum::<f64>() * spec.dx();
        if mass <= 0.0 {
            return Err(Error::InvalidArgument("density generator is zero".into()));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { spec, values })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }

    pub fn mean(&self) -> f64 {
        let dx = self.dx();
        (0..self.spec.m)
            .map(|i| self.spec.center(i) * self.values[i] * dx)
            .sum()
    }

    /// CDF at the cell centers: half-cell anchor plus a fourth-order
    /// cumulative integral.
    pub fn cdf(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut f = cumulative_integral(&self.values, dx);
        let anchor = self.values[0] * dx / 2.0;
        for (i, fi) in f.iter_mut().enumerate() {
            *fi = (*fi + anchor).clamp(0.0, 1.0);
            let _ = i;
        }
        f
    }

    /// Shifts the density by a whole number of cells (mass moved off-grid is
    /// dropped, then the result is renormalized).
    pub fn translate_cells(&self, k: i64) -> Result<Self> {
        let m = self.spec.m as i64;
        let mut values = vec![0.0; self.spec.m];
        for i in 0..m {
            let j = i + k;
            if (0..m).contains(&j) {
                values[j as usize] = self.values[i as usize];
            }
        }
        let mass: f64 = values.iter().sum::<f64>() * self.dx();
        if mass <= 0.0 {
            return Err(Error::InvalidArgument("translation emptied the grid".into()));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        GridDensity::new(self.spec, values)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::IncompatibleGrids(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }
}

/// Boltzmann entropy `sum p log p dx` with the `0 log 0 = 0` convention
/// (midpoint rule; second-order in the cell width).
pub fn entropy(p: &GridDensity) -> f64 {
    let dx = p.dx();
    p.values()
        .iter()
        .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
        .sum::<f64>()
        * dx
}

/// Relative entropy `sum p log(p/q) dx`; infinite when `p` charges a cell
/// where `q` vanishes.
pub fn relative_entropy(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_grid(q)?;
    let dx = p.dx();
    let mut total = 0.0;
    for (&pi, &qi) in p.values().iter().zip(q.values()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total * dx)
}

/// Interaction energy of a grid density under either model family.
pub fn energy_of_density(p: &GridDensity, model: &Model) -> f64 {
    match model {
        Model::Mv(mv) => mv_energy_of_density(p, mv),
        Model::Rb(rb) => rb_energy_of_density(p, rb),
    }
}

fn mv_energy_of_density(p: &GridDensity, mv: &MvModel) -> f64 {
    let m = p.spec().m;
    let dx = p.dx();
    // Radial kernel sampled at multiples of the cell width.
    let kernel: Vec<f64> = (0..m).map(|t| mv.potential(&[t as f64 * dx])).collect();
    let v = p.values();
    let mut total = 0.0;
    for i in 0..m {
        if v[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            row += kernel[i.abs_diff(j)] * vj;
        }
        total += v[i] * row;
    }
    0.5 * total * dx * dx
}

fn rb_energy_of_density(p: &GridDensity, rb: &RbModel) -> f64 {
    let dx = p.dx();
    p.cdf().iter().map(|&f| rb.flux(f)).sum::<f64>() * dx
}

/// Free energy: entropy plus the temperature-scaled interaction energy.
pub fn free_energy(p: &GridDensity, model: &Model) -> f64 {
    entropy(p) + 2.0 / model.sigma_sq() * energy_of_density(p, model)
}

/// Rate function value `free_energy - f_star`, floored at zero inside the
/// discretization guard band of -1e-8.
pub fn rate(p: &GridDensity, model: &Model, f_star: f64) -> f64 {
    let v = free_energy(p, model) - f_star;
    if (-1e-8..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// Interpolation-based recentering of log-weights.
// ---------------------------------------------------------------------------

/// Cubic Hermite interpolation with fourth-order finite-difference slopes;
/// linear extension with the end slopes outside the grid.
struct SmoothInterp<'a> {
    x0: f64,
    dx: f64,
    values: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> SmoothInterp<'a> {
    fn new(x0: f64, dx: f64, values: &'a [f64]) -> Self {
        let m = values.len();
        let mut slopes = vec![0.0; m];
        for i in 0..m {
            slopes[i] = if i >= 2 && i + 2 < m {
                (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
                    / (12.0 * dx)
            } else if i == 0 {
                (values[1] - values[0]) / dx
            } else if i + 1 == m {
                (values[m - 1] - values[m - 2]) / dx
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * dx)
            };
        }
        Self {
            x0,
            dx,
            values,
            slopes,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let m = self.values.len();
        let t = (x - self.x0) / self.dx;
        if t <= 0.0 {
            return self.values[0] + self.slopes[0] * (x - self.x0);
        }
        if t >= (m - 1) as f64 {
            let xe = self.x0 + (m - 1) as f64 * self.dx;
            return self.values[m - 1] + self.slopes[m - 1] * (x - xe);
        }
        let i = t.floor() as usize;
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.dx, self.slopes[i + 1] * self.dx);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2)
    }
}

/// Normalized density from a log-weight vector.
fn density_from_exponent(spec: GridSpec, exponent: &[f64]) -> Vec<f64> {
    let max = exponent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut values: Vec<f64> = exponent.iter().map(|&e| (e - max).exp()).collect();
    let mass: f64 = values.iter().sum::<f64>() * spec.dx();
    values.iter_mut().for_each(|v| *v /= mass);
    values
}

fn mean_of(spec: GridSpec, values: &[f64]) -> f64 {
    let dx = spec.dx();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| spec.center(i) * v * dx)
        .sum()
}

/// Shifts the log-weights so the resulting density has mean zero (solved by
/// a translation fixed point on the interpolated exponent).
fn recenter_exponent(spec: GridSpec, exponent: &mut Vec<f64>) {
    let mut delta = 0.0;
    for _ in 0..12 {
        let shifted: Vec<f64> = if delta == 0.0 {
            exponent.clone()
        } else {
            let interp = SmoothInterp::new(spec.center(0), spec.dx(), exponent);
            (0..spec.m)
                .map(|i| interp.eval(spec.center(i) + delta))
                .collect()
        };
        let mean = mean_of(spec, &density_from_exponent(spec, &shifted));
        if mean.abs() < 1e-13 {
            *exponent = shifted;
            return;
        }
        delta += mean;
    }
    let interp = SmoothInterp::new(spec.center(0), spec.dx(), exponent);
    *exponent = (0..spec.m)
        .map(|i| interp.eval(spec.center(i) + delta))
        .collect();
}

// ---------------------------------------------------------------------------
// Stationary fixed point of the rank-based dynamics.
// ---------------------------------------------------------------------------

/// Options for the stationary fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions {
    /// Damping weight on the fixed-point map (0.5 keeps the undamped map's
    /// oscillations in check for steep flux derivatives).
    pub omega: f64,
    /// Sup-norm change that counts as converged.
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            omega: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Stationary density of the rank-based dynamics on the given grid, by
/// damped iteration of the fixed-point map
/// `T(p) = exp((2/sigma^2) int_0^x b(F_p)) / z`, recentering the mean at
/// every step. The flux must satisfy the interior-positivity and strict
/// end-slope conditions.
pub fn stationary_rb(model: &RbModel, spec: GridSpec) -> Result<GridDensity> {
    stationary_rb_with(model, spec, StationaryOptions::default())
}

pub fn stationary_rb_with(
    model: &RbModel,
    spec: GridSpec,
    opts: StationaryOptions,
) -> Result<GridDensity> {
    let conditions = model.condition_report();
    if !conditions.all_hold() {
        return Err(Error::InvalidArgument(format!(
            "flux fails the ergodicity conditions: {conditions:?}"
        )));
    }
    let dx = spec.dx();
    let width = spec.b - spec.a;
    let mut p = GridDensity::from_fn(spec, |x| (-x * x / (width * width / 64.0)).exp())?;
    let c = 2.0 / model.sigma_sq;

    let mut last_change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        // Fixed-point map: integrate the flux derivative along the CDF.
        let f = p.cdf();
        let g: Vec<f64> = f.iter().map(|&u| c * model.flux_prime(u)).collect();
        let mut exponent = cumulative_integral(&g, dx);
        recenter_exponent(spec, &mut exponent);
        let t_values = density_from_exponent(spec, &exponent);

        let mut change: f64 = 0.0;
        let mut next = p.values().to_vec();
        for i in 0..spec.m {
            let v = (1.0 - opts.omega) * next[i] + opts.omega * t_values[i];
            change = change.max((v - next[i]).abs());
            next[i] = v;
        }
        let mass: f64 = next.iter().sum::<f64>() * dx;
        next.iter_mut().for_each(|v| *v /= mass);
        p = GridDensity { spec, values: next };
        last_change = change;
        if change < opts.tol {
            // Final exact recentering of the converged density.
            let mut exponent: Vec<f64> = p
                .values()
                .iter()
                .map(|&v| if v > 0.0 { v.ln() } else { -800.0 })
                .collect();
            recenter_exponent(spec, &mut exponent);
            let values = density_from_exponent(spec, &exponent);
            return GridDensity::new(spec, values);
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iter,
        residual: last_change,
    })
}

/// Grid L1 norm of the stationary equation residual
/// `(sigma^2/2) p'' - (b(F) p)'`, with fourth-order stencils; the two cells
/// adjacent to each boundary are skipped.
pub fn fokker_planck_residual_l1(p: &GridDensity, model: &RbModel) -> f64 {
    let m = p.spec().m;
    let dx = p.dx();
    let v = p.values();
    let f = p.cdf();
    let flux: Vec<f64> = (0..m).map(|i| model.flux_prime(f[i]) * v[i]).collect();
    let half_sigma = model.sigma_sq / 2.0;
    let mut total = 0.0;
    for i in 2..m - 2 {
        let d2p = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2])
            / (12.0 * dx * dx);
        let dflux =
            (flux[i - 2] - 8.0 * flux[i - 1] + 8.0 * flux[i + 1] - flux[i + 2]) / (12.0 * dx);
        total += (half_sigma * d2p - dflux).abs();
    }
    total * dx
}

// ---------------------------------------------------------------------------
// Free-energy minimization for pairwise models.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub initial_step: f64,
    /// First-variation spread over supported cells that counts as converged.
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            tol: 1e-6,
            max_iter: 200_000,
        }
    }
}

/// Minimizes the free energy of a pairwise model over grid densities by
/// mirror descent on the cell log-weights (multiplicative updates by the
/// first-variation field), with renormalization and mean recentering at
/// every iterate. Returns the minimizer and its free energy.
pub fn minimize_free_energy_mv(model: &MvModel, spec: GridSpec) -> Result<(GridDensity, f64)> {
    minimize_free_energy_mv_with(model, spec, MinimizeOptions::default())
}

pub fn minimize_free_energy_mv_with(
    model: &MvModel,
    spec: GridSpec,
    opts: MinimizeOptions,
) -> Result<(GridDensity, f64)> {
    let m = spec.m;
    let dx = spec.dx();
    let kernel: Vec<f64> = (0..m).map(|t| model.potential(&[t as f64 * dx])).collect();
    let c = 2.0 / model.sigma_sq;
    let wrapped = Model::Mv(model.clone());

    let convolve = |v: &[f64], out: &mut [f64]| {
        for i in 0..m {
            let mut acc = 0.0;
            for (j, &vj) in v.iter().enumerate() {
                acc += kernel[i.abs_diff(j)] * vj;
            }
            out[i] = acc * dx;
        }
    };

    // First variation of the discrete objective.
    let variation = |v: &[f64], conv: &[f64], out: &mut [f64]| {
        for i in 0..m {
            let logp = if v[i] > 0.0 { v[i].ln() } else { -800.0 };
            out[i] = logp + 1.0 + c * conv[i];
        }
    };

    let width = spec.b - spec.a;
    let mut p = GridDensity::from_fn(spec, |x| (-x * x / (width * width / 64.0)).exp())?;
    let mut conv = vec![0.0; m];
    let mut phi = vec![0.0; m];
    let mut step = opts.initial_step;
    convolve(p.values(), &mut conv);
    let mut f_current = free_energy(&p, &wrapped);

    let mut spread = f64::INFINITY;
    for _ in 0..opts.max_iter {
        variation(p.values(), &conv, &mut phi);

        // Convergence: the variation field is constant across supported
        // cells.
        let peak = p.values().iter().cloned().fold(0.0, f64::max);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&value, &field) in p.values().iter().zip(&phi) {
            if value > 1e-12 * peak {
                lo = lo.min(field);
                hi = hi.max(field);
            }
        }
        spread = hi - lo;
        if spread < opts.tol {
            return Ok((p.clone(), f_current));
        }

        // Multiplicative update with backtracking on the free energy.
        let phi_mean: f64 = (0..m).map(|i| phi[i] * p.values()[i]).sum::<f64>() * dx;
        loop {
            let mut exponent: Vec<f64> = (0..m)
                .map(|i| {
                    let logp = if p.values()[i] > 0.0 {
                        p.values()[i].ln()
                    } else {
                        -800.0
                    };
                    logp - step * (phi[i] - phi_mean)
                })
                .collect();
            recenter_exponent(spec, &mut exponent);
            let candidate = GridDensity {
                spec,
                values: density_from_exponent(spec, &exponent),
            };
            let f_new = free_energy(&candidate, &wrapped);
            if f_new <= f_current + 1e-14 {
                p = candidate;
                f_current = f_new;
                convolve(p.values(), &mut conv);
                step = (step * 1.2).min(4.0);
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Ok((p, f_current));
            }
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iter,
        residual: spread,
    })
}

// ---------------------------------------------------------------------------
// Rate-function comparison for rank-based models.
// ---------------------------------------------------------------------------

/// Decomposition of the rank-based rate function into a relative-entropy
/// part and the flux-curvature correction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateGap {
    pub relative_entropy_part: f64,
    pub gamma_part: f64,
}

impl RateGap {
    pub fn sum(&self) -> f64 {
        self.relative_entropy_part + self.gamma_part
    }
}

/// Splits the rate of `p` relative to the stationary density into
/// `R[p | p_inf]` and `(2/sigma^2) int Gamma(F_p, F_inf)`, where
/// `Gamma(u, v) = B(u) - B(v) - b(v)(u - v)`. For concave flux the second
/// part is nonpositive.
pub fn rate_gap(p: &GridDensity, model: &RbModel, p_inf: &GridDensity) -> Result<RateGap> {
    p.same_grid(p_inf)?;
    let rel = relative_entropy(p, p_inf)?;
    let fp = p.cdf();
    let finf = p_inf.cdf();
    let dx = p.dx();
    let mut gamma = 0.0;
    for i in 0..p.spec().m {
        let (u, v) = (fp[i], finf[i]);
        gamma += model.flux(u) - model.flux(v) - model.flux_prime(v) * (u - v);
    }
    gamma *= 2.0 / model.sigma_sq * dx;
    Ok(RateGap {
        relative_entropy_part: rel,
        gamma_part: gamma,
    })
}

// ---------------------------------------------------------------------------
// Serialization: two-column CSV plus a JSON sidecar.
// ---------------------------------------------------------------------------

pub const DENSITY_FORMAT_VERSION: &str = "mfgibbs-density-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub schema: String,
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub sigma_sq: Option<f64>,
    pub model: Option<String>,
}

pub fn density_to_csv(p: &GridDensity) -> String {
    let mut out = format!("# {DENSITY_FORMAT_VERSION} cell-center,density\n");
    for (i, v) in p.values().iter().enumerate() {
        out.push_str(&format!("{:?},{:?}\n", p.spec().center(i), v));
    }
    out
}

pub fn density_sidecar(p: &GridDensity, sigma_sq: Option<f64>, model: Option<String>) -> String {
    serde_json::to_string_pretty(&DensitySidecar {
        schema: DENSITY_FORMAT_VERSION.into(),
        a: p.spec().a,
        b: p.spec().b,
        m: p.spec().m,
        sigma_sq,
        model,
    })
    .expect("serializable")
}

/// Reconstructs a density from its CSV body and JSON sidecar.
pub fn density_from_files(csv: &str, sidecar: &str) -> Result<GridDensity> {
    let meta: DensitySidecar =
        serde_json::from_str(sidecar).map_err(|e| Error::Config(format!("bad sidecar: {e}")))?;
    if meta.schema != DENSITY_FORMAT_VERSION {
        return Err(Error::Config(format!(
            "unsupported density schema {:?}",
            meta.schema
        )));
    }
    let spec = GridSpec::new(meta.a, meta.b, meta.m)?;
    let mut values = Vec::with_capacity(meta.m);
    for line in csv.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .ok_or_else(|| Error::Config("density CSV row needs two columns".into()))?;
        values.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad density value {v:?}: {e}")))?,
        );
    }
    GridDensity::new(spec, values)
}

/// Quantile function of a grid density: inverts the cell-center CDF by
/// binary search with linear interpolation between centers.
pub fn quantile(p: &GridDensity, u: f64) -> f64 {
    let f = p.cdf();
    let m = p.spec().m;
    if u <= f[0] {
        return p.spec().center(0);
    }
    if u >= f[m - 1] {
        return p.spec().center(m - 1);
    }
    let mut lo = 0usize;
    let mut hi = m - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if f[mid] < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f[lo], f[hi]);
    let (xlo, xhi) = (p.spec().center(lo), p.spec().center(hi));
    if fhi > flo {
        xlo + (u - flo) * (xhi - xlo) / (fhi - flo)
    } else {
        0.5 * (xlo + xhi)
    }
}

/// L1 distance of the CDFs of two densities on the same grid.
pub fn w1_between_grid(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_grid(q)?;
    let (fp, fq) = (p.cdf(), q.cdf());
    Ok(fp
        .iter()
        .zip(&fq)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * p.dx())
}

/// Closed-form logistic density with rate `c`, grid-normalized. The
/// stationary profile of the symmetric quadratic flux at temperature
/// `sigma_sq = 2/c`.
pub fn logistic_density(spec: GridSpec, c: f64) -> Result<GridDensity> {
    GridDensity::from_fn(spec, |x| {
        let e = (-c * x).exp();
        c * e / ((1.0 + e) * (1.0 + e))
    })
}
