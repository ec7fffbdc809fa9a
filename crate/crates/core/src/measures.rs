//! Configurations, empirical measures, translation and centering operators,
//! and the 1D metric layer: Wasserstein distances, the Prohorov metric for
//! equal-weight atomic measures, and the quotient (shift-infimum) metrics on
//! translation orbits.

use crate::error::{Error, Result};
use crate::numerics::grid_refine_min;
use serde::{Deserialize, Serialize};

/// Absolute tolerance, per particle, for the zero-sum invariant of centered
/// configurations.
pub const CENTERING_TOL: f64 = 1e-12;

/// An ordered list of `n` points in `R^d`, stored flat (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Configuration {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "coordinate count {} is not a positive multiple of d = {d}",
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument(
                "configuration contains non-finite coordinates".into(),
            ));
        }
        let n = data.len() / d;
        Ok(Self { data, n, d })
    }

    /// 1D convenience constructor.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.data
    }

    /// Per-dimension mean of the points.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for i in 0..self.n {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += self.data[i * self.d + k];
            }
        }
        for mk in &mut m {
            *mk /= self.n as f64;
        }
        m
    }
}

/// A configuration whose per-dimension coordinate sums vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredConfiguration {
    inner: Configuration,
}

impl CenteredConfiguration {
    /// Validates the zero-sum invariant (tolerance `CENTERING_TOL * n`).
    pub fn new(c: Configuration) -> Result<Self> {
        let n = c.len() as f64;
        for k in 0..c.dim() {
            let s: f64 = (0..c.len()).map(|i| c.point(i)[k]).sum();
            if s.abs() > CENTERING_TOL * n {
                return Err(Error::InvalidArgument(format!(
                    "component sum {s:e} in dimension {k} exceeds centering tolerance"
                )));
            }
        }
        Ok(Self { inner: c })
    }

    pub fn as_configuration(&self) -> &Configuration {
        &self.inner
    }

    pub fn into_configuration(self) -> Configuration {
        self.inner
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn coords(&self) -> &[f64] {
        self.inner.coords()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.inner.point(i)
    }
}

/// Subtracts the per-dimension mean from every point (the orthogonal
/// projection onto the zero-sum subspace). Idempotent.
pub fn center(c: &Configuration) -> CenteredConfiguration {
    let mean = c.mean();
    let d = c.dim();
    let mut data = c.coords().to_vec();
    for i in 0..c.len() {
        for k in 0..d {
            data[i * d + k] -= mean[k];
        }
    }
    // Kill the O(eps) residual of the subtraction so the invariant holds
    // bit-tightly even for adversarial magnitudes.
    for k in 0..d {
        let resid: f64 = (0..c.len()).map(|i| data[i * d + k]).sum::<f64>() / c.len() as f64;
        if resid != 0.0 {
            for i in 0..c.len() {
                data[i * d + k] -= resid;
            }
        }
    }
    CenteredConfiguration {
        inner: Configuration {
            data,
            n: c.len(),
            d,
        },
    }
}

/// An equal-weight atomic measure: `n` atoms in `R^d`, each of mass `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
    n: usize,
    d: usize,
}

impl EmpiricalMeasure {
    pub fn new(d: usize, atoms: Vec<f64>) -> Result<Self> {
        let c = Configuration::new(d, atoms)?;
        Ok(Self {
            atoms: c.data,
            n: c.n,
            d: c.d,
        })
    }

    pub fn from_points_1d(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    /// The empirical measure of a configuration.
    pub fn from_configuration(c: &Configuration) -> Self {
        Self {
            atoms: c.coords().to_vec(),
            n: c.len(),
            d: c.dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.d..(i + 1) * self.d]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for i in 0..self.n {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += self.atoms[i * self.d + k];
            }
        }
        for mk in &mut m {
            *mk /= self.n as f64;
        }
        m
    }

    /// Subtract the mean from every atom.
    pub fn centered(&self) -> Self {
        let c = Configuration {
            data: self.atoms.clone(),
            n: self.n,
            d: self.d,
        };
        let cc = center(&c);
        Self {
            atoms: cc.inner.data,
            n: self.n,
            d: self.d,
        }
    }

    /// Sorted atom positions (d = 1 only).
    pub fn sorted_1d(&self) -> Result<Vec<f64>> {
        if self.d != 1 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        let mut xs = self.atoms.clone();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(xs)
    }

    /// Right-continuous empirical CDF at `x` (d = 1 only).
    pub fn cdf_1d(&self, x: f64) -> Result<f64> {
        if self.d != 1 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        let count = self.atoms.iter().filter(|&&a| a <= x).count();
        Ok(count as f64 / self.n as f64)
    }

    /// Mean of `|x|^l` over the atoms (d = 1).
    pub fn abs_moment_1d(&self, l: f64) -> Result<f64> {
        if self.d != 1 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        Ok(self.atoms.iter().map(|x| x.abs().powf(l)).sum::<f64>() / self.n as f64)
    }
}

/// Translation by `y`: every atom is shifted by `-y`, so that integrating a
/// test function against the result matches integrating `x -> f(x + y)`
/// against the input.
pub fn translate(m: &EmpiricalMeasure, y: &[f64]) -> Result<EmpiricalMeasure> {
    if y.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: y.len(),
        });
    }
    let d = m.dim();
    let mut atoms = m.atoms.clone();
    for i in 0..m.len() {
        for k in 0..d {
            atoms[i * d + k] -= y[k];
        }
    }
    Ok(EmpiricalMeasure {
        atoms,
        n: m.n,
        d: m.d,
    })
}

/// 1D convenience wrapper around [`translate`].
pub fn translate_1d(m: &EmpiricalMeasure, y: f64) -> Result<EmpiricalMeasure> {
    translate(m, &[y])
}

/// Wasserstein distance of order `p` between two 1D empirical measures.
///
/// For `p = 1` the value is the L1 distance of the CDFs; for `p > 1` with
/// equal atom counts it is the sorted-matching cost, and otherwise the Lp
/// distance of the quantile functions.
pub fn wasserstein_1d(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, p: f64) -> Result<f64> {
    if m1.dim() != 1 || m2.dim() != 1 {
        return Err(Error::UnsupportedDimension(m1.dim().max(m2.dim())));
    }
    if p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    if p == 1.0 {
        return w1_cdf_integral(m1, m2);
    }
    if m1.len() == m2.len() {
        return wp_sorted_matching(m1, m2, p);
    }
    wp_quantile(m1, m2, p)
}

/// L1 distance of the empirical CDFs (the `p = 1` route).
pub fn w1_cdf_integral(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> Result<f64> {
    let xs = m1.sorted_1d()?;
    let ys = m2.sorted_1d()?;
    let mut grid: Vec<f64> = xs.iter().chain(ys.iter()).copied().collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let mut total = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    for w in grid.windows(2) {
        while i < xs.len() && xs[i] <= w[0] {
            i += 1;
        }
        while j < ys.len() && ys[j] <= w[0] {
            j += 1;
        }
        let f1 = i as f64 / n1;
        let f2 = j as f64 / n2;
        total += (f1 - f2).abs() * (w[1] - w[0]);
    }
    Ok(total)
}

/// Sorted-matching transport cost to the power `1/p` (equal atom counts).
pub fn wp_sorted_matching(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, p: f64) -> Result<f64> {
    if m1.len() != m2.len() {
        return Err(Error::InvalidArgument(
            "sorted matching requires equal atom counts".into(),
        ));
    }
    let xs = m1.sorted_1d()?;
    let ys = m2.sorted_1d()?;
    let n = xs.len() as f64;
    let cost: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum::<f64>()
        / n;
    Ok(cost.powf(1.0 / p))
}

/// Lp distance of quantile functions (piecewise-constant, exact).
fn wp_quantile(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let xs = m1.sorted_1d()?;
    let ys = m2.sorted_1d()?;
    let (n1, n2) = (xs.len(), ys.len());
    let mut cuts: Vec<f64> = (0..=n1)
        .map(|i| i as f64 / n1 as f64)
        .chain((0..=n2).map(|j| j as f64 / n2 as f64))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut cost = 0.0;
    for w in cuts.windows(2) {
        let du = w[1] - w[0];
        if du <= 0.0 {
            continue;
        }
        let u_mid = 0.5 * (w[0] + w[1]);
        let q1 = xs[((u_mid * n1 as f64).ceil() as usize - 1).min(n1 - 1)];
        let q2 = ys[((u_mid * n2 as f64).ceil() as usize - 1).min(n2 - 1)];
        cost += (q1 - q2).abs().powf(p) * du;
    }
    Ok(cost.powf(1.0 / p))
}

/// Maximum bipartite matching (Kuhn's augmenting paths). `adj[i]` lists the
/// right-side vertices reachable from left vertex `i`.
fn max_matching(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> usize {
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut size = 0;
    let mut visited = vec![false; n_right];
    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                if match_right[v].is_none()
                    || try_augment(match_right[v].unwrap(), adj, visited, match_right)
                {
                    match_right[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    for u in 0..n_left {
        visited.iter_mut().for_each(|v| *v = false);
        if try_augment(u, adj, &mut visited, &mut match_right) {
            size += 1;
        }
    }
    size
}

/// Prohorov distance between two 1D empirical measures with equal atom
/// counts.
///
/// The value is the smallest `eps` in the finite candidate set (pairwise
/// distances and the mass levels `k/n`) at which some coupling puts mass at
/// most `eps` on pairs at distance `>= eps`. Feasibility at a level reduces
/// to a bipartite matching size check and is monotone, so a binary search
/// over the sorted candidates locates the distance.
pub fn prohorov_1d(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> Result<f64> {
    if m1.dim() != 1 || m2.dim() != 1 {
        return Err(Error::UnsupportedDimension(m1.dim().max(m2.dim())));
    }
    if m1.len() != m2.len() {
        return Err(Error::NotImplemented(
            "Prohorov distance requires equal atom counts".into(),
        ));
    }
    let n = m1.len();
    let xs = m1.atoms();
    let ys = m2.atoms();

    let mut candidates: Vec<f64> = Vec::with_capacity(n * n + n + 1);
    for &x in xs {
        for &y in ys {
            candidates.push((x - y).abs());
        }
    }
    for k in 0..=n {
        candidates.push(k as f64 / n as f64);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let feasible = |eps: f64| -> bool {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| (xs[i] - ys[j]).abs() <= eps)
                    .collect::<Vec<_>>()
            })
            .collect();
        let matched = max_matching(n, n, &adj);
        (n - matched) as f64 <= eps * n as f64
    };

    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    debug_assert!(feasible(candidates[hi]));
    if feasible(candidates[lo]) {
        return Ok(candidates[lo]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(candidates[hi])
}

/// Base metric selector for the quotient distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuotientBase {
    Prohorov,
    Wasserstein { p: f64 },
}

fn median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Distance between translation orbits: the infimum over relative shifts of
/// the base distance.
///
/// The Wasserstein bases have convex shift objectives: the order-2 optimum
/// aligns the means and is taken in closed form, the others are bracketed by
/// the median offset plus/minus the summed supports and resolved by grid
/// refinement with a golden-section polish to 1e-9 on the shift. The
/// Prohorov base is piecewise constant in the shift, so its infimum is taken
/// exactly over the finite candidate set of pairwise offsets and their
/// midpoints (where every local minimum of the shifted bottleneck structure
/// sits); the enumeration is O(n^4) shifts and is meant for desk-scale atom
/// counts.
pub fn quotient_distance(
    m1: &EmpiricalMeasure,
    m2: &EmpiricalMeasure,
    base: QuotientBase,
) -> Result<f64> {
    if m1.dim() != 1 || m2.dim() != 1 {
        return Err(Error::UnsupportedDimension(m1.dim().max(m2.dim())));
    }
    if let QuotientBase::Wasserstein { p } = base {
        if p < 1.0 {
            return Err(Error::InvalidOrder(p));
        }
        if p == 2.0 && m1.len() == m2.len() {
            let shift = m2.mean()[0] - m1.mean()[0];
            let aligned = translate_1d(m2, shift)?;
            return wasserstein_1d(m1, &aligned, 2.0);
        }
    }
    let eval = |y: f64| -> f64 {
        let shifted = translate_1d(m2, y).expect("dimension checked");
        match base {
            QuotientBase::Prohorov => prohorov_1d(m1, &shifted).expect("checked"),
            QuotientBase::Wasserstein { p } => wasserstein_1d(m1, &shifted, p).expect("checked"),
        }
    };
    if matches!(base, QuotientBase::Prohorov) {
        if m1.len() != m2.len() {
            return Err(Error::NotImplemented(
                "Prohorov distance requires equal atom counts".into(),
            ));
        }
        // Candidate shifts: every pairwise offset and every midpoint of two
        // offsets. The shifted pair distances are V-shapes |y - c_ij|, so
        // the minimum of each bottleneck level lies on a kink or a crossing.
        let mut offsets = Vec::with_capacity(m1.len() * m2.len());
        for &yj in m2.atoms() {
            for &xi in m1.atoms() {
                offsets.push(yj - xi);
            }
        }
        offsets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        offsets.dedup();
        let mut best = f64::INFINITY;
        for (i, &a) in offsets.iter().enumerate() {
            best = best.min(eval(a));
            for &b in offsets.iter().skip(i + 1) {
                best = best.min(eval(0.5 * (a + b)));
            }
        }
        return Ok(best.min(eval(0.0)));
    }
    let xs = m1.sorted_1d()?;
    let ys = m2.sorted_1d()?;
    let range1 = xs[xs.len() - 1] - xs[0];
    let range2 = ys[ys.len() - 1] - ys[0];
    // translate(m2, y) moves atoms by -y, so the aligning shift is
    // median2 - median1 up to the supports.
    let center = median(&ys) - median(&xs);
    let half = (range1 + range2).max(1e-6);
    let (_, best) = grid_refine_min(&eval, center - half, center + half, 1e-9);
    // y = 0 is always admissible; never exceed the unshifted distance.
    Ok(best.min(eval(0.0)))
}

// ---------------------------------------------------------------------------
// Serialization: CSV (one coordinate row per atom) and JSON.
// ---------------------------------------------------------------------------

/// Version tag written into measure files.
pub const MEASURE_FORMAT_VERSION: &str = "mfgibbs-measure-v1";

/// CSV serialization: a version header comment line, then one coordinate row
/// per atom.
pub fn measure_to_csv(m: &EmpiricalMeasure) -> String {
    let mut out = format!("# {MEASURE_FORMAT_VERSION} d={}\n", m.dim());
    for i in 0..m.len() {
        let row: Vec<String> = m.atom(i).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn measure_from_csv(text: &str) -> Result<EmpiricalMeasure> {
    let mut d: Option<usize> = None;
    let mut atoms = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if rest.contains(MEASURE_FORMAT_VERSION) {
                if let Some(dv) = rest.split("d=").nth(1) {
                    d = dv.trim().parse::<usize>().ok();
                }
            }
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        match d {
            None => d = Some(row.len()),
            Some(dv) if dv != row.len() => {
                return Err(Error::Config(format!(
                    "row width {} does not match d = {dv}",
                    row.len()
                )))
            }
            _ => {}
        }
        atoms.extend(row);
    }
    let d = d.ok_or_else(|| Error::Config("empty measure file".into()))?;
    EmpiricalMeasure::new(d, atoms)
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    schema: String,
    d: usize,
    points: Vec<Vec<f64>>,
}

pub fn measure_to_json(m: &EmpiricalMeasure) -> String {
    let points = (0..m.len()).map(|i| m.atom(i).to_vec()).collect();
    serde_json::to_string_pretty(&MeasureJson {
        schema: MEASURE_FORMAT_VERSION.into(),
        d: m.dim(),
        points,
    })
    .expect("serializable")
}

pub fn measure_from_json(text: &str) -> Result<EmpiricalMeasure> {
    let parsed: MeasureJson =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad measure JSON: {e}")))?;
    if parsed.schema != MEASURE_FORMAT_VERSION {
        return Err(Error::Config(format!(
            "unsupported measure schema {:?}",
            parsed.schema
        )));
    }
    let mut atoms = Vec::with_capacity(parsed.points.len() * parsed.d);
    for p in &parsed.points {
        if p.len() != parsed.d {
            return Err(Error::Config("point width does not match d".into()));
        }
        atoms.extend_from_slice(p);
    }
    EmpiricalMeasure::new(parsed.d, atoms)
}
