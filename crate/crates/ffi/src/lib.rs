//! C ABI over the core library: opaque handles, integer status codes, and a
//! thread-local last-error message. The committed header in `include/`
//! mirrors this surface; `cbindgen.toml` regenerates it where cbindgen is
//! available.
//!
//! Conventions: every fallible function returns [`MfgStatus`] and writes its
//! result through out-pointers; handles are freed with the matching `_free`
//! function exactly once; buffers are caller-allocated with lengths checked
//! against the handle's reported sizes. Pointer and length contracts are
//! stated per function in the header rather than repeated as safety
//! sections here.
#![allow(clippy::missing_safety_doc)]

use libc::{c_char, c_int, size_t};
use mfgibbs::densities::{free_energy, minimize_free_energy_mv, rate, stationary_rb, GridDensity, GridSpec};
use mfgibbs::error::Error;
use mfgibbs::measures::{
    prohorov_1d, quotient_distance, wasserstein_1d, Configuration, EmpiricalMeasure, QuotientBase,
};
use mfgibbs::models::{Model, MvModel, RbModel};
use mfgibbs::sampler::{
    default_step, sample_equilibrium, Algorithm, SampleSet, SamplerConfig,
};
use mfgibbs::spt::market_weights;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfgStatus {
    MfgOk = 0,
    MfgNullPointer = 1,
    MfgInvalidArgument = 2,
    MfgUnsupported = 3,
    MfgNumericalFailure = 4,
    MfgInsufficientData = 5,
    MfgIoError = 6,
    MfgPanic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> MfgStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::UnsupportedDimension(_) | Error::NotImplemented(_) => {
            MfgStatus::MfgUnsupported
        }
        Error::InvalidOrder(_) | Error::InvalidArgument(_) | Error::IncompatibleGrids(_)
        | Error::Config(_) => MfgStatus::MfgInvalidArgument,
        Error::DivergedChain { .. } | Error::ConvergenceFailure { .. }
        | Error::QuadratureFailure(_) => MfgStatus::MfgNumericalFailure,
        Error::InsufficientData(_) => MfgStatus::MfgInsufficientData,
        Error::Io(_) => MfgStatus::MfgIoError,
    }
}

fn fail(err: Error) -> MfgStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Runs a closure, converting panics into a status instead of unwinding
/// across the ABI.
fn guarded(f: impl FnOnce() -> MfgStatus) -> MfgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MfgStatus::MfgPanic
        }
    }
}

macro_rules! not_null {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!("null pointer: ", stringify!($ptr)));
            return MfgStatus::MfgNullPointer;
        }
    };
}

/// Opaque model handle.
pub struct MfgModel(Model);
/// Opaque grid-density handle.
pub struct MfgDensity(GridDensity, f64);
/// Opaque sample-set handle.
pub struct MfgSampleSet(SampleSet);

/// Library version string; static storage, do not free.
#[no_mangle]
pub extern "C" fn mfg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent error on this thread; valid until the next
/// failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn mfg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds one of the named built-in models (`mv:quadratic`, `mv:cubic`,
/// `mv:abs`, `rb:logistic-flux`).
#[no_mangle]
pub unsafe extern "C" fn mfg_model_builtin(
    name: *const c_char,
    sigma_sq: f64,
    out: *mut *mut MfgModel,
) -> MfgStatus {
    guarded(|| {
        not_null!(name);
        not_null!(out);
        let name = match CStr::from_ptr(name).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("model name is not valid UTF-8");
                return MfgStatus::MfgInvalidArgument;
            }
        };
        match Model::builtin(name, sigma_sq) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(MfgModel(model)));
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Rank-based model from flux polynomial coefficients (monomial basis).
#[no_mangle]
pub unsafe extern "C" fn mfg_model_rb_polynomial(
    coeffs: *const f64,
    len: size_t,
    sigma_sq: f64,
    out: *mut *mut MfgModel,
) -> MfgStatus {
    guarded(|| {
        not_null!(coeffs);
        not_null!(out);
        let coeffs = std::slice::from_raw_parts(coeffs, len).to_vec();
        match RbModel::new(coeffs, sigma_sq) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(MfgModel(Model::Rb(m))));
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Pairwise model from `(power, coefficient)` pairs given as parallel
/// arrays.
#[no_mangle]
pub unsafe extern "C" fn mfg_model_mv_terms(
    powers: *const f64,
    coefficients: *const f64,
    len: size_t,
    sigma_sq: f64,
    out: *mut *mut MfgModel,
) -> MfgStatus {
    guarded(|| {
        not_null!(powers);
        not_null!(coefficients);
        not_null!(out);
        let p = std::slice::from_raw_parts(powers, len);
        let c = std::slice::from_raw_parts(coefficients, len);
        let terms: Vec<(f64, f64)> = p.iter().copied().zip(c.iter().copied()).collect();
        match MvModel::new(terms, sigma_sq) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(MfgModel(Model::Mv(m))));
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mfg_model_free(model: *mut MfgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Configuration energy; `coords` is row-major `n x d`.
#[no_mangle]
pub unsafe extern "C" fn mfg_configuration_energy(
    model: *const MfgModel,
    coords: *const f64,
    n: size_t,
    d: size_t,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(model);
        not_null!(coords);
        not_null!(out);
        let data = std::slice::from_raw_parts(coords, n * d).to_vec();
        let config = match Configuration::new(d, data) {
            Ok(c) if c.len() == n => c,
            Ok(_) => {
                set_error("coordinate count does not match n*d");
                return MfgStatus::MfgInvalidArgument;
            }
            Err(e) => return fail(e),
        };
        match (*model).0.energy(&config) {
            Ok(v) => {
                *out = v;
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Particle drifts; `out` receives `n x d` values, row-major.
#[no_mangle]
pub unsafe extern "C" fn mfg_configuration_drift(
    model: *const MfgModel,
    coords: *const f64,
    n: size_t,
    d: size_t,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(model);
        not_null!(coords);
        not_null!(out);
        let data = std::slice::from_raw_parts(coords, n * d).to_vec();
        let config = match Configuration::new(d, data) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match (*model).0.drift(&config) {
            Ok(v) => {
                std::ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

fn measure_from(ptr: *const f64, len: size_t) -> Result<EmpiricalMeasure, Error> {
    let xs = unsafe { std::slice::from_raw_parts(ptr, len) };
    EmpiricalMeasure::from_points_1d(xs)
}

/// Wasserstein distance of the given order between two 1D atom lists.
#[no_mangle]
pub unsafe extern "C" fn mfg_wasserstein_1d(
    xs: *const f64,
    n: size_t,
    ys: *const f64,
    m: size_t,
    order: f64,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(xs);
        not_null!(ys);
        not_null!(out);
        let result = measure_from(xs, n)
            .and_then(|a| measure_from(ys, m).map(|b| (a, b)))
            .and_then(|(a, b)| wasserstein_1d(&a, &b, order));
        match result {
            Ok(v) => {
                *out = v;
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Prohorov distance between two equal-count 1D atom lists.
#[no_mangle]
pub unsafe extern "C" fn mfg_prohorov_1d(
    xs: *const f64,
    ys: *const f64,
    n: size_t,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(xs);
        not_null!(ys);
        not_null!(out);
        let result = measure_from(xs, n)
            .and_then(|a| measure_from(ys, n).map(|b| (a, b)))
            .and_then(|(a, b)| prohorov_1d(&a, &b));
        match result {
            Ok(v) => {
                *out = v;
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Distance between translation orbits; `use_prohorov != 0` selects the
/// Prohorov base, otherwise Wasserstein of the given order.
#[no_mangle]
pub unsafe extern "C" fn mfg_quotient_distance_1d(
    xs: *const f64,
    n: size_t,
    ys: *const f64,
    m: size_t,
    use_prohorov: c_int,
    order: f64,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(xs);
        not_null!(ys);
        not_null!(out);
        let base = if use_prohorov != 0 {
            QuotientBase::Prohorov
        } else {
            QuotientBase::Wasserstein { p: order }
        };
        let result = measure_from(xs, n)
            .and_then(|a| measure_from(ys, m).map(|b| (a, b)))
            .and_then(|(a, b)| quotient_distance(&a, &b, base));
        match result {
            Ok(v) => {
                *out = v;
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Stationary density on a uniform grid: the fixed point for rank-based
/// models, the free-energy minimizer for pairwise models.
#[no_mangle]
pub unsafe extern "C" fn mfg_stationary_density(
    model: *const MfgModel,
    a: f64,
    b: f64,
    cells: size_t,
    out: *mut *mut MfgDensity,
) -> MfgStatus {
    guarded(|| {
        not_null!(model);
        not_null!(out);
        let spec = match GridSpec::new(a, b, cells) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let model_ref = &(*model).0;
        let result = match model_ref {
            Model::Rb(rb) => stationary_rb(rb, spec),
            Model::Mv(mv) => minimize_free_energy_mv(mv, spec).map(|(p, _)| p),
        };
        match result {
            Ok(p) => {
                let f = free_energy(&p, model_ref);
                *out = Box::into_raw(Box::new(MfgDensity(p, f)));
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mfg_density_free(density: *mut MfgDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Number of grid cells of a density handle.
#[no_mangle]
pub unsafe extern "C" fn mfg_density_cells(density: *const MfgDensity) -> size_t {
    if density.is_null() {
        0
    } else {
        (*density).0.spec().m
    }
}

/// Free energy stored with the density (its own value on its grid).
#[no_mangle]
pub unsafe extern "C" fn mfg_density_free_energy(density: *const MfgDensity) -> f64 {
    if density.is_null() {
        f64::NAN
    } else {
        (*density).1
    }
}

/// Copies the cell values into `out` (`len` must equal the cell count).
#[no_mangle]
pub unsafe extern "C" fn mfg_density_values(
    density: *const MfgDensity,
    out: *mut f64,
    len: size_t,
) -> MfgStatus {
    guarded(|| {
        not_null!(density);
        not_null!(out);
        let values = (*density).0.values();
        if len != values.len() {
            set_error("output length does not match the cell count");
            return MfgStatus::MfgInvalidArgument;
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        MfgStatus::MfgOk
    })
}

/// Copies the cell centers into `out` (`len` must equal the cell count).
#[no_mangle]
pub unsafe extern "C" fn mfg_density_cell_centers(
    density: *const MfgDensity,
    out: *mut f64,
    len: size_t,
) -> MfgStatus {
    guarded(|| {
        not_null!(density);
        not_null!(out);
        let spec = (*density).0.spec();
        if len != spec.m {
            set_error("output length does not match the cell count");
            return MfgStatus::MfgInvalidArgument;
        }
        for i in 0..spec.m {
            *out.add(i) = spec.center(i);
        }
        MfgStatus::MfgOk
    })
}

/// Rate-function value of a density handle relative to `f_star`, evaluated
/// under the model.
#[no_mangle]
pub unsafe extern "C" fn mfg_density_rate(
    model: *const MfgModel,
    density: *const MfgDensity,
    f_star: f64,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(model);
        not_null!(density);
        not_null!(out);
        *out = rate(&(*density).0, &(*model).0, f_star);
        MfgStatus::MfgOk
    })
}

/// Samples the centered equilibrium law. `step <= 0` selects the per-family
/// default; `use_mala != 0` selects the Metropolis-adjusted chain.
#[no_mangle]
pub unsafe extern "C" fn mfg_sample_equilibrium(
    model: *const MfgModel,
    n: size_t,
    step: f64,
    burn_in: u64,
    thin: u64,
    total_samples: u64,
    use_mala: c_int,
    seed: u64,
    out: *mut *mut MfgSampleSet,
) -> MfgStatus {
    guarded(|| {
        not_null!(model);
        not_null!(out);
        let model_ref = &(*model).0;
        let cfg = SamplerConfig {
            n,
            d: 1,
            step: if step > 0.0 {
                step
            } else {
                default_step(model_ref, n.max(2))
            },
            burn_in,
            thin,
            total_samples,
            algorithm: if use_mala != 0 {
                Algorithm::Mala
            } else {
                Algorithm::Em
            },
            seed,
        };
        match sample_equilibrium(model_ref, &cfg) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(MfgSampleSet(set)));
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mfg_samples_free(samples: *mut MfgSampleSet) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mfg_samples_count(samples: *const MfgSampleSet) -> size_t {
    if samples.is_null() {
        0
    } else {
        (*samples).0.len()
    }
}

/// Coordinates per sample row (`n * d`).
#[no_mangle]
pub unsafe extern "C" fn mfg_samples_row_width(samples: *const MfgSampleSet) -> size_t {
    if samples.is_null() {
        0
    } else {
        (*samples).0.config.n * (*samples).0.config.d
    }
}

/// Copies one sampled configuration into `out` (`len` = row width).
#[no_mangle]
pub unsafe extern "C" fn mfg_samples_row(
    samples: *const MfgSampleSet,
    index: size_t,
    out: *mut f64,
    len: size_t,
) -> MfgStatus {
    guarded(|| {
        not_null!(samples);
        not_null!(out);
        let set = &(*samples).0;
        if index >= set.len() {
            set_error("sample index out of range");
            return MfgStatus::MfgInvalidArgument;
        }
        let coords = set.configurations[index].coords();
        if len != coords.len() {
            set_error("output length does not match the row width");
            return MfgStatus::MfgInvalidArgument;
        }
        std::ptr::copy_nonoverlapping(coords.as_ptr(), out, coords.len());
        MfgStatus::MfgOk
    })
}

/// Acceptance rate of the adjusted chain; NaN for the unadjusted one.
#[no_mangle]
pub unsafe extern "C" fn mfg_samples_acceptance_rate(samples: *const MfgSampleSet) -> f64 {
    if samples.is_null() {
        f64::NAN
    } else {
        (*samples).0.diagnostics.acceptance_rate.unwrap_or(f64::NAN)
    }
}

/// Effective sample size of the energy trace.
#[no_mangle]
pub unsafe extern "C" fn mfg_samples_ess(samples: *const MfgSampleSet) -> f64 {
    if samples.is_null() {
        0.0
    } else {
        (*samples).0.diagnostics.ess_energy
    }
}

/// Market weights of `n` log-capitalizations (overflow-safe softmax);
/// `out` receives `n` simplex weights.
#[no_mangle]
pub unsafe extern "C" fn mfg_market_weights(
    log_caps: *const f64,
    n: size_t,
    out: *mut f64,
) -> MfgStatus {
    guarded(|| {
        not_null!(log_caps);
        not_null!(out);
        let xs = std::slice::from_raw_parts(log_caps, n);
        let config = match Configuration::from_1d(xs) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match market_weights(&config) {
            Ok(ms) => {
                std::ptr::copy_nonoverlapping(ms.weights.as_ptr(), out, n);
                MfgStatus::MfgOk
            }
            Err(e) => fail(e),
        }
    })
}
