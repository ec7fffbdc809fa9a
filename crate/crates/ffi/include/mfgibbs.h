/* C ABI for the mfgibbs library.
 *
 * Kept in sync with crates/ffi/src/lib.rs; regenerate with cbindgen
 * (see cbindgen.toml) where it is available.
 *
 * Conventions: fallible functions return MfgStatus and write results
 * through out-pointers; handles are freed once with the matching *_free;
 * buffers are caller-allocated with lengths matching the handle's
 * reported sizes. mfg_last_error_message() describes the most recent
 * failure on the calling thread.
 */

#ifndef MFGIBBS_H
#define MFGIBBS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum MfgStatus {
  MfgOk = 0,
  MfgNullPointer = 1,
  MfgInvalidArgument = 2,
  MfgUnsupported = 3,
  MfgNumericalFailure = 4,
  MfgInsufficientData = 5,
  MfgIoError = 6,
  MfgPanic = 7,
} MfgStatus;

typedef struct MfgModel MfgModel;
typedef struct MfgDensity MfgDensity;
typedef struct MfgSampleSet MfgSampleSet;

/* Library version string; static storage, do not free. */
const char *mfg_version(void);

/* Message of the most recent error on this thread; valid until the next
 * failing call on the same thread. Do not free. */
const char *mfg_last_error_message(void);

/* Models ------------------------------------------------------------- */

/* Named built-ins: "mv:quadratic", "mv:cubic", "mv:abs",
 * "rb:logistic-flux". */
MfgStatus mfg_model_builtin(const char *name, double sigma_sq,
                            MfgModel **out);

/* Rank-based model from flux polynomial coefficients (monomial basis). */
MfgStatus mfg_model_rb_polynomial(const double *coeffs, size_t len,
                                  double sigma_sq, MfgModel **out);

/* Pairwise model from (power, coefficient) pairs as parallel arrays. */
MfgStatus mfg_model_mv_terms(const double *powers,
                             const double *coefficients, size_t len,
                             double sigma_sq, MfgModel **out);

void mfg_model_free(MfgModel *model);

/* Configuration energy; coords is row-major n x d. */
MfgStatus mfg_configuration_energy(const MfgModel *model,
                                   const double *coords, size_t n, size_t d,
                                   double *out);

/* Particle drifts; out receives n x d values, row-major. */
MfgStatus mfg_configuration_drift(const MfgModel *model,
                                  const double *coords, size_t n, size_t d,
                                  double *out);

/* Metrics on 1D atom lists ------------------------------------------- */

MfgStatus mfg_wasserstein_1d(const double *xs, size_t n, const double *ys,
                             size_t m, double order, double *out);

/* Equal atom counts required. */
MfgStatus mfg_prohorov_1d(const double *xs, const double *ys, size_t n,
                          double *out);

/* Distance between translation orbits; use_prohorov != 0 selects the
 * Prohorov base, otherwise Wasserstein of the given order. */
MfgStatus mfg_quotient_distance_1d(const double *xs, size_t n,
                                   const double *ys, size_t m,
                                   int use_prohorov, double order,
                                   double *out);

/* Densities ----------------------------------------------------------- */

/* Stationary density on a uniform grid over [a, b] with the given cell
 * count: the fixed point for rank-based models, the free-energy minimizer
 * for pairwise models. */
MfgStatus mfg_stationary_density(const MfgModel *model, double a, double b,
                                 size_t cells, MfgDensity **out);

void mfg_density_free(MfgDensity *density);

size_t mfg_density_cells(const MfgDensity *density);

/* Free energy of the density on its own grid. */
double mfg_density_free_energy(const MfgDensity *density);

MfgStatus mfg_density_values(const MfgDensity *density, double *out,
                             size_t len);

MfgStatus mfg_density_cell_centers(const MfgDensity *density, double *out,
                                   size_t len);

/* Rate-function value relative to f_star under the model. */
MfgStatus mfg_density_rate(const MfgModel *model, const MfgDensity *density,
                           double f_star, double *out);

/* Sampling ------------------------------------------------------------ */

/* Samples the centered equilibrium law. step <= 0 selects the per-family
 * default; use_mala != 0 selects the Metropolis-adjusted chain (exact
 * target), otherwise the unadjusted integrator. */
MfgStatus mfg_sample_equilibrium(const MfgModel *model, size_t n,
                                 double step, uint64_t burn_in,
                                 uint64_t thin, uint64_t total_samples,
                                 int use_mala, uint64_t seed,
                                 MfgSampleSet **out);

void mfg_samples_free(MfgSampleSet *samples);

size_t mfg_samples_count(const MfgSampleSet *samples);

/* Coordinates per sample row (n * d). */
size_t mfg_samples_row_width(const MfgSampleSet *samples);

MfgStatus mfg_samples_row(const MfgSampleSet *samples, size_t index,
                          double *out, size_t len);

/* Acceptance rate of the adjusted chain; NaN for the unadjusted one. */
double mfg_samples_acceptance_rate(const MfgSampleSet *samples);

/* Effective sample size of the energy trace. */
double mfg_samples_ess(const MfgSampleSet *samples);

/* Market weights ------------------------------------------------------ */

/* Overflow-safe softmax of n log-capitalizations; out receives n simplex
 * weights. */
MfgStatus mfg_market_weights(const double *log_caps, size_t n, double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MFGIBBS_H */
