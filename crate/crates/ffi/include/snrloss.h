#ifndef SNRLOSS_H
#define SNRLOSS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SNRLOSS_TRAINING_GAUSSIAN 0

#define SNRLOSS_TRAINING_STUDENT 1

#define SNRLOSS_STATISTIC_RHO 0

#define SNRLOSS_STATISTIC_BETA 1

#define SNRLOSS_STATISTIC_TTILDE 2

#define SNRLOSS_PATH_DIRECT 0

#define SNRLOSS_PATH_REP 1

#define SNRLOSS_VARIANT_SHARED 0

#define SNRLOSS_VARIANT_INDEPENDENT 1

#define SNRLOSS_H0 0

#define SNRLOSS_H1 1

/*
 Result code of every fallible call.
 */
typedef enum SnrlossStatus {
  SNRLOSS_STATUS_OK = 0,
  SNRLOSS_STATUS_NULL_POINTER = 1,
  SNRLOSS_STATUS_INVALID_ARGUMENT = 2,
  SNRLOSS_STATUS_NUMERICAL = 3,
  SNRLOSS_STATUS_PANIC = 4,
} SnrlossStatus;

/*
 Direct-path simulator with identity covariance and the last unit vector as
 steering vector.
 */
typedef struct SnrlossDirect SnrlossDirect;

/*
 Random stream (ChaCha8 keyed by seed and stream id).
 */
typedef struct SnrlossRng SnrlossRng;

/*
 Sorted Monte Carlo samples.
 */
typedef struct SnrlossSamples SnrlossSamples;

/*
 Statistics of one direct-path trial.
 */
typedef struct SnrlossDraw {
  double rho;
  double beta;
  double t_tilde;
} SnrlossDraw;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on this thread.
 */
const char *snrloss_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *snrloss_version(void);

/*
 Creates a random stream. Returns NULL only on allocation failure.
 */
struct SnrlossRng *snrloss_rng_new(uint64_t seed, uint64_t stream_id);

/*
 Releases a stream. NULL is ignored.

 # Safety
 `rng` must be NULL or a pointer from `snrloss_rng_new` not yet freed.
 */
void snrloss_rng_free(struct SnrlossRng *rng);

/*
 One draw of `statistic` from the chi-square representation.

 `nu` and `mu` are ignored for Gaussian training; `snr_bar` and `variant`
 only matter for t-tilde.

 # Safety
 `rng` must be a live stream and `out` a writable `double`.
 */
enum SnrlossStatus snrloss_rep_draw(struct SnrlossRng *rng,
                                    uint32_t training_code,
                                    uint32_t statistic_code,
                                    uint32_t n,
                                    uint32_t k,
                                    uint32_t nu,
                                    double mu,
                                    double snr_bar,
                                    uint32_t variant_code,
                                    double *out_value);

/*
 Builds a direct-path simulator. For Gaussian training pass `nu = n + 1`.

 # Safety
 `out_sim` must be a writable pointer slot.
 */
enum SnrlossStatus snrloss_direct_new(uint32_t n,
                                      uint32_t k,
                                      uint32_t nu,
                                      double mu,
                                      double snr_bar,
                                      uint32_t training_code,
                                      struct SnrlossDirect **out_sim);

/*
 Runs one trial under `hypothesis` (SNRLOSS_H0 or SNRLOSS_H1).

 # Safety
 `sim` and `rng` must be live handles and `out_draw` writable.
 */
enum SnrlossStatus snrloss_direct_trial(const struct SnrlossDirect *sim,
                                        struct SnrlossRng *rng,
                                        uint32_t hypothesis_code,
                                        struct SnrlossDraw *out_draw);

/*
 # Safety
 `sim` must be NULL or a pointer from `snrloss_direct_new` not yet freed.
 */
void snrloss_direct_free(struct SnrlossDirect *sim);

/*
 Monte Carlo run of `trials` draws of one statistic on one path.
 `workers = 0` uses every core; results do not depend on `workers`.
 For Gaussian training pass `nu = n + 1`.

 # Safety
 `out_samples` must be a writable pointer slot.
 */
enum SnrlossStatus snrloss_mc_run(uint32_t n,
                                  uint32_t k,
                                  uint32_t nu,
                                  double mu,
                                  double snr_bar,
                                  uint32_t training_code,
                                  uint32_t statistic_code,
                                  uint32_t path_code,
                                  uint32_t variant_code,
                                  size_t trials,
                                  uint64_t seed,
                                  size_t workers,
                                  struct SnrlossSamples **out_samples);

/*
 Number of samples; 0 for NULL.

 # Safety
 `samples` must be NULL or a live handle.
 */
size_t snrloss_samples_len(const struct SnrlossSamples *samples);

/*
 Sorted samples, valid until the handle is freed; NULL for NULL.

 # Safety
 `samples` must be NULL or a live handle.
 */
const double *snrloss_samples_data(const struct SnrlossSamples *samples);

/*
 Empirical CDF at `x`.

 # Safety
 `samples` must be a live handle and `out_value` writable.
 */
enum SnrlossStatus snrloss_samples_cdf(const struct SnrlossSamples *samples,
                                       double x,
                                       double *out_value);

/*
 Empirical quantile at probability `q` in [0, 1].

 # Safety
 `samples` must be a live handle and `out_value` writable.
 */
enum SnrlossStatus snrloss_samples_quantile(const struct SnrlossSamples *samples,
                                            double q,
                                            double *out_value);

/*
 # Safety
 `samples` must be NULL or a pointer from `snrloss_mc_run` not yet freed.
 */
void snrloss_samples_free(struct SnrlossSamples *samples);

/*
 Two-sample Kolmogorov-Smirnov distance.

 # Safety
 `a` and `b` must be live handles and `out_value` writable.
 */
enum SnrlossStatus snrloss_ks_distance(const struct SnrlossSamples *a,
                                       const struct SnrlossSamples *b,
                                       double *out_value);

/*
 Density of the SNR loss at `rho`. `nu` is ignored for Gaussian training.

 # Safety
 `out_value` must be writable.
 */
enum SnrlossStatus snrloss_pdf_rho(double rho,
                                   uint32_t n,
                                   uint32_t k,
                                   uint32_t nu,
                                   uint32_t training_code,
                                   double *out_value);

/*
 Mean SNR loss. `nu` is ignored for Gaussian training.

 # Safety
 `out_value` must be writable.
 */
enum SnrlossStatus snrloss_mean_rho(uint32_t n,
                                    uint32_t k,
                                    uint32_t nu,
                                    uint32_t training_code,
                                    double *out_value);

/*
 Kelly threshold giving false-alarm probability `pfa` under Gaussian training.

 # Safety
 `out_value` must be writable.
 */
enum SnrlossStatus snrloss_gaussian_pfa_threshold(double pfa,
                                                  uint32_t n,
                                                  uint32_t k,
                                                  double *out_value);

/*
 Gauss hypergeometric function 2F1(a, b; c; x).

 # Safety
 `out_value` must be writable.
 */
enum SnrlossStatus snrloss_hyp2f1(double a, double b, double c, double x, double *out_value);

/*
 3F2(a1, a2, a3; b1, b2; 1). Needs `b1 + b2 - a1 - a2 - a3 > 0`.

 # Safety
 `out_value` must be writable.
 */
enum SnrlossStatus snrloss_hyp3f2_unit(double a1,
                                       double a2,
                                       double a3,
                                       double b1,
                                       double b2,
                                       double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNRLOSS_H */
