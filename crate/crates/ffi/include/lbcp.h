#ifndef LBCP_H
#define LBCP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LbcpStatus {
  LBCP_STATUS_OK = 0,
  LBCP_STATUS_NULL_POINTER = 1,
  LBCP_STATUS_INVALID_UTF8 = 2,
  // Malformed literal, config or data.
  LBCP_STATUS_PARSE = 3,
  // Argument outside its domain.
  LBCP_STATUS_DOMAIN = 4,
  // Numeric routine failed (non-convergence, accuracy, undefined posterior).
  LBCP_STATUS_NUMERIC = 5,
  LBCP_STATUS_UNSUPPORTED = 6,
  LBCP_STATUS_IO = 7,
  // Output buffer too small; the error message states the required length.
  LBCP_STATUS_BUFFER_TOO_SMALL = 8,
  LBCP_STATUS_PANIC = 9,
} LbcpStatus;

// Location prior selector for [`lbcp_two_model_prior_coefficient`].
typedef enum LbcpLocationPrior {
  LBCP_LOCATION_PRIOR_UNIFORM = 0,
  LBCP_LOCATION_PRIOR_SHIFTED_BINOMIAL = 1,
} LbcpLocationPrior;

// Evidence method selector for [`lbcp_analyze_json`].
typedef enum LbcpMethod {
  LBCP_METHOD_EXACT = 0,
  LBCP_METHOD_MONTE_CARLO = 1,
  LBCP_METHOD_SCHWARZ = 2,
} LbcpMethod;

// Opaque distribution handle.
typedef struct LbcpDistribution LbcpDistribution;

// Opaque nested model sequence handle.
typedef struct LbcpModelSequence LbcpModelSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread ("" after a success).
// The pointer stays valid until the next library call on the same thread.
const char *lbcp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lbcp_version(void);

// Parses a literal such as `poisson:3` or `weibull:1.5,5`.
//
// # Safety
// `literal` must be a NUL-terminated string; `out` must be writable.
enum LbcpStatus lbcp_distribution_parse(const char *literal, struct LbcpDistribution **out);

// Releases a distribution handle; null is ignored.
//
// # Safety
// `d` must come from [`lbcp_distribution_parse`] and not be used afterwards.
void lbcp_distribution_free(struct LbcpDistribution *d);

// Log density (or log mass) at `x`; −∞ outside the support.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum LbcpStatus lbcp_distribution_log_density(const struct LbcpDistribution *d,
                                              double x,
                                              double *out);

// Mean of the distribution.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum LbcpStatus lbcp_distribution_mean(const struct LbcpDistribution *d, double *out);

// KL(p‖q) to absolute tolerance `tol`; +∞ when p is not dominated by q.
//
// # Safety
// `p` and `q` must be live handles and `out` writable.
enum LbcpStatus lbcp_kl(const struct LbcpDistribution *p,
                        const struct LbcpDistribution *q,
                        double tol,
                        double *out);

// Hellinger distance √(1 − ∫√(pq)).
//
// # Safety
// `p` and `q` must be live handles and `out` writable.
enum LbcpStatus lbcp_hellinger(const struct LbcpDistribution *p,
                               const struct LbcpDistribution *q,
                               double tol,
                               double *out);

// Log mass of each location vector under the uniform prior with k change
// points among n observations.
//
// # Safety
// `out` must be writable.
enum LbcpStatus lbcp_uniform_location_log_mass(size_t n, size_t k, double *out);

// Shifted binomial prior on a single location: writes the mass of
// m = 1..n−1 to `masses[m − 1]`. `len` must be at least n − 1.
//
// # Safety
// `masses` must point to `len` writable doubles.
enum LbcpStatus lbcp_shifted_binomial_prior(size_t n, double *masses, size_t len);

// E[n − m₁] under the chosen single-location prior.
//
// # Safety
// `out` must be writable.
enum LbcpStatus lbcp_two_model_prior_coefficient(enum LbcpLocationPrior prior,
                                                 size_t n,
                                                 double *out);

// Posterior model probabilities from prior probabilities and log evidences.
//
// # Safety
// `priors`, `log_evidences` and `out` must each point to `len` doubles.
enum LbcpStatus lbcp_posterior_model_probs(const double *priors,
                                           const double *log_evidences,
                                           size_t len,
                                           double *out);

// Builds a model sequence from TOML text (see the CLI documentation for
// the schema).
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum LbcpStatus lbcp_model_sequence_from_toml(const char *toml, struct LbcpModelSequence **out);

// Number of models (K + 1) in the sequence.
//
// # Safety
// `seq` must be a live handle.
size_t lbcp_model_sequence_len(const struct LbcpModelSequence *seq);

// Releases a model sequence; null is ignored.
//
// # Safety
// `seq` must come from [`lbcp_model_sequence_from_toml`] and not be used afterwards.
void lbcp_model_sequence_free(struct LbcpModelSequence *seq);

// Loss-based model prior probabilities for sample size n. Writes K + 1
// probabilities to `probs`; `len` must be at least K + 1.
//
// # Safety
// `seq` must be a live handle and `probs` point to `len` writable doubles.
enum LbcpStatus lbcp_model_priors(const struct LbcpModelSequence *seq,
                                  size_t n,
                                  size_t draws,
                                  uint64_t seed,
                                  double *probs,
                                  size_t len);

// Full analysis of `data` under the sequence, returned as a JSON report in
// `out_json` (release with [`lbcp_string_free`]).
//
// # Safety
// `seq` must be a live handle, `data` point to `len` doubles and `out_json`
// be writable.
enum LbcpStatus lbcp_analyze_json(const struct LbcpModelSequence *seq,
                                  const double *data,
                                  size_t len,
                                  enum LbcpMethod method,
                                  size_t draws,
                                  uint64_t seed,
                                  char **out_json);

// Releases a string returned by the library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void lbcp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LBCP_H */
