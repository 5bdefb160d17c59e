#ifndef STACKROUTE_H
#define STACKROUTE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Per-link flow vectors stored in an outcome.
typedef enum SrFlow {
  SR_FLOW_OPTIMAL_AUTONOMOUS = 0,
  SR_FLOW_OPTIMAL_HUMAN = 1,
  SR_FLOW_LEADER = 2,
  SR_FLOW_FOLLOWER = 3,
} SrFlow;

typedef enum SrRegion {
  // Bound is infinite.
  SR_REGION_A0 = 0,
  SR_REGION_A1 = 1,
  SR_REGION_LAMBDA_STAR = 2,
  SR_REGION_LAMBDA_PLUS = 3,
} SrRegion;

// Result code of every fallible call.
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or an instance that fails validation.
  SR_STATUS_INVALID_INSTANCE = 3,
  // Parameter outside its domain.
  SR_STATUS_INVALID_ARGUMENT = 4,
  SR_STATUS_NOT_CONVERGED = 5,
  // Caller buffer is shorter than required.
  SR_STATUS_BUFFER_TOO_SMALL = 6,
  SR_STATUS_PANIC = 99,
} SrStatus;

// Opaque network instance.
typedef struct SrInstance SrInstance;

// Opaque result of one Stackelberg game.
typedef struct SrOutcome SrOutcome;

typedef struct SrBound {
  // `INFINITY` in region `A0`.
  double value;
  enum SrRegion region;
} SrBound;

// Solver settings. Zero fields fall back to the library defaults.
typedef struct SrSolverOptions {
  double relative_gap_tol;
  uint64_t max_iterations;
  uint64_t multistart_count;
  uint64_t seed;
} SrSolverOptions;

typedef struct SrSummary {
  double alpha;
  double optimal_cost;
  double induced_cost;
  double empirical_poa;
  double wardrop_gap;
  bool optimum_certified;
  bool follower_converged;
  uint32_t repair_rounds;
} SrSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into this library from the same thread.
const char *sr_last_error(void);

// Library version as a static NUL-terminated string.
const char *sr_version(void);

// Parse and validate an instance from JSON text.
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum SrStatus sr_instance_from_json(const char *json, struct SrInstance **out);

// # Safety
// `instance` must come from [`sr_instance_from_json`] and not be freed
// already. NULL is ignored.
void sr_instance_free(struct SrInstance *instance);

// Number of links; 0 for NULL.
//
// # Safety
// `instance` must be a live handle or NULL.
size_t sr_instance_link_count(const struct SrInstance *instance);

// Smallest `a / h` over all links.
//
// # Safety
// `instance` must be a live handle; `mu` must be writable.
enum SrStatus sr_instance_min_asymmetry(const struct SrInstance *instance, double *mu);

// Worst-case price of anarchy under SCALE at autonomy fraction `alpha`
// and asymmetry `mu`.
//
// # Safety
// `out` must be writable.
enum SrStatus sr_poa_bound(double alpha, double mu, struct SrBound *out);

// Library defaults, for callers that want to tweak one field.
struct SrSolverOptions sr_solver_options_default(void);

// Play the SCALE Stackelberg game. An outcome whose solvers stopped short
// is still returned with `SR_STATUS_OK`; check the flags in its summary.
//
// # Safety
// `instance` must be a live handle, `opts` NULL or readable, `out` writable.
enum SrStatus sr_play(const struct SrInstance *instance,
                      const struct SrSolverOptions *opts,
                      struct SrOutcome **out);

// # Safety
// `outcome` must come from [`sr_play`] and not be freed already. NULL is
// ignored.
void sr_outcome_free(struct SrOutcome *outcome);

// # Safety
// `outcome` must be a live handle; `out` must be writable.
enum SrStatus sr_outcome_summary(const struct SrOutcome *outcome, struct SrSummary *out);

// Copy one per-link flow vector into `buf`, in instance link order.
// `len` is the buffer capacity; the link count is written to `written`
// when it is non-NULL, including on `SR_STATUS_BUFFER_TOO_SMALL`.
//
// # Safety
// `outcome` must be a live handle and `buf` valid for `len` doubles.
enum SrStatus sr_outcome_link_flows(const struct SrOutcome *outcome,
                                    enum SrFlow which,
                                    double *buf,
                                    size_t len,
                                    size_t *written);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* STACKROUTE_H */
