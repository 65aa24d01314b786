#ifndef YDOF_H
#define YDOF_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum YdofStatus {
  YDOF_STATUS_OK = 0,
  // A required pointer argument was null.
  YDOF_STATUS_NULL_POINTER = 1,
  // Malformed antenna counts, tuple or option.
  YDOF_STATUS_INVALID_ARGUMENT = 2,
  // The tuple lies outside the DoF region.
  YDOF_STATUS_NOT_IN_REGION = 3,
  // The construction does not apply to this tuple or channel draw.
  YDOF_STATUS_INFEASIBLE = 4,
  // A rank or conditioning check failed.
  YDOF_STATUS_NUMERICAL = 5,
  // An index was past the end.
  YDOF_STATUS_OUT_OF_RANGE = 6,
  // Any other failure, including a caught panic.
  YDOF_STATUS_INTERNAL = 7,
} YdofStatus;

// A pattern plan for one tuple.
typedef struct YdofPlan YdofPlan;

// A DoF region with its vertices.
typedef struct YdofRegion YdofRegion;

typedef struct YdofPlanInfo {
  // 1 or 2.
  uint32_t case_label;
  // Symbol-extension factor.
  uint32_t t;
  // Relay dimensions used over the `t` slots.
  uint64_t j;
  uint64_t gamma;
  uint64_t total_streams;
} YdofPlanInfo;

typedef struct YdofMonteCarlo {
  size_t trials;
  size_t successes;
  // Largest recovery error over the trials that produced one.
  double max_error;
} YdofMonteCarlo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *ydof_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void ydof_string_free(char *s);

// Builds the region for antenna counts `m1, m2, m3` and relay antennas `n`.
//
// # Safety
// `out_region` must be writable.
enum YdofStatus ydof_region_new(uint32_t m1,
                                uint32_t m2,
                                uint32_t m3,
                                uint32_t n,
                                struct YdofRegion **out_region);

// # Safety
// `r` must come from [`ydof_region_new`] and not have been freed. Null is
// ignored.
void ydof_region_free(struct YdofRegion *r);

// Exact membership test.
//
// # Safety
// `num` and `den` must point to six values each; `inside` must be writable.
enum YdofStatus ydof_region_contains(const struct YdofRegion *r,
                                     const int64_t *num,
                                     const int64_t *den,
                                     bool *inside);

// # Safety
// `r` must be a live region; `count` must be writable.
enum YdofStatus ydof_region_vertex_count(const struct YdofRegion *r, size_t *count);

// Writes vertex `index` as numerators and denominators.
//
// # Safety
// `num` and `den` must each have room for six values.
enum YdofStatus ydof_region_vertex(const struct YdofRegion *r,
                                   size_t index,
                                   int64_t *num,
                                   int64_t *den);

// Halfspaces and vertices as JSON. Release with [`ydof_string_free`].
//
// # Safety
// `json` must be writable.
enum YdofStatus ydof_region_to_json(const struct YdofRegion *r, char **json);

// Plans a tuple of the region. Fails with `YDOF_STATUS_NOT_IN_REGION` outside it and
// `YDOF_STATUS_INFEASIBLE` when the construction's conditions do not hold.
//
// # Safety
// `r` must be a live region, `num`/`den` six values each, `out_plan`
// writable.
enum YdofStatus ydof_plan_new(const struct YdofRegion *r,
                              const int64_t *num,
                              const int64_t *den,
                              struct YdofPlan **out_plan);

// # Safety
// `p` must come from [`ydof_plan_new`] and not have been freed. Null is
// ignored.
void ydof_plan_free(struct YdofPlan *p);

// # Safety
// `p` must be a live plan; `info` writable.
enum YdofStatus ydof_plan_info(const struct YdofPlan *p, struct YdofPlanInfo *info);

// The full plan as JSON. Release with [`ydof_string_free`].
//
// # Safety
// `p` must be a live plan; `json` writable.
enum YdofStatus ydof_plan_to_json(const struct YdofPlan *p, char **json);

// One noiseless trial with channel seed `seed`: writes the largest relative
// symbol error. A trial that synthesizes but misses the default tolerance
// still returns `YDOF_STATUS_OK`; compare `max_error` yourself.
//
// # Safety
// `p` must be a live plan; `max_error` writable.
enum YdofStatus ydof_simulate_noiseless(const struct YdofPlan *p, uint64_t seed, double *max_error);

// Noiseless trials with seeds `seed_base + i`.
//
// # Safety
// `p` must be a live plan; `result` writable.
enum YdofStatus ydof_monte_carlo_noiseless(const struct YdofPlan *p,
                                           size_t trials,
                                           uint64_t seed_base,
                                           struct YdofMonteCarlo *result);

// Sum-rate slope against `log2 P` for one channel seed over a power grid
// in dB (at least two points).
//
// # Safety
// `grid_db` must point to `len` values; `slope` writable.
enum YdofStatus ydof_rate_slope(const struct YdofPlan *p,
                                uint64_t seed,
                                const double *grid_db,
                                size_t len,
                                double *slope);

// Library version as a static string.
const char *ydof_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YDOF_H */
