#ifndef OFW_H
#define OFW_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  OFW_STATUS_OK = 0,
  OFW_STATUS_NULL_POINTER = 1,
  OFW_STATUS_INVALID_ARGUMENT = 2,
  OFW_STATUS_DIMENSION_MISMATCH = 3,
  OFW_STATUS_CONTRACT_VIOLATION = 4,
  OFW_STATUS_CONFIG_ERROR = 5,
  OFW_STATUS_RUNTIME_ERROR = 6,
  OFW_STATUS_PANIC = 7,
  OFW_STATUS_INDEX_OUT_OF_RANGE = 8,
} OfwStatus;

/**
 * A validated experiment configuration.
 */
typedef struct OfwExperiment OfwExperiment;

/**
 * Result rows of one experiment run, sorted by scenario, learner and horizon.
 */
typedef struct OfwResults OfwResults;

/**
 * A compact convex feasible set.
 */
typedef struct OfwSet OfwSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *ofw_last_error_message(void);

/**
 * Euclidean ball `{x : ||x - center|| <= radius}`.
 */
OfwStatus ofw_set_ball(const double *center, size_t dimension, double radius, OfwSet **out);

/**
 * Box `{x : lower <= x <= upper}`.
 */
OfwStatus ofw_set_box(const double *lower, const double *upper, size_t dimension, OfwSet **out);

/**
 * Probability simplex in `dimension >= 2` coordinates.
 */
OfwStatus ofw_set_simplex(size_t dimension, OfwSet **out);

/**
 * `{x : ||x||_1 <= radius}`.
 */
OfwStatus ofw_set_l1_ball(size_t dimension, double radius, OfwSet **out);

void ofw_set_free(OfwSet *set);

OfwStatus ofw_set_dimension(const OfwSet *set, size_t *out);

OfwStatus ofw_set_diameter(const OfwSet *set, double *out);

/**
 * Writes `argmin_{v in K} <direction, v>` to `out` (length `dimension`).
 */
OfwStatus ofw_set_lmo(const OfwSet *set, const double *direction, size_t dimension, double *out);

/**
 * Writes the Euclidean projection of `point` to `out`.
 */
OfwStatus ofw_set_project(const OfwSet *set, const double *point, size_t dimension, double *out);

OfwStatus ofw_set_contains(const OfwSet *set,
                           const double *point,
                           size_t dimension,
                           double tolerance,
                           bool *out);

/**
 * Radius of the largest ball around `point` inside the set.
 */
OfwStatus ofw_set_interior_radius(const OfwSet *set,
                                  const double *point,
                                  size_t dimension,
                                  double *out);

/**
 * Closed-form Frank-Wolfe line-search step in `[0, 1]`.
 */
OfwStatus ofw_line_search_sigma(const double *gradient,
                                const double *x,
                                const double *v,
                                size_t dimension,
                                double alpha,
                                double *out);

/**
 * Inner iterations `K` and contraction factor `C` for the multi-update learner.
 */
OfwStatus ofw_compute_k(double alpha,
                        double beta_f,
                        double diameter,
                        double interior_radius,
                        double bound_m,
                        size_t *k_out,
                        double *c_out);

/**
 * Parses and validates a TOML experiment configuration.
 */
OfwStatus ofw_experiment_parse(const char *config, OfwExperiment **out);

void ofw_experiment_free(OfwExperiment *experiment);

/**
 * Runs every scenario. Rows that failed at run time are still returned.
 */
OfwStatus ofw_experiment_run(const OfwExperiment *experiment, OfwResults **out);

void ofw_results_free(OfwResults *results);

OfwStatus ofw_results_len(const OfwResults *results, size_t *out);

/**
 * Dynamic regret of row `index`. Fails with `RuntimeError` for a row whose
 * run failed; the message then carries the diagnostic.
 */
OfwStatus ofw_results_regret(const OfwResults *results, size_t index, double *out);

/**
 * Renders the rows as CSV. Release the string with [`ofw_string_free`].
 */
OfwStatus ofw_results_to_csv(const OfwResults *results, char **out);

void ofw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFW_H */
