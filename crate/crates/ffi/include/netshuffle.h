#ifndef NETSHUFFLE_H
#define NETSHUFFLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_ARGUMENT = 2,
  NS_STATUS_SIZE_MISMATCH = 3,
  NS_STATUS_CONFIG = 4,
  NS_STATUS_PARSE = 5,
  NS_STATUS_IO = 6,
  NS_STATUS_NUMERICAL = 7,
  NS_STATUS_PANIC = 8,
} NsStatus;

/**
 * Statistic codes accepted by [`ns_statistic`].
 */
typedef enum NsStatistic {
  NS_STATISTIC_ADJACENCY = 0,
  NS_STATISTIC_PHAT = 1,
  NS_STATISTIC_NORMALIZED = 2,
  NS_STATISTIC_SEMIPAR = 3,
  NS_STATISTIC_OMNI = 4,
} NsStatistic;

typedef struct NsConfig NsConfig;

typedef struct NsGraph NsGraph;

typedef struct NsTable NsTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ns_last_error(void);

const char *ns_version(void);

/**
 * Builds a graph on `n` vertices from `m` pairs stored as `edges[2i], edges[2i+1]`.
 *
 * # Safety
 * `edges` must point to `2 * m` values and `out` must be writable.
 */
enum NsStatus ns_graph_from_edges(size_t n, const size_t *edges, size_t m, struct NsGraph **out);

/**
 * Samples an SBM. `lambda` is `blocks x blocks`, row-major; `sizes` has
 * `blocks` entries.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths; `out` must be writable.
 */
enum NsStatus ns_graph_sample_sbm(const double *lambda,
                                  size_t blocks,
                                  const size_t *sizes,
                                  double nu,
                                  uint64_t seed,
                                  struct NsGraph **out);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ns_graph_vertex_count(const struct NsGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ns_graph_edge_count(const struct NsGraph *g);

/**
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum NsStatus ns_graph_has_edge(const struct NsGraph *g, size_t i, size_t j, bool *out);

/**
 * Relabels `g` by the permutation sending vertex `i` to `mapping[i]`.
 *
 * # Safety
 * `mapping` must hold `n` values where `n` is the vertex count of `g`.
 */
enum NsStatus ns_graph_shuffle(const struct NsGraph *g,
                               const size_t *mapping,
                               size_t n,
                               struct NsGraph **out);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void ns_graph_free(struct NsGraph *g);

/**
 * Evaluates a test statistic; `d` is the embedding dimension (ignored by
 * the adjacency statistic).
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum NsStatus ns_statistic(const struct NsGraph *a,
                           const struct NsGraph *b,
                           uint32_t statistic,
                           size_t d,
                           double *out);

/**
 * `||P - Q_k P Q_k^T||_F^2` for a two-block SBM, in closed form.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths; `out` must be writable.
 */
enum NsStatus ns_sbm_shuffle_distance_sq(const double *lambda,
                                         size_t blocks,
                                         const size_t *sizes,
                                         size_t k,
                                         double *out);

/**
 * Seeded graph matching of `b` onto `a`. Seeds pair `seeds_a[i]` with
 * `seeds_b[i]`. On success `mapping_out[v]` is the label in `a` of vertex
 * `v` of `b`, and `objective_out` receives `||A - Q B Q^T||_F^2`.
 *
 * # Safety
 * Handles must be live; seed arrays hold `n_seeds` values; `mapping_out`
 * holds one value per vertex; `objective_out` may be null.
 */
enum NsStatus ns_sgm(const struct NsGraph *a,
                     const struct NsGraph *b,
                     const size_t *seeds_a,
                     const size_t *seeds_b,
                     size_t n_seeds,
                     size_t restarts,
                     uint64_t seed,
                     size_t *mapping_out,
                     double *objective_out);

/**
 * Loads and validates an experiment config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum NsStatus ns_config_load(const char *path, struct NsConfig **out);

/**
 * Parses a config from JSON text; relative paths resolve against `base_dir`
 * (may be null for the working directory).
 *
 * # Safety
 * Strings must be NUL-terminated and `out` writable.
 */
enum NsStatus ns_config_parse(const char *json, const char *base_dir, struct NsConfig **out);

/**
 * The seed stored in the config.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
uint64_t ns_config_seed(const struct NsConfig *cfg);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void ns_config_free(struct NsConfig *cfg);

/**
 * Runs the experiment with master seed `seed`.
 *
 * # Safety
 * `cfg` must be live and `out` writable.
 */
enum NsStatus ns_run_experiment(const struct NsConfig *cfg, uint64_t seed, struct NsTable **out);

/**
 * # Safety
 * `t` must be null or a live handle.
 */
size_t ns_table_row_count(const struct NsTable *t);

/**
 * Power and level of row `row`.
 *
 * # Safety
 * `t` must be live; `power` and `level` writable.
 */
enum NsStatus ns_table_row_power(const struct NsTable *t, size_t row, double *power, double *level);

/**
 * The table as CSV text. Release the string with [`ns_string_free`].
 *
 * # Safety
 * `t` must be live and `out` writable.
 */
enum NsStatus ns_table_to_csv(const struct NsTable *t, char **out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void ns_table_free(struct NsTable *t);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void ns_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETSHUFFLE_H */
