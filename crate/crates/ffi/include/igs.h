#ifndef IGS_H
#define IGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IgsMode {
  IGS_MODE_SINGLE = 0,
  IGS_MODE_UNIFORM = 1,
  IGS_MODE_SELECTION = 2,
} IgsMode;

typedef enum IgsModel {
  IGS_MODEL_IC = 0,
  IGS_MODEL_LT = 1,
} IgsModel;

typedef enum IgsStatus {
  IGS_STATUS_OK = 0,
  IGS_STATUS_NULL_POINTER = 1,
  IGS_STATUS_INVALID_INPUT = 2,
  IGS_STATUS_INVALID_PARAMETER = 3,
  IGS_STATUS_PRECONDITION = 4,
  IGS_STATUS_TOO_LARGE = 5,
  IGS_STATUS_RESOURCE_CAP = 6,
  IGS_STATUS_IO = 7,
  IGS_STATUS_INTERNAL = 8,
} IgsStatus;

/**
 * Opaque influence graph.
 */
typedef struct IgsGraph IgsGraph;

/**
 * Opaque collection of RR sets.
 */
typedef struct IgsSample IgsSample;

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *igs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *igs_version(void);

/**
 * Parses an edge list (`<src> <dst> <value>` lines) held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum IgsStatus igs_graph_parse(const char *text, enum IgsModel m, struct IgsGraph **out);

/**
 * Reads an edge list file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum IgsStatus igs_graph_load(const char *path, enum IgsModel m, struct IgsGraph **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t igs_graph_node_count(const struct IgsGraph *graph);

/**
 * Releases a graph; null is ignored.
 *
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void igs_graph_free(struct IgsGraph *graph);

/**
 * Samples `t` RR sets; identical for any `workers` value.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be valid for writes.
 */
enum IgsStatus igs_sample_rr_sets(const struct IgsGraph *graph,
                                  uint64_t t,
                                  uint64_t seed,
                                  size_t workers,
                                  struct IgsSample **out);

/**
 * Number of RR sets, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t igs_sample_len(const struct IgsSample *sample);

/**
 * Releases a sample; null is ignored.
 *
 * # Safety
 * `sample` must be null or a handle not yet freed.
 */
void igs_sample_free(struct IgsSample *sample);

/**
 * Estimated centrality of `nodes[0..len]` over a sample.
 *
 * # Safety
 * `sample` must be a live handle, `nodes` readable for `len` values, `out` writable.
 */
enum IgsStatus igs_hat_phi(const struct IgsSample *sample,
                           const uint32_t *nodes_ptr,
                           size_t len,
                           double *out);

/**
 * Exact Group Shapley value by enumeration (small graphs only).
 *
 * # Safety
 * `graph` must be a live handle, `nodes` readable for `len` values, `out` writable.
 */
enum IgsStatus igs_exact_group_shapley(const struct IgsGraph *graph,
                                       const uint32_t *nodes_ptr,
                                       size_t len,
                                       double *out);

/**
 * Number of RR sets the given accuracy target requires.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IgsStatus igs_required_sample_size(size_t n,
                                        double epsilon,
                                        double c,
                                        size_t k,
                                        enum IgsMode mode,
                                        uint64_t *out);

/**
 * Greedy seed selection. Writes `k` ascending node ids to `seeds` (capacity at least `k`)
 * and the estimated centrality of that set to `hat_phi`.
 *
 * # Safety
 * `graph` must be a live handle, `seeds` writable for `k` values, `hat_phi` writable.
 */
enum IgsStatus igs_max_shapley_group(const struct IgsGraph *graph,
                                     size_t k,
                                     double epsilon,
                                     double c,
                                     uint64_t seed,
                                     size_t workers,
                                     uint32_t *seeds,
                                     double *hat_phi);

#endif  /* IGS_H */
