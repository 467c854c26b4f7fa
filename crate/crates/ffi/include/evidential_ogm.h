#ifndef EVIDENTIAL_OGM_H
#define EVIDENTIAL_OGM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EogmLabel {
  EOGM_LABEL_FREE = 0,
  EOGM_LABEL_STATIC = 1,
  EOGM_LABEL_DYNAMIC = 2,
  EOGM_LABEL_OCCUPIED = 3,
  EOGM_LABEL_UNKNOWN = 4,
} EogmLabel;

/**
 * Result of every call.
 */
typedef enum EogmStatus {
  EOGM_STATUS_OK = 0,
  EOGM_STATUS_NULL_POINTER = 1,
  EOGM_STATUS_INVALID_ARGUMENT = 2,
  EOGM_STATUS_OUT_OF_RANGE = 3,
  EOGM_STATUS_IO = 4,
  EOGM_STATUS_FORMAT = 5,
  EOGM_STATUS_TOTAL_CONFLICT = 6,
  EOGM_STATUS_PANIC = 7,
} EogmStatus;

/**
 * Opaque point cloud handle.
 */
typedef struct EogmCloud EogmCloud;

/**
 * Opaque grid handle.
 */
typedef struct EogmGrid EogmGrid;

/**
 * Belief mass over F, O_s, O_d, O_sd and Θ. Components are in [0, 1] and
 * sum to 1.
 */
typedef struct EogmMass {
  double free;
  double stat;
  double dynamic;
  double occupied;
  double unknown;
} EogmMass;

typedef struct EogmIsmConfig {
  double ground_z_min;
  double ground_z_max;
  double free_mass_per_ray;
  double occupied_mass_per_hit;
  double sensor_x;
  double sensor_y;
} EogmIsmConfig;

typedef struct EogmStateCounts {
  uint64_t true_pos;
  uint64_t false_pos;
  uint64_t false_neg;
} EogmStateCounts;

/**
 * Counts per state, in the order F, O_s, O_d, O_sd.
 */
typedef struct EogmConfusion {
  struct EogmStateCounts states[4];
  uint64_t evaluated;
  uint64_t masked;
} EogmConfusion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null, never freed.
 */
const char *eogm_status_str(enum EogmStatus status);

/**
 * Message for the last failed call on this thread, empty after a success.
 * Valid until the next call into this library from the same thread.
 */
const char *eogm_last_error(void);

/**
 * Maps non-negative class evidence to a belief mass.
 *
 * # Safety
 * `out` must be null or point to writable storage for one `EogmMass`.
 */
enum EogmStatus eogm_evidence_to_mass(double free,
                                      double stat,
                                      double dynamic,
                                      struct EogmMass *out);

/**
 * Dempster's rule. Fails with `TOTAL_CONFLICT` when the operands share no
 * support.
 *
 * # Safety
 * `a` and `b` must be null or point to valid masses; `out` must be null or
 * writable. `out` may alias either operand.
 */
enum EogmStatus eogm_combine(const struct EogmMass *a,
                             const struct EogmMass *b,
                             struct EogmMass *out);

/**
 * # Safety
 * `m` must be null or point to a valid mass; `out` must be null or writable.
 */
enum EogmStatus eogm_classify(const struct EogmMass *m, double threshold, enum EogmLabel *out);

/**
 * Creates a vacuous grid centred on the origin.
 *
 * # Safety
 * `out` must be null or writable. On success `*out` owns a grid that must be
 * released with [`eogm_grid_free`].
 */
enum EogmStatus eogm_grid_new(size_t rows, size_t cols, double cell_size, struct EogmGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from this library not freed before.
 */
void eogm_grid_free(struct EogmGrid *grid);

/**
 * Any of the output pointers may be null.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
enum EogmStatus eogm_grid_dims(const struct EogmGrid *grid,
                               size_t *rows,
                               size_t *cols,
                               double *cell_size);

/**
 * # Safety
 * `grid` must be null or a live handle; `out` must be null or writable.
 */
enum EogmStatus eogm_grid_get(const struct EogmGrid *grid,
                              size_t row,
                              size_t col,
                              struct EogmMass *out);

/**
 * # Safety
 * `grid` must be null or a live handle; `mass` must be null or valid.
 */
enum EogmStatus eogm_grid_set(struct EogmGrid *grid,
                              size_t row,
                              size_t col,
                              const struct EogmMass *mass);

/**
 * Combines `mass` into a cell. A totally conflicting deposit leaves the cell
 * unchanged, sets `*conflict` and still returns `OK`.
 *
 * # Safety
 * `grid` must be null or a live handle; `mass` must be null or valid;
 * `conflict` may be null.
 */
enum EogmStatus eogm_grid_deposit(struct EogmGrid *grid,
                                  size_t row,
                                  size_t col,
                                  const struct EogmMass *mass,
                                  bool *conflict);

/**
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable. Free the result with [`eogm_grid_free`].
 */
enum EogmStatus eogm_grid_read(const char *path, struct EogmGrid **out);

/**
 * # Safety
 * `grid` must be null or a live handle; `path` must be null or a
 * NUL-terminated string.
 */
enum EogmStatus eogm_grid_write(const struct EogmGrid *grid, const char *path);

/**
 * # Safety
 * Same as [`eogm_grid_write`].
 */
enum EogmStatus eogm_grid_render_png(const struct EogmGrid *grid, const char *path);

/**
 * # Safety
 * `out` must be null or writable. Free the result with [`eogm_cloud_free`].
 */
enum EogmStatus eogm_cloud_new(struct EogmCloud **out);

/**
 * # Safety
 * `cloud` must be null or a handle from this library not freed before.
 */
void eogm_cloud_free(struct EogmCloud *cloud);

/**
 * Appends one ego-frame return. Non-finite values are rejected.
 *
 * # Safety
 * `cloud` must be null or a live handle.
 */
enum EogmStatus eogm_cloud_push(struct EogmCloud *cloud,
                                double x,
                                double y,
                                double z,
                                double intensity,
                                uint32_t ring);

/**
 * # Safety
 * `cloud` must be null or a live handle; `out` must be null or writable.
 */
enum EogmStatus eogm_cloud_len(const struct EogmCloud *cloud, size_t *out);

/**
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable. Free the result with [`eogm_cloud_free`].
 */
enum EogmStatus eogm_cloud_read(const char *path, struct EogmCloud **out);

/**
 * Coordinates are narrowed to f32 on disk.
 *
 * # Safety
 * `cloud` must be null or a live handle; `path` must be null or a
 * NUL-terminated string.
 */
enum EogmStatus eogm_cloud_write(const struct EogmCloud *cloud, const char *path);

/**
 * Fills `out` with the library defaults.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum EogmStatus eogm_ism_config_default(struct EogmIsmConfig *out);

/**
 * Geometric inverse sensor model on a `rows` x `cols` grid. A null `config`
 * means the defaults.
 *
 * # Safety
 * `cloud` must be null or a live handle; `config` must be null or valid;
 * `out` must be null or writable. Free the result with [`eogm_grid_free`].
 */
enum EogmStatus eogm_ism(const struct EogmCloud *cloud,
                         const struct EogmIsmConfig *config,
                         size_t rows,
                         size_t cols,
                         double cell_size,
                         struct EogmGrid **out);

/**
 * Scores `pred` against `truth` cell by cell. Truth cells whose Θ mass is
 * at least `mask_level` are skipped.
 *
 * # Safety
 * `pred` and `truth` must be null or live handles; `out` must be null or
 * writable.
 */
enum EogmStatus eogm_evaluate_pair(const struct EogmGrid *pred,
                                   const struct EogmGrid *truth,
                                   double threshold,
                                   double mask_level,
                                   struct EogmConfusion *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVIDENTIAL_OGM_H */
