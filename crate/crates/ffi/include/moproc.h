#ifndef MOPROC_H
#define MOPROC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpStatus {
  MP_STATUS_OK = 0,
  MP_STATUS_NULL_ARGUMENT = 1,
  MP_STATUS_INVALID_UTF8 = 2,
  /**
   * Program text failed to parse or check.
   */
  MP_STATUS_PARSE = 3,
  /**
   * Unknown id, bad parameter or bad configuration.
   */
  MP_STATUS_INVALID = 4,
  /**
   * Non-finite values during evaluation or optimization.
   */
  MP_STATUS_NUMERIC = 5,
  MP_STATUS_PANIC = 6,
} MpStatus;

typedef struct MpMotion MpMotion;

/**
 * A compiled task plus its parameter overrides.
 */
typedef struct MpTask MpTask;

/**
 * Optimizer settings. `dct_k == 0` selects the identity prior.
 */
typedef struct MpConfig {
  size_t frames;
  double fps;
  size_t dct_k;
  double lr;
  size_t steps;
  size_t restarts;
  uint64_t seed;
  /**
   * Non-zero applies the task's own constraint relaxation.
   */
  int32_t relax;
} MpConfig;

/**
 * Metric values; `constraint_error` is NaN and `success` is -1 when no
 * task was given.
 */
typedef struct MpMetrics {
  double foot_skate_ratio;
  double max_acceleration;
  double constraint_error;
  int32_t success;
  double bone_length_incorrect_ratio;
} MpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on this thread.
 */
const char *mp_last_error(void);

/**
 * Library version as a static string.
 */
const char *mp_version(void);

struct MpConfig mp_config_default(void);

/**
 * Looks up a corpus task by id.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` must be writable.
 */
enum MpStatus mp_task_load(const char *id, struct MpTask **out_task);

/**
 * Compiles program text.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
enum MpStatus mp_task_compile(const char *source, struct MpTask **out_task);

/**
 * # Safety
 * `task` must come from this library and not be used afterwards.
 */
void mp_task_free(struct MpTask *task);

/**
 * Task name as a new string.
 *
 * # Safety
 * `task` must be a live handle; `out` must be writable.
 */
enum MpStatus mp_task_name(const struct MpTask *task, char **out_name);

/**
 * Overrides a float parameter.
 *
 * # Safety
 * `task` must be a live handle and `name` NUL-terminated.
 */
enum MpStatus mp_task_set_float(struct MpTask *task, const char *name, double value);

/**
 * Overrides a vec3 parameter from three doubles.
 *
 * # Safety
 * `task` must be a live handle, `name` NUL-terminated and `xyz` point to
 * three doubles.
 */
enum MpStatus mp_task_set_vec3(struct MpTask *task, const char *name, const double *xyz);

/**
 * Parses a motion JSON document.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum MpStatus mp_motion_from_json(const char *json, struct MpMotion **out_motion);

/**
 * Serializes a motion; free the result with `mp_string_free`.
 *
 * # Safety
 * `motion` must be a live handle; `out` must be writable.
 */
enum MpStatus mp_motion_to_json(const struct MpMotion *motion, char **out_json);

/**
 * # Safety
 * `motion` must be a live handle; `out` must be writable.
 */
enum MpStatus mp_motion_frame_count(const struct MpMotion *motion, size_t *out_frames);

/**
 * # Safety
 * `motion` must come from this library and not be used afterwards.
 */
void mp_motion_free(struct MpMotion *motion);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void mp_string_free(char *s);

/**
 * Task constraint error of a motion, in meters.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum MpStatus mp_constraint_error(const struct MpTask *task,
                                  const struct MpMotion *motion,
                                  double *out_error);

/**
 * Optimizes a motion for `task` and returns it with its constraint error.
 *
 * # Safety
 * `task` must be live, `config` null or valid, outputs writable.
 */
enum MpStatus mp_optimize(const struct MpTask *task,
                          const struct MpConfig *config,
                          struct MpMotion **out_motion,
                          double *out_error);

/**
 * Motion-quality metrics, plus task error and success when `task` is not
 * null.
 *
 * # Safety
 * `motion` must be live, `task` null or live, `out` writable.
 */
enum MpStatus mp_metrics(const struct MpMotion *motion,
                         const struct MpTask *task,
                         struct MpMetrics *out_metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOPROC_H */
