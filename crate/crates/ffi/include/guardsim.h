#ifndef GUARDSIM_H
#define GUARDSIM_H

/* Generated by cbindgen from guardsim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every API call.
 */
typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_ARGUMENT = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_INVALID_CONFIG = 3,
  GS_STATUS_IO = 4,
  GS_STATUS_PARSE = 5,
  GS_STATUS_RUN_FAILED = 6,
} GsStatus;

/**
 * Scalar metrics retrievable from a finished run.
 */
typedef enum GsMetric {
  GS_METRIC_DETECTION_RATE = 0,
  GS_METRIC_FALSE_POSITIVE_RATE = 1,
  GS_METRIC_ECS = 2,
  GS_METRIC_AUC = 3,
} GsMetric;

/**
 * Opaque run configuration.
 */
typedef struct GsConfig GsConfig;

/**
 * Opaque trained model (the Q-table).
 */
typedef struct GsModel GsModel;

/**
 * Opaque finished evaluation run: metrics plus the full decision log.
 */
typedef struct GsRun GsRun;

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next API call from the same thread.
 */
const char *gs_last_error(void);

/**
 * Library version as a static string.
 */
const char *gs_version(void);

/**
 * Create a configuration with the documented defaults.
 *
 * # Safety
 * `out` must be a valid pointer to a `GsConfig*` slot.
 */
enum GsStatus gs_config_new(struct GsConfig **out);

/**
 * Load a key=value config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid `GsConfig*` slot.
 */
enum GsStatus gs_config_load(const char *path, struct GsConfig **out);

/**
 * Set one config key (same keys as the config file).
 *
 * # Safety
 * `config` must be a live handle from this library; `key` and `value`
 * NUL-terminated strings.
 */
enum GsStatus gs_config_set(struct GsConfig *config, const char *key, const char *value);

/**
 * Release a config handle. Passing NULL is a no-op.
 *
 * # Safety
 * `config` must be NULL or a handle from this library, not yet freed.
 */
void gs_config_free(struct GsConfig *config);

/**
 * Train the learning agent under `config` and return the trained model.
 *
 * # Safety
 * `config` must be a live handle; `out` a valid `GsModel*` slot.
 */
enum GsStatus gs_train(const struct GsConfig *config, struct GsModel **out);

/**
 * Load a model from a Q-table file produced by `gs_model_save` or the CLI.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid `GsModel*` slot.
 */
enum GsStatus gs_model_load(const char *path, struct GsModel **out);

/**
 * Write the model in the fixed Q-table file layout.
 *
 * # Safety
 * `model` must be a live handle; `path` a NUL-terminated string.
 */
enum GsStatus gs_model_save(const struct GsModel *model, const char *path);

/**
 * Read one Q-value. Class indices: 0 normal, 1 phishing, 2 ransomware,
 * 3 ddos. Action indices: 0 allow, 1 block.
 *
 * # Safety
 * `model` must be a live handle; `out` a valid double slot.
 */
enum GsStatus gs_model_q_value(const struct GsModel *model,
                               uint32_t class_index,
                               uint32_t action_index,
                               double *out);

/**
 * Release a model handle. Passing NULL is a no-op.
 *
 * # Safety
 * `model` must be NULL or a handle from this library, not yet freed.
 */
void gs_model_free(struct GsModel *model);

/**
 * Evaluate a trained model on the unseen evaluation stream of `config`.
 *
 * # Safety
 * `config` and `model` must be live handles; `out` a valid `GsRun*` slot.
 */
enum GsStatus gs_evaluate(const struct GsConfig *config,
                          const struct GsModel *model,
                          struct GsRun **out);

/**
 * Evaluate the rule-based baseline under `config`.
 *
 * # Safety
 * `config` must be a live handle; `out` a valid `GsRun*` slot.
 */
enum GsStatus gs_baseline(const struct GsConfig *config, struct GsRun **out);

/**
 * Recompute metrics from an exported decision-log CSV (replay audit).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid `GsRun*` slot.
 */
enum GsStatus gs_replay(const char *path, struct GsRun **out);

/**
 * Read one scalar metric from a run.
 *
 * # Safety
 * `run` must be a live handle; `out` a valid double slot.
 */
enum GsStatus gs_run_metric(const struct GsRun *run, enum GsMetric metric, double *out);

/**
 * Read the confusion counts from a run. Any output pointer may be NULL to
 * skip that count.
 *
 * # Safety
 * `run` must be a live handle; non-NULL outputs must be valid u64 slots.
 */
enum GsStatus gs_run_counts(const struct GsRun *run,
                            uint64_t *tp,
                            uint64_t *fp,
                            uint64_t *tn,
                            uint64_t *fn_);

/**
 * Number of events in the run.
 *
 * # Safety
 * `run` must be a live handle; `out` a valid u64 slot.
 */
enum GsStatus gs_run_events(const struct GsRun *run, uint64_t *out);

/**
 * Export the run's decision log in the fixed CSV format.
 *
 * # Safety
 * `run` must be a live handle; `path` a NUL-terminated string.
 */
enum GsStatus gs_run_write_csv(const struct GsRun *run, const char *path);

/**
 * Release a run handle. Passing NULL is a no-op.
 *
 * # Safety
 * `run` must be NULL or a handle from this library, not yet freed.
 */
void gs_run_free(struct GsRun *run);

#endif  /* GUARDSIM_H */
