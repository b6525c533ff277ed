#ifndef POSE_CONFIDENCE_H
#define POSE_CONFIDENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `PC_STATUS_OK` is zero; every other value names an error
 * class.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_UTF8 = 2,
  PC_STATUS_PANIC = 3,
  PC_STATUS_INVALID_POSE = 10,
  PC_STATUS_INVALID_THRESHOLD = 11,
  PC_STATUS_INVALID_DIMS = 12,
  PC_STATUS_OUT_OF_BOUNDS = 13,
  PC_STATUS_INVALID_PARAMS = 14,
  PC_STATUS_INVALID_FEATURE_SET = 15,
  PC_STATUS_MISSING_FEATURE = 16,
  PC_STATUS_DIMENSION_MISMATCH = 17,
  PC_STATUS_INSUFFICIENT_DATA = 18,
  PC_STATUS_EMPTY_DATASET = 19,
  PC_STATUS_SINGLE_CLASS_DATA = 20,
  PC_STATUS_NO_POSITIVES = 21,
  PC_STATUS_DEGENERATE_CURVE = 22,
  PC_STATUS_MISSING_GROUND_TRUTH = 23,
  PC_STATUS_EMPTY_CANDIDATES = 24,
  PC_STATUS_TOO_FEW_QUERIES = 25,
  PC_STATUS_SCHEMA_ERROR = 26,
  PC_STATUS_INVARIANT_VIOLATION = 27,
  PC_STATUS_INVALID_CONFIG = 28,
  PC_STATUS_MODEL_FORMAT = 29,
  PC_STATUS_IO = 30,
} PcStatus;

/**
 * A loaded confidence model.
 */
typedef struct PcModel PcModel;

/**
 * A parsed set of pose records.
 */
typedef struct PcRecords PcRecords;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if the last call
 * succeeded. The pointer stays valid until the next call on this thread.
 */
const char *pc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pc_version(void);

/**
 * Translation error (meters, between camera centers) and rotation error
 * (degrees) of an estimated pose. Rotations are 9 row-major values,
 * translations 3 values, both world-to-camera.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths; outputs must be
 * writable.
 */
enum PcStatus pc_pose_error(const double *est_rotation,
                            const double *est_translation,
                            const double *gt_rotation,
                            const double *gt_translation,
                            double *out_translation_error,
                            double *out_rotation_error);

/**
 * Coverage score of `count` inliers given as interleaved `x, y` pixel
 * coordinates in a `width` x `height` image, with the default
 * neighborhood.
 *
 * # Safety
 * `points` must hold `2 * count` values; `out_score` must be writable.
 */
enum PcStatus pc_coverage_score(uint32_t width,
                                uint32_t height,
                                const uint32_t *points,
                                size_t count,
                                double *out_score);

/**
 * Area under the precision-recall curve of `scores` against `labels`.
 *
 * # Safety
 * `scores` and `labels` must each hold `count` values.
 */
enum PcStatus pc_pr_auc(const double *scores, const bool *labels, size_t count, double *out_auc);

/**
 * Parses a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_model_from_json(const char *json, struct PcModel **out);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_model_load(const char *path, struct PcModel **out);

/**
 * Number of raw features the model expects, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t pc_model_feature_count(const struct PcModel *model);

/**
 * Confidence for one raw (unstandardized) feature vector, in the model's
 * feature order.
 *
 * # Safety
 * `model` must be a live handle and `features` must hold `count` values.
 */
enum PcStatus pc_model_predict(const struct PcModel *model,
                               const double *features,
                               size_t count,
                               double *out_confidence);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void pc_model_free(struct PcModel *model);

/**
 * Parses newline-delimited JSON records.
 *
 * # Safety
 * `jsonl` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_records_parse(const char *jsonl, struct PcRecords **out);

/**
 * Loads a record file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_records_load(const char *path, struct PcRecords **out);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `records` must be null or a live handle.
 */
size_t pc_records_len(const struct PcRecords *records);

/**
 * Confidence of every record, written to `out_confidences`, which must
 * have room for exactly `pc_records_len(records)` values.
 *
 * # Safety
 * Handles must be live; `out_confidences` must hold `capacity` values.
 */
enum PcStatus pc_records_score(const struct PcRecords *records,
                               const struct PcModel *model,
                               double *out_confidences,
                               size_t capacity);

/**
 * Per query (in order of first appearance), the index of the record with
 * the highest confidence. Writes at most `capacity` indices and the number
 * of queries to `out_count`.
 *
 * # Safety
 * Handles must be live; `out_indices` must hold `capacity` values.
 */
enum PcStatus pc_records_rerank(const struct PcRecords *records,
                                const struct PcModel *model,
                                size_t *out_indices,
                                size_t capacity,
                                size_t *out_count);

/**
 * Releases a record set. Null is ignored.
 *
 * # Safety
 * `records` must be null or a handle not yet freed.
 */
void pc_records_free(struct PcRecords *records);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSE_CONFIDENCE_H */
