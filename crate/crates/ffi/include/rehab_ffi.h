#ifndef REHAB_FFI_H
#define REHAB_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RkStatus {
  RK_STATUS_OK = 0,
  RK_STATUS_NULL_POINTER = 1,
  RK_STATUS_INVALID_UTF8 = 2,
  RK_STATUS_INVALID_ARGUMENT = 3,
  RK_STATUS_PARSE = 4,
  RK_STATUS_NOT_FOUND = 5,
  RK_STATUS_SCHEMA = 6,
  RK_STATUS_IO = 7,
  RK_STATUS_ANALYSIS = 8,
  RK_STATUS_BUFFER_TOO_SMALL = 9,
  RK_STATUS_PANIC = 10,
} RkStatus;

/**
 * Parsed motion capture.
 */
typedef struct RkCapture RkCapture;

/**
 * Read-only view of a session store.
 */
typedef struct RkStore RkStore;

/**
 * SPARC parameters; `omega_c_max` in rad/s.
 */
typedef struct RkSparcParams {
  double omega_c_max;
  double amplitude_threshold;
  size_t pad_factor;
} RkSparcParams;

typedef struct RkTrialMetrics {
  double duration_s;
  double analysis_start_s;
  double mean_speed_mps;
  double smoothness;
  double autocorr_score;
  size_t n_cycles;
  size_t n_submovements;
  size_t skipped_submovements;
} RkTrialMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rk_last_error(void);

struct RkSparcParams rk_sparc_params_default(void);

/**
 * Parse `.trc` text.
 */
enum RkStatus rk_capture_parse(const char *text, struct RkCapture **out);

/**
 * Parse a `.trc` file.
 */
enum RkStatus rk_capture_parse_file(const char *path, struct RkCapture **out);

void rk_capture_free(struct RkCapture *capture);

size_t rk_capture_num_frames(const struct RkCapture *capture);

size_t rk_capture_num_markers(const struct RkCapture *capture);

double rk_capture_rate(const struct RkCapture *capture);

/**
 * Copy one coordinate channel, in meters, into `buf`.
 *
 * `axis` is 0, 1 or 2 for x, y, z. `*out_len` receives the channel length;
 * when it exceeds `len` nothing is copied and `BufferTooSmall` is returned,
 * so a call with `len = 0` queries the size.
 */
enum RkStatus rk_capture_channel(const struct RkCapture *capture,
                                 const char *joint,
                                 uint32_t axis,
                                 double *buf,
                                 size_t len,
                                 size_t *out_len);

/**
 * SPARC of a speed profile. `params` may be null for defaults.
 */
enum RkStatus rk_sparc(const double *speed,
                       size_t n,
                       double rate,
                       const struct RkSparcParams *params,
                       double *out);

/**
 * Mean absolute normalized auto-correlation over all lags.
 */
enum RkStatus rk_autocorr_score(const double *samples, size_t n, double rate, double *out);

/**
 * Run the trial pipeline on a capture. `joint` may be null for HandRight;
 * `params` may be null for defaults.
 */
enum RkStatus rk_analyze_capture(const struct RkCapture *capture,
                                 double tempo_bpm,
                                 double beat_offset_s,
                                 const char *joint,
                                 const struct RkSparcParams *params,
                                 struct RkTrialMetrics *out);

/**
 * Open a store directory for reading with default SPARC parameters.
 */
enum RkStatus rk_store_open(const char *root, struct RkStore **out);

void rk_store_free(struct RkStore *store);

/**
 * Trial metrics as JSON, identical to the HTTP `/metrics` body. Release
 * with [`rk_string_free`].
 */
enum RkStatus rk_store_trial_metrics_json(const struct RkStore *store,
                                          const char *session_id,
                                          const char *trial_id,
                                          char **out);

/**
 * All chart payloads of a trial as a JSON array. Release with
 * [`rk_string_free`].
 */
enum RkStatus rk_store_trial_charts_json(const struct RkStore *store,
                                         const char *session_id,
                                         const char *trial_id,
                                         char **out);

void rk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REHAB_FFI_H */
