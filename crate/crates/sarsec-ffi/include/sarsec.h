#ifndef SARSEC_H
#define SARSEC_H

/* Generated by cbindgen from crates/sarsec-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for fallible calls.
 */
enum SarsecStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SARSEC_STATUS_OK = 0,
  SARSEC_STATUS_NULL_POINTER = -1,
  SARSEC_STATUS_INVALID_UTF8 = -2,
  SARSEC_STATUS_CONFIG_ERROR = -3,
  SARSEC_STATUS_DOMAIN_ERROR = -4,
  SARSEC_STATUS_MASKED_ACTION = -5,
  SARSEC_STATUS_IO_ERROR = -6,
  SARSEC_STATUS_INTERNAL = -99,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SarsecStatus SarsecStatus;
#else
typedef int32_t SarsecStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque configuration handle.
 */
typedef struct SarsecConfig SarsecConfig;

/**
 * Opaque environment handle (one episode at a time).
 */
typedef struct SarsecEnv SarsecEnv;

/**
 * Opaque eavesdropper-track handle.
 */
typedef struct SarsecTrack SarsecTrack;

/**
 * Per-slot outcome of an environment step.
 */
typedef struct SarsecStepOutcome {
  uint32_t slot;
  uint32_t frame;
  /**
   * 1 = sense, 0 = communicate.
   */
  int32_t action;
  double reward;
  double user_rate;
  double worst_eve_rate;
  double secrecy_rate;
  double alpha;
  double radius_m;
  double scr_frozen_db;
  double eve_speed_mps;
  int32_t scr_penalty_fired;
  int32_t done;
} SarsecStepOutcome;

/**
 * Output of the robust power-split search.
 */
typedef struct SarsecRobustResult {
  double alpha_star;
  double secrecy_rate;
  double worst_theta_rad;
  double worst_distance_m;
  double worst_eve_rate;
  double user_rate;
} SarsecRobustResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns a copy of the last error message on this thread, or NULL if no
 * error occurred. Free with [`sarsec_string_free`].
 */
char *sarsec_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `sarsec_*` function and not yet freed.
 */
void sarsec_string_free(char *s);

/**
 * Built-in default configuration.
 */
struct SarsecConfig *sarsec_config_default(void);

/**
 * Loads the `[system]` section of a configuration file. Returns NULL on
 * failure (see [`sarsec_last_error_message`]).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct SarsecConfig *sarsec_config_load(const char *path);

/**
 * # Safety
 * `cfg` must come from `sarsec_config_default`/`sarsec_config_load` and
 * not have been freed.
 */
void sarsec_config_free(struct SarsecConfig *cfg);

/**
 * Episode horizon in slots.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
uint32_t sarsec_config_slots(const struct SarsecConfig *cfg);

/**
 * Azimuth resolution in meters after `aperture_slots` sensing slots.
 *
 * # Safety
 * `cfg` must be live; `out` must point to a writable double.
 */
SarsecStatus sarsec_azimuth_resolution(const struct SarsecConfig *cfg,
                                       uint32_t aperture_slots,
                                       double *out);

/**
 * Signal-to-clutter ratio in dB after `aperture_slots` sensing slots.
 *
 * # Safety
 * `cfg` must be live; `out` must point to a writable double.
 */
SarsecStatus sarsec_scr_db(const struct SarsecConfig *cfg, uint32_t aperture_slots, double *out);

/**
 * Smallest aperture (slots) whose SCR clears the configured threshold.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
uint32_t sarsec_min_feasible_aperture(const struct SarsecConfig *cfg);

/**
 * Circular track around the user. Returns NULL on invalid parameters.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
struct SarsecTrack *sarsec_track_circular(const struct SarsecConfig *cfg,
                                          double radius_m,
                                          double speed_mps,
                                          uint64_t seed);

/**
 * Straight-line track with sinusoidally oscillating speed.
 *
 * # Safety
 * `cfg` must be live; `start_m` must point to three readable doubles.
 */
struct SarsecTrack *sarsec_track_linear_oscillating(const struct SarsecConfig *cfg,
                                                    double heading_rad,
                                                    double v_lo_mps,
                                                    double v_hi_mps,
                                                    uint32_t period_slots,
                                                    const double *start_m,
                                                    uint64_t seed);

/**
 * Random-acceleration walk confined near the region of interest.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
struct SarsecTrack *sarsec_track_random(const struct SarsecConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `track` must come from a `sarsec_track_*` constructor and not have been
 * freed.
 */
void sarsec_track_free(struct SarsecTrack *track);

/**
 * Number of slots covered by the track.
 *
 * # Safety
 * `track` must be a live track handle.
 */
uint32_t sarsec_track_len(const struct SarsecTrack *track);

/**
 * Ground-truth position at a 1-based slot.
 *
 * # Safety
 * `track` must be live; `out_xyz` must point to three writable doubles.
 */
SarsecStatus sarsec_track_position(const struct SarsecTrack *track, uint32_t slot, double *out_xyz);

/**
 * Creates an episode environment over the given track. The track is
 * reference-counted; the handle may be freed independently.
 *
 * # Safety
 * `cfg` and `track` must be live handles.
 */
struct SarsecEnv *sarsec_env_new(const struct SarsecConfig *cfg,
                                 const struct SarsecTrack *track,
                                 double phase0_rad,
                                 uint64_t seed);

/**
 * # Safety
 * `env` must come from `sarsec_env_new` and not have been freed.
 */
void sarsec_env_free(struct SarsecEnv *env);

/**
 * Resets the episode and writes the 6-component observation.
 *
 * # Safety
 * `env` must be live; `obs_out` must point to six writable doubles.
 */
SarsecStatus sarsec_env_reset(struct SarsecEnv *env, double *obs_out);

/**
 * Current action mask: nonzero means permitted.
 *
 * # Safety
 * All pointers must be valid; `env` must be live.
 */
SarsecStatus sarsec_env_mask(const struct SarsecEnv *env,
                             int32_t *sense_allowed,
                             int32_t *communicate_allowed);

/**
 * Executes one slot (action: 1 = sense, 0 = communicate), writing the
 * next observation and the slot outcome.
 *
 * # Safety
 * `env` must be live; `obs_out` must point to six writable doubles and
 * `outcome_out` to a writable [`SarsecStepOutcome`].
 */
SarsecStatus sarsec_env_step(struct SarsecEnv *env,
                             int32_t action,
                             double *obs_out,
                             struct SarsecStepOutcome *outcome_out);

/**
 * Solves the worst-case power split for an arbitrary geometry: platform
 * at 1-based `slot` with orbit phase `phase0_rad`, last estimate made at
 * `estimate_slot` with `aperture_slots`, centered at `center_m` moving at
 * `velocity_mps`. Pass a negative `radius_m` to derive the uncertainty
 * radius from the model; a nonnegative value overrides it.
 *
 * # Safety
 * `cfg` must be live; `center_m`/`velocity_mps` must point to three
 * readable doubles each; `out` must be writable.
 */
SarsecStatus sarsec_robust_power_allocation(const struct SarsecConfig *cfg,
                                            uint32_t slot,
                                            double phase0_rad,
                                            uint32_t estimate_slot,
                                            uint32_t aperture_slots,
                                            const double *center_m,
                                            const double *velocity_mps,
                                            double radius_m,
                                            struct SarsecRobustResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SARSEC_H */
