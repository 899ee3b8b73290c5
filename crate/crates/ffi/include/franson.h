#ifndef FRANSON_H
#define FRANSON_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum FransonStatus {
  FRANSON_STATUS_OK = 0,
  FRANSON_STATUS_NULL_POINTER = 1,
  FRANSON_STATUS_INVALID_ARGUMENT = 2,
  FRANSON_STATUS_DOMAIN_ERROR = 3,
  FRANSON_STATUS_NUMERICAL_FAILURE = 4,
  FRANSON_STATUS_PANIC = 5,
} FransonStatus;

/**
 * Key-distribution encoding.
 */
typedef enum FransonScheme {
  FRANSON_SCHEME_PHASE = 0,
  FRANSON_SCHEME_FREQUENCY = 1,
  FRANSON_SCHEME_SIDEBAND = 2,
} FransonScheme;

/**
 * Opaque histogram of gaps between successive timestamps.
 */
typedef struct FransonHistogram FransonHistogram;

/**
 * Opaque two-interferometer coincidence model.
 */
typedef struct FransonModel FransonModel;

/**
 * Opaque list of coincidence timestamps.
 */
typedef struct FransonStream FransonStream;

/**
 * One unbalanced interferometer.
 */
typedef struct FransonArm {
  /**
   * Path difference in metres.
   */
  double delta_l;
  /**
   * Static phase in radians.
   */
  double phase;
  /**
   * Angular frequency shift of the long arm (rad/s).
   */
  double freq_shift;
} FransonArm;

/**
 * Pump and down-converted photon spectrum. Frequencies are angular.
 */
typedef struct FransonSource {
  double pump_freq;
  double pump_bandwidth;
  double photon_bandwidth;
  double pair_rate;
} FransonSource;

/**
 * Parameters of a simulated coincidence stream.
 */
typedef struct FransonProcessParams {
  double mean_interval;
  double visibility;
  /**
   * Angular beat frequency (rad/s).
   */
  double beat_freq;
  double dead_time;
  double duration;
  uint64_t seed;
} FransonProcessParams;

/**
 * Fitted beat parameters. Frequencies are angular.
 */
typedef struct FransonBeatFit {
  double amplitude;
  double amplitude_err;
  double visibility_sq_half;
  double visibility_sq_half_err;
  double beat_freq;
  double beat_freq_err;
  double mean_interval;
  double mean_interval_err;
  double chi2_reduced;
  size_t bins_used;
  size_t iterations;
  /**
   * 1 when no beat rose above the noise; the oscillation terms are then 0.
   */
  uint8_t no_beat_detected;
} FransonBeatFit;

/**
 * Timing window between two detection events.
 */
typedef struct FransonTimeWindow {
  /**
   * Largest lab time difference that keeps both orderings reachable (s).
   */
  double dt_max;
  /**
   * The same window expressed as a path length (m).
   */
  double path_window;
} FransonTimeWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null.
 * The pointer stays valid until the next call into the library from the
 * same thread.
 */
const char *franson_last_error(void);

/**
 * Build a coincidence model.
 *
 * # Safety
 * Pointer arguments must be null or valid; `out` receives a handle to free
 * with [`franson_model_free`].
 */
enum FransonStatus franson_model_new(const struct FransonArm *arm_a,
                                     const struct FransonArm *arm_b,
                                     const struct FransonSource *source,
                                     double accidental_rate,
                                     struct FransonModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`franson_model_new`] not yet freed.
 */
void franson_model_free(struct FransonModel *model);

/**
 * Coincidence probability at lab time `t` for visibility factor `chi`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum FransonStatus franson_model_probability(const struct FransonModel *model,
                                             double chi,
                                             double t,
                                             double *out);

/**
 * Bandwidth-limited visibility factor of the model geometry.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum FransonStatus franson_model_visibility_factor(const struct FransonModel *model, double *out);

/**
 * Sum of the two arm shifts in rad/s.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum FransonStatus franson_model_omega_sum(const struct FransonModel *model, double *out);

/**
 * Simulate a coincidence stream.
 *
 * # Safety
 * `params` must be valid; `out` receives a handle to free with
 * [`franson_stream_free`].
 */
enum FransonStatus franson_stream_generate(const struct FransonProcessParams *params,
                                           struct FransonStream **out);

/**
 * Number of timestamps in the stream. Returns 0 for a null handle.
 *
 * # Safety
 * `stream` must be null or a live handle.
 */
size_t franson_stream_len(const struct FransonStream *stream);

/**
 * Borrowed pointer to the timestamps, valid until the stream is freed.
 *
 * # Safety
 * `stream` must be null or a live handle.
 */
const double *franson_stream_data(const struct FransonStream *stream);

/**
 * # Safety
 * `stream` must be null or a handle not yet freed.
 */
void franson_stream_free(struct FransonStream *stream);

/**
 * Histogram the gaps of a stream over `[lo, hi)`.
 *
 * # Safety
 * `stream` must be a live handle; `out` receives a handle to free with
 * [`franson_histogram_free`].
 */
enum FransonStatus franson_histogram_from_stream(const struct FransonStream *stream,
                                                 double bin_width,
                                                 double lo,
                                                 double hi,
                                                 struct FransonHistogram **out);

/**
 * Histogram the gaps of `len` strictly increasing timestamps.
 *
 * # Safety
 * `times` must be valid for reads of `len` doubles (or null when `len` is 0).
 */
enum FransonStatus franson_histogram_from_times(const double *times,
                                                size_t len,
                                                double bin_width,
                                                double lo,
                                                double hi,
                                                struct FransonHistogram **out);

/**
 * Number of bins. Returns 0 for a null handle.
 *
 * # Safety
 * `hist` must be null or a live handle.
 */
size_t franson_histogram_bins(const struct FransonHistogram *hist);

/**
 * Copy up to `len` bin counts into `counts`.
 *
 * # Safety
 * `hist` must be a live handle and `counts` valid for writes of `len` values.
 */
enum FransonStatus franson_histogram_counts(const struct FransonHistogram *hist,
                                            uint64_t *counts,
                                            size_t len);

/**
 * # Safety
 * `hist` must be null or a handle not yet freed.
 */
void franson_histogram_free(struct FransonHistogram *hist);

/**
 * Fit the beat model to a histogram.
 *
 * # Safety
 * `hist` must be a live handle and `out` valid for writes.
 */
enum FransonStatus franson_histogram_fit(const struct FransonHistogram *hist,
                                         struct FransonBeatFit *out);

/**
 * Probability density of a gap `dt` between coincidences.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_interarrival_density(double dt,
                                                double visibility,
                                                double beat_freq,
                                                double mean_interval,
                                                double *out);

/**
 * Visibility left when the detection times resolve `omega_sum` to within
 * `time_resolution`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_eraser_visibility(double omega_sum, double time_resolution, double *out);

/**
 * Longitudinal sound speed from Young's modulus, Poisson ratio and density.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_sound_speed(double young_modulus,
                                       double poisson_ratio,
                                       double density,
                                       double *out);

/**
 * Bragg angle inside the crystal, in radians.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_bragg_angle(double acoustic_freq_hz,
                                       double sound_speed,
                                       double wavelength,
                                       double refractive_index,
                                       double *out);

/**
 * Doppler shift (Hz) of light at `optical_freq_hz` reflected from a sound
 * wave of speed `sound_speed` at angle `theta`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_doppler_shift(double refractive_index,
                                         double sound_speed,
                                         double theta,
                                         double optical_freq_hz,
                                         double *out);

/**
 * Phase slope (rad/m) of a synchronization signal along a cable.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_sync_phase_per_meter(double freq_hz, double signal_speed, double *out);

/**
 * Timing window for a frame moving at `frame_speed` across detectors
 * `separation` metres apart.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_max_time_discrepancy(double frame_speed,
                                                double separation,
                                                struct FransonTimeWindow *out);

/**
 * Visibility predicted by the multisimultaneity model at path offset `x`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_multisim_visibility(double x,
                                               double window,
                                               double sigma,
                                               double v0,
                                               double *out);

/**
 * Time-averaged correlation between the two parties for bases `a` and `b`
 * (each 0 or 1). `omega` is the angular shift unit.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FransonStatus franson_qkd_correlation(enum FransonScheme scheme,
                                           uint8_t basis_a,
                                           uint8_t basis_b,
                                           double omega,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRANSON_H */
