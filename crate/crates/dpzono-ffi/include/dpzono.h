/* C interface of the dpzono estimation library. */

#ifndef DPZONO_H
#define DPZONO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DpzStatus {
  DPZ_STATUS_OK = 0,
  DPZ_STATUS_NULL_POINTER = 1,
  DPZ_STATUS_INVALID_ARGUMENT = 2,
  DPZ_STATUS_IO = 3,
  DPZ_STATUS_INVALID_DISTRIBUTION = 4,
  DPZ_STATUS_MISALIGNED_SENSITIVITY = 5,
  DPZ_STATUS_DIVERGED = 6,
  DPZ_STATUS_INVALID_UTF8 = 7,
} DpzStatus;

/**
 * Opaque handle to a learned noise distribution.
 */
typedef struct DpzNoise DpzNoise;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; valid until the
 * next failing call on the same thread.
 */
const char *dpz_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned through an out-parameter
 * of this library, not yet freed, or null.
 */
void dpz_string_free(char *s);

/**
 * Learns a truncated noise distribution. `epochs = 0` selects the
 * default budget, `sigmoids = 0` the default model size. On success
 * writes a new handle to `out`.
 *
 * # Safety
 * `out` must be a valid pointer to a `DpzNoise*` slot.
 */
enum DpzStatus dpz_noise_optimize(double epsilon,
                                  double range,
                                  uint32_t bins,
                                  double sensitivity,
                                  uint32_t gamma,
                                  uint64_t seed,
                                  uint32_t epochs,
                                  uint32_t sigmoids,
                                  struct DpzNoise **out);

/**
 * Loads a noise file, re-validating every invariant.
 *
 * # Safety
 * `path` must point to a NUL-terminated string and `out` to a
 * `DpzNoise*` slot.
 */
enum DpzStatus dpz_noise_load(const char *path, struct DpzNoise **out);

/**
 * Writes a noise handle to disk in the library's JSON format.
 *
 * # Safety
 * `noise` must be a live handle and `path` a NUL-terminated string.
 */
enum DpzStatus dpz_noise_save(const struct DpzNoise *noise, const char *path);

/**
 * Releases a noise handle.
 *
 * # Safety
 * `noise` must be a handle from this library, not yet freed, or null.
 */
void dpz_noise_free(struct DpzNoise *noise);

/**
 * Tight privacy slack of the handle's distribution at the requested
 * privacy point.
 *
 * # Safety
 * `noise` must be a live handle and `out` a valid `double` slot.
 */
enum DpzStatus dpz_noise_delta(const struct DpzNoise *noise,
                               double epsilon,
                               double sensitivity,
                               double *out);

/**
 * Utility loss (gamma-th moment norm) of the handle's distribution.
 *
 * # Safety
 * `noise` must be a live handle and `out` a valid `double` slot.
 */
enum DpzStatus dpz_noise_utility(const struct DpzNoise *noise, uint32_t gamma, double *out);

/**
 * Number of grid points (2N) of the handle's distribution.
 *
 * # Safety
 * `noise` must be a live handle and `out` a valid slot.
 */
enum DpzStatus dpz_noise_len(const struct DpzNoise *noise, uintptr_t *out);

/**
 * Copies the grid points and probability masses into caller-provided
 * buffers of capacity `capacity` (at least the value reported by
 * `dpz_noise_len`). Either buffer may be null to skip it.
 *
 * # Safety
 * Non-null buffers must hold at least `capacity` doubles.
 */
enum DpzStatus dpz_noise_values(const struct DpzNoise *noise,
                                double *phi,
                                double *mass,
                                uintptr_t capacity);

/**
 * Draws `len` IID noise values into `out` using a stream seeded with
 * `seed`.
 *
 * # Safety
 * `out` must hold at least `len` doubles.
 */
enum DpzStatus dpz_noise_sample(const struct DpzNoise *noise,
                                uint64_t seed,
                                double *out,
                                uintptr_t len);

/**
 * Truncated-Laplace range for a target `(epsilon, delta)`.
 *
 * # Safety
 * `out` must be a valid `double` slot.
 */
enum DpzStatus dpz_laplace_range(double epsilon, double delta, double sensitivity, double *out);

/**
 * Privacy slack achieved by a truncated Laplace mechanism of range
 * `range`.
 *
 * # Safety
 * `out` must be a valid `double` slot.
 */
enum DpzStatus dpz_laplace_delta(double range, double epsilon, double sensitivity, double *out);

/**
 * Runs the tracking experiment. `config_json` may be null for the
 * bundled scenario; `noise` may be null for a non-private run;
 * `trace_path` may be null to skip the per-step CSV. On success,
 * `out_summary_json` receives the summary as a JSON string (release
 * with `dpz_string_free`).
 *
 * # Safety
 * Non-null pointers must satisfy the conventions above;
 * `out_summary_json` must be a valid `char**` slot.
 */
enum DpzStatus dpz_simulate(const char *config_json,
                            const struct DpzNoise *noise,
                            const char *trace_path,
                            char **out_summary_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPZONO_H */
