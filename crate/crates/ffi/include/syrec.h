#ifndef SYREC_H
#define SYREC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SyrecStatus {
  SYREC_STATUS_OK = 0,
  SYREC_STATUS_NULL_ARGUMENT = 1,
  SYREC_STATUS_INVALID_UTF8 = 2,
  SYREC_STATUS_COMPILE_ERROR = 3,
  SYREC_STATUS_SYNTHESIS_ERROR = 4,
  SYREC_STATUS_INVALID_INPUT = 5,
  SYREC_STATUS_UNKNOWN_SIGNAL = 6,
  SYREC_STATUS_PANIC = 7,
} SyrecStatus;

typedef enum SyrecMode {
  SYREC_MODE_COST_AWARE = 0,
  SYREC_MODE_LINE_AWARE = 1,
} SyrecMode;

/**
 * A synthesized circuit together with its signal binding.
 */
typedef struct SyrecCircuit SyrecCircuit;

/**
 * Named values produced by [`syrec_simulate`].
 */
typedef struct SyrecValues SyrecValues;

typedef struct SyrecStats {
  size_t lines;
  size_t constants;
  size_t garbage;
  size_t gates;
  uint64_t quantum_cost;
} SyrecStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compiles and synthesizes `source`. On success `*out` receives a new
 * circuit handle; on failure it is set to null.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SyrecStatus syrec_compile(const char *source, enum SyrecMode mode, struct SyrecCircuit **out);

/**
 * Releases a circuit. Null is ignored.
 *
 * # Safety
 * `circuit` must come from [`syrec_compile`] and not be used afterwards.
 */
void syrec_circuit_free(struct SyrecCircuit *circuit);

/**
 * # Safety
 * `circuit` must be a live handle and `out` a valid pointer.
 */
enum SyrecStatus syrec_circuit_stats(const struct SyrecCircuit *circuit, struct SyrecStats *out);

/**
 * Writes the circuit in `.real` format to a new string in `*out`, to be
 * released with [`syrec_string_free`].
 *
 * # Safety
 * `circuit` must be a live handle and `out` a valid pointer.
 */
enum SyrecStatus syrec_circuit_real(const struct SyrecCircuit *circuit, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void syrec_string_free(char *s);

/**
 * Simulates the circuit with `count` named inputs. Every `in`, `inout`
 * and `state` signal must be given. `*out` receives the values of all
 * non-wire signals after the circuit ran.
 *
 * # Safety
 * `names` and `values` must point to `count` elements each (or may be
 * null when `count` is 0); each name must be NUL-terminated.
 */
enum SyrecStatus syrec_simulate(const struct SyrecCircuit *circuit,
                                const char *const *names,
                                const uint64_t *values,
                                size_t count,
                                struct SyrecValues **out);

/**
 * Number of entries, 0 for null.
 *
 * # Safety
 * `values` must be null or a live handle.
 */
size_t syrec_values_len(const struct SyrecValues *values);

/**
 * Name of entry `index`, borrowed from the handle. Null when out of range.
 *
 * # Safety
 * `values` must be null or a live handle.
 */
const char *syrec_values_name(const struct SyrecValues *values, size_t index);

/**
 * Looks a signal up by name.
 *
 * # Safety
 * `values` must be a live handle, `name` NUL-terminated, `out` valid.
 */
enum SyrecStatus syrec_values_get(const struct SyrecValues *values,
                                  const char *name,
                                  uint64_t *out);

/**
 * # Safety
 * `values` must come from [`syrec_simulate`] and not be used afterwards.
 */
void syrec_values_free(struct SyrecValues *values);

/**
 * Message for the most recent failure on this thread, or null. The
 * pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *syrec_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *syrec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYREC_H */
