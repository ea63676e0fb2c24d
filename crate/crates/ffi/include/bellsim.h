#ifndef BELLSIM_H
#define BELLSIM_H

/* Generated by cbindgen from the bellsim-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum BellsimStatus {
  BELLSIM_STATUS_OK = 0,
  BELLSIM_STATUS_NULL_POINTER = 1,
  BELLSIM_STATUS_DOMAIN = 2,
  BELLSIM_STATUS_RESOURCE_BOUND = 3,
  BELLSIM_STATUS_NO_CONTRACTION = 4,
  BELLSIM_STATUS_CIRCUIT_PARSE = 5,
  BELLSIM_STATUS_INCONSISTENT = 6,
  BELLSIM_STATUS_DIMENSION_MISMATCH = 7,
  BELLSIM_STATUS_INVALID_UTF8 = 8,
  BELLSIM_STATUS_PANIC = 9,
} BellsimStatus;

/**
 * Opaque telecorrection circuit.
 */
typedef struct BellsimCircuit BellsimCircuit;

/**
 * Opaque threshold search result.
 */
typedef struct BellsimThreshold BellsimThreshold;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t bellsim_last_error_message(char *buf, size_t len);

/**
 * Photons consumed by one correction round with the given gate counts.
 */
uint64_t bellsim_resource_cost(uint64_t n_h, uint64_t n_cz, uint64_t n_plus);

/**
 * Closed-form logical Bell measurement success with loss on both qubits.
 *
 * # Safety
 * `out_p` must be null or writable.
 */
enum BellsimStatus bellsim_bm_success_lossy(size_t n, double eta, double *out_p);

/**
 * Closed-form gate-teleportation success with loss on the input only.
 *
 * # Safety
 * `out_p` must be null or writable.
 */
enum BellsimStatus bellsim_gate_teleport_success(size_t n, double eta, double *out_p);

/**
 * Exact logical Bell measurement success averaged over the four inputs.
 *
 * # Safety
 * `out_p` must be null or writable.
 */
enum BellsimStatus bellsim_logical_bm_exact(size_t n, double *out_p);

/**
 * Sampled logical Bell measurement success: mean and standard error.
 *
 * # Safety
 * `mean` and `stderr` must be null or writable.
 */
enum BellsimStatus bellsim_logical_bm_sample(size_t n,
                                             uint64_t trials,
                                             uint64_t seed,
                                             double *mean,
                                             double *stderr);

/**
 * Physical-level rates: phase-flip probability of idle locations and
 * heralded failure probability of H/CZ locations.
 *
 * # Safety
 * `memory_z` and `gate_fail` must be null or writable.
 */
enum BellsimStatus bellsim_level1_error_model(size_t n,
                                              double eta,
                                              double *memory_z,
                                              double *gate_fail);

/**
 * Built-in telecorrection round.
 *
 * # Safety
 * `out_p` must be null or writable.
 */
enum BellsimStatus bellsim_circuit_default(struct BellsimCircuit **out_p);

/**
 * Parses a circuit from its text format.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out_p` null or writable.
 */
enum BellsimStatus bellsim_circuit_parse(const char *text, struct BellsimCircuit **out_p);

/**
 * Number of locations in the circuit.
 *
 * # Safety
 * `circuit` must be null or a live handle; `out_p` null or writable.
 */
enum BellsimStatus bellsim_circuit_location_count(const struct BellsimCircuit *circuit,
                                                  size_t *out_p);

/**
 * Releases a circuit. Null is ignored.
 *
 * # Safety
 * `circuit` must be null or a handle not yet freed.
 */
void bellsim_circuit_free(struct BellsimCircuit *circuit);

/**
 * Bisects the loss threshold. `tolerance <= 0` selects the default search.
 *
 * # Safety
 * `circuit` must be null or a live handle; `out_p` null or writable.
 */
enum BellsimStatus bellsim_find_threshold(const struct BellsimCircuit *circuit,
                                          size_t n,
                                          size_t levels,
                                          uint64_t trials,
                                          uint64_t seed,
                                          double tolerance,
                                          struct BellsimThreshold **out_p);

/**
 * Threshold loss rate of a result.
 *
 * # Safety
 * `result` must be null or a live handle; `out_p` null or writable.
 */
enum BellsimStatus bellsim_threshold_eta(const struct BellsimThreshold *result, double *out_p);

/**
 * Levels recorded on the contracting curve.
 *
 * # Safety
 * `result` must be null or a live handle; `out_p` null or writable.
 */
enum BellsimStatus bellsim_threshold_curve_len(const struct BellsimThreshold *result,
                                               size_t *out_p);

/**
 * Total error rate at `level` (0 = physical) of the contracting curve.
 *
 * # Safety
 * `result` must be null or a live handle; `out_p` null or writable.
 */
enum BellsimStatus bellsim_threshold_curve_total(const struct BellsimThreshold *result,
                                                 size_t level,
                                                 double *out_p);

/**
 * Releases a threshold result. Null is ignored.
 *
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void bellsim_threshold_free(struct BellsimThreshold *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLSIM_H */
