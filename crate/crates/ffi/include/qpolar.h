#ifndef QPOLAR_H
#define QPOLAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_INVALID_ARGUMENT = 1,
  QP_STATUS_VALIDATION = 2,
  QP_STATUS_DEGENERATE_MESSAGE = 3,
  QP_STATUS_DECODE_FAILURE = 4,
  QP_STATUS_PARSE = 5,
  QP_STATUS_IO = 6,
  QP_STATUS_NULL_POINTER = 7,
  QP_STATUS_PANIC = 8,
} QpStatus;

/**
 * Opaque code handle.
 */
typedef struct QpCode QpCode;

/**
 * Result of one Monte Carlo point.
 */
typedef struct QpSimResult {
  uint64_t trials;
  uint64_t failures;
  double ler;
  double ci95_low;
  double ci95_high;
} QpSimResult;

/**
 * Gate accounting for a code.
 */
typedef struct QpGateReport {
  size_t n;
  size_t precoder_nnz;
  size_t encoder_extra_gates;
  size_t stab_nnz;
  size_t total_gates;
  int64_t delta_vs_unprecoded;
  size_t surface_code_reference;
} QpGateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static nul-terminated string.
 */
const char *qp_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *qp_last_error(void);

/**
 * Reliability-ordered code of length `2^n_exp` with identity precoder.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QpStatus qp_code_construct(uint32_t n_exp, double p, struct QpCode **out);

/**
 * Parses a code document. Structurally invalid codes are rejected with
 * `Validation`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be valid for writes.
 */
enum QpStatus qp_code_from_json(const char *json, struct QpCode **out);

/**
 * Loads a code file from disk.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be valid for writes.
 */
enum QpStatus qp_code_load(const char *path, struct QpCode **out);

/**
 * Writes the code file to disk.
 *
 * # Safety
 * `code` must be a live handle; `path` a nul-terminated string.
 */
enum QpStatus qp_code_save(const struct QpCode *code, const char *path);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `code` must be null or a handle not yet freed.
 */
void qp_code_free(struct QpCode *code);

/**
 * Code length `N`, or 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t qp_code_n(const struct QpCode *code);

/**
 * Number of frozen indices, which is the length of each syndrome half.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t qp_code_frozen_count(const struct QpCode *code);

/**
 * Number of logical indices.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t qp_code_logical_count(const struct QpCode *code);

/**
 * Measures the syndrome of `noise` (N Pauli symbols, `x | z << 1`) into
 * `sx` and `sz`, each of length `qp_code_frozen_count`.
 *
 * # Safety
 * `noise` must hold `n` bytes and `sx`, `sz` `n_frozen` bytes each.
 */
enum QpStatus qp_measure_syndrome(const struct QpCode *code,
                                  const uint8_t *noise,
                                  size_t n,
                                  uint8_t *sx,
                                  uint8_t *sz,
                                  size_t n_frozen);

/**
 * List-decodes a syndrome. Writes the estimated physical noise (N Pauli
 * symbols) to `noise_out` and its path metric to `pm_out` (may be null).
 *
 * # Safety
 * `sx`, `sz` must hold `n_frozen` bytes; `noise_out` must hold `n` bytes.
 */
enum QpStatus qp_decode(const struct QpCode *code,
                        double p,
                        size_t list_size,
                        const uint8_t *sx,
                        const uint8_t *sz,
                        size_t n_frozen,
                        uint8_t *noise_out,
                        size_t n,
                        double *pm_out);

/**
 * Runs `trials` Monte Carlo trials at depolarizing probability `p`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QpStatus qp_simulate(const struct QpCode *code,
                          double p,
                          size_t list_size,
                          uint64_t trials,
                          uint64_t seed,
                          struct QpSimResult *out);

/**
 * Clifford gate accounting.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QpStatus qp_gatecount(const struct QpCode *code, struct QpGateReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPOLAR_H */
