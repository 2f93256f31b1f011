#ifndef FOCKFORGE_H
#define FOCKFORGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every function.
 */
typedef enum FfStatus {
  FF_OK = 0,
  FF_NULL_POINTER = 1,
  FF_INVALID_UTF8 = 2,
  FF_PARSE_ERROR = 3,
  FF_INVALID_ARGUMENT = 4,
  FF_UNKNOWN_MODEL = 5,
  FF_DOMAIN_ERROR = 6,
  FF_CAP_EXCEEDED = 7,
  FF_BUFFER_TOO_SMALL = 8,
  FF_PANIC = 9,
} FfStatus;

/*
 A parsed model with its precomputed index space.
 */
typedef struct FfModel FfModel;

/*
 A Fock state in canonical order.
 */
typedef struct FfState FfState;

/*
 Per-step operation counts of the enumerator circuit.
 */
typedef struct FfGateCounts {
  uint64_t step1;
  uint64_t step2;
  uint64_t step3;
  uint64_t step4;
  uint64_t uncompute;
  uint64_t total;
} FfGateCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy the last error message of this thread into `buf`.

 # Safety
 `buf` must be writable for `len` bytes; `needed` may be null.
 */
enum FfStatus ff_last_error(char *buf, uintptr_t len, uintptr_t *needed);

/*
 Load a builtin model. `k <= 0` keeps the builtin's default cutoffs;
 otherwise light-front models use resolution `k` and equal-time models
 the matched lattice for `k`.

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FfStatus ff_model_builtin(const char *name, int64_t k, struct FfModel **out);

/*
 Parse a model from its text form.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FfStatus ff_model_parse(const char *text, struct FfModel **out);

/*
 # Safety
 `model` must come from this library and not be used afterwards.
 */
void ff_model_free(struct FfModel *model);

/*
 Size of the sparsity-index space.

 # Safety
 Valid handle and output pointer.
 */
enum FfStatus ff_model_index_space_size(const struct FfModel *model, uintptr_t *out);

/*
 Closed-form operation counts of the enumerator circuit.

 # Safety
 Valid handle and output pointer.
 */
enum FfStatus ff_model_gate_counts(const struct FfModel *model, struct FfGateCounts *out);

/*
 Parse a state literal such as `(b,1,3)(b,2,1)`.

 # Safety
 Valid handle, NUL-terminated literal and output pointer.
 */
enum FfStatus ff_state_parse(const struct FfModel *model,
                             const char *literal,
                             struct FfState **out);

/*
 # Safety
 `state` must come from this library and not be used afterwards.
 */
void ff_state_free(struct FfState *state);

/*
 Write the state literal of `state` into `buf`.

 # Safety
 Valid handles; `buf` writable for `len` bytes; `needed` may be null.
 */
enum FfStatus ff_state_format(const struct FfModel *model,
                              const struct FfState *state,
                              char *buf,
                              uintptr_t len,
                              uintptr_t *needed);

/*
 Hex form of the compact encoding of `state`.

 # Safety
 As for [`ff_state_format`].
 */
enum FfStatus ff_state_encode(const struct FfModel *model,
                              const struct FfState *state,
                              char *buf,
                              uintptr_t len,
                              uintptr_t *needed);

/*
 Decode a hex bitstring produced by [`ff_state_encode`].

 # Safety
 Valid handle, NUL-terminated hex and output pointer.
 */
enum FfStatus ff_state_decode(const struct FfModel *model, const char *hex, struct FfState **out);

/*
 Enumerator oracle: the state reached by 1-based index `i` and the flag
 (0 when `i` denotes a nonzero transition, otherwise `i` with the input
 state returned unchanged).

 # Safety
 Valid handles and output pointers.
 */
enum FfStatus ff_enumerate(const struct FfModel *model,
                           const struct FfState *state,
                           uintptr_t i,
                           struct FfState **out_state,
                           uintptr_t *out_flag);

/*
 `⟨to|H|from⟩`.

 # Safety
 Valid handles and output pointer.
 */
enum FfStatus ff_matrix_element(const struct FfModel *model,
                                const struct FfState *from,
                                const struct FfState *to,
                                double *out);

/*
 Number of distinct states connected to `state`.

 # Safety
 Valid handles and output pointer.
 */
enum FfStatus ff_exact_sparsity(const struct FfModel *model,
                                const struct FfState *state,
                                uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOCKFORGE_H */
