#ifndef CYCMZV_H
#define CYCMZV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Binary operations for [`cycmzv_elem_binop`].
typedef enum CycmzvOp {
  CYCMZV_OP_ADD = 0,
  CYCMZV_OP_SUB = 1,
  CYCMZV_OP_MUL = 2,
  CYCMZV_OP_DIV = 3,
} CycmzvOp;

// Rings for [`cycmzv_verify_relation`].
typedef enum CycmzvRing {
  // Finite values: truncated sums mod p.
  CYCMZV_RING_A = 0,
  // Cyclotomic values: z_p(k; ζ_p) mod (p).
  CYCMZV_RING_ACYC = 1,
} CycmzvRing;

// Result codes.
typedef enum CycmzvStatus {
  CYCMZV_STATUS_OK = 0,
  CYCMZV_STATUS_NULL_POINTER = 1,
  CYCMZV_STATUS_INVALID_ARGUMENT = 2,
  CYCMZV_STATUS_PARSE = 3,
  CYCMZV_STATUS_LEVEL_MISMATCH = 4,
  CYCMZV_STATUS_DIVISION_BY_ZERO = 5,
  CYCMZV_STATUS_NOT_PRIME = 6,
  CYCMZV_STATUS_PRIME_EXCLUDED = 7,
  CYCMZV_STATUS_NOT_CONVERGED = 8,
  CYCMZV_STATUS_INTERNAL = 9,
  CYCMZV_STATUS_PANIC = 10,
} CycmzvStatus;

// An element of a cyclotomic field Q(ζ_n).
typedef struct CycmzvElem CycmzvElem;

// A combination of indices with powers of ħ and rational coefficients.
typedef struct CycmzvHPoly CycmzvHPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *cycmzv_last_error(void);

// Library version as a static string.
const char *cycmzv_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cycmzv_string_free(char *s);

// Exact value `z_n(k; ζ_n)` (or `z★` when `star`) for an index written as
// `"k1,k2,..."`.
//
// # Safety
// `index` must be a nul-terminated string; `out` must be writable.
enum CycmzvStatus cycmzv_z_exact(const char *index, uint32_t n, bool star, struct CycmzvElem **out);

// Parses an element from its JSON form `{"n": N, "coeffs": ["p/q", ...]}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum CycmzvStatus cycmzv_elem_from_json(const char *json, struct CycmzvElem **out);

// Releases an element. NULL is ignored.
//
// # Safety
// `e` must come from this library and not have been freed.
void cycmzv_elem_free(struct CycmzvElem *e);

// Level `n` of the field containing `e`.
//
// # Safety
// `e` must be a live handle; `out` must be writable.
enum CycmzvStatus cycmzv_elem_level(const struct CycmzvElem *e, uint32_t *out);

// JSON form of `e`; release with [`cycmzv_string_free`].
//
// # Safety
// `e` must be a live handle; `out` must be writable.
enum CycmzvStatus cycmzv_elem_to_json(const struct CycmzvElem *e, char **out);

// Exact equality.
//
// # Safety
// `a`, `b` must be live handles; `out` must be writable.
enum CycmzvStatus cycmzv_elem_equal(const struct CycmzvElem *a,
                                    const struct CycmzvElem *b,
                                    bool *out);

// `a op b` in the same field; fails with `LEVEL_MISMATCH` otherwise.
//
// # Safety
// `a`, `b` must be live handles; `out` must be writable.
enum CycmzvStatus cycmzv_elem_binop(const struct CycmzvElem *a,
                                    enum CycmzvOp op,
                                    const struct CycmzvElem *b,
                                    struct CycmzvElem **out);

// Complex value of `e` under `ζ_n ↦ e^{2πi·exponent/n}`, computed with
// `precision` bits and returned as doubles.
//
// # Safety
// `e` must be a live handle; `re`, `im` must be writable.
enum CycmzvStatus cycmzv_elem_embed(const struct CycmzvElem *e,
                                    int64_t exponent,
                                    size_t precision,
                                    double *re,
                                    double *im);

// Parses a combination from JSON: a list of
// `{"index": "k1,k2", "hbar": d, "coeff": "p/q"}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum CycmzvStatus cycmzv_hpoly_from_json(const char *json, struct CycmzvHPoly **out);

// Releases a combination. NULL is ignored.
//
// # Safety
// `w` must come from this library and not have been freed.
void cycmzv_hpoly_free(struct CycmzvHPoly *w);

// Human-readable form, e.g. `e(4,1) - 2*e(3,1,1)`.
//
// # Safety
// `w` must be a live handle; `out` must be writable.
enum CycmzvStatus cycmzv_hpoly_to_string(const struct CycmzvHPoly *w, char **out);

// Evaluates `w` at every prime in `[lo, hi]` and sets `holds` when it
// vanishes at all non-excluded primes. When `report` is non-NULL it
// receives the per-prime JSON report (release with
// [`cycmzv_string_free`]).
//
// # Safety
// `w` must be a live handle; `holds` must be writable; `report` may be
// NULL.
enum CycmzvStatus cycmzv_verify_relation(const struct CycmzvHPoly *w,
                                         enum CycmzvRing ring,
                                         bool star,
                                         uint64_t lo,
                                         uint64_t hi,
                                         bool *holds,
                                         char **report);

// Upper bound for the dimension of the weight-`k` value space.
//
// # Safety
// `out` must be writable.
enum CycmzvStatus cycmzv_dimension_bound(uint32_t k, size_t *out);

// `dim_Q` of the span of the exact values `z_p(k; ζ_p)` of weight `k`.
//
// # Safety
// `out` must be writable.
enum CycmzvStatus cycmzv_observed_dimension(uint32_t k, uint32_t p, size_t *out);

// Limit estimate of `z_n(k; e^{2πi/n})` as `n → ∞` over the geometric
// schedule `start, start·factor, …` (`count` levels). Returns
// `NOT_CONVERGED` with the outputs filled in when the error bar does not
// shrink.
//
// # Safety
// `index` must be a nul-terminated string; `re`, `im`, `error_bar` must be
// writable.
enum CycmzvStatus cycmzv_limit(const char *index,
                               uint32_t start,
                               uint32_t factor,
                               uint32_t count,
                               size_t precision,
                               bool star,
                               double *re,
                               double *im,
                               double *error_bar);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYCMZV_H */
