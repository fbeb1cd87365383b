#ifndef CARNOT_H
#define CARNOT_H

/* Generated by cbindgen from carnot-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 ABI version; bump on any breaking change to this surface.
 */
#define CARNOT_ABI_VERSION 1

/*
 Status codes returned by every fallible call.
 */
typedef enum CarnotStatus {
  CARNOT_STATUS_OK = 0,
  /*
   The built-in example suite found a mismatch.
   */
  CARNOT_STATUS_EXPECTATION_MISMATCH = 1,
  /*
   Malformed input: bad JSON, unknown names, dimension mismatches.
   */
  CARNOT_STATUS_INVALID_INPUT = 2,
  /*
   A budget or certification failure during computation.
   */
  CARNOT_STATUS_COMPUTE_FAILED = 3,
  CARNOT_STATUS_NULL_POINTER = 4,
  CARNOT_STATUS_INTERNAL_PANIC = 5,
} CarnotStatus;

/*
 Opaque handle to a validated structure model.
 */
typedef struct carnot_model {
  uint8_t _private[0];
} carnot_model;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 The ABI version compiled into the library.
 */
uint32_t carnot_abi_version(void);

/*
 Message for the most recent error on this thread, as a NUL-terminated
 string owned by the library; valid until the next failing call.
 */
const char *carnot_last_error(void);

/*
 Parse a JSON model document.

 # Safety
 `json` must point to a NUL-terminated string and `out` to a writable
 pointer slot. On success `*out` owns the model; release it with
 `carnot_model_free`.
 */
enum CarnotStatus carnot_model_parse_json(const char *json, struct carnot_model **out);

/*
 Instantiate a built-in model by name; `k` parametrizes the
 five-dimensional family and is ignored elsewhere.

 # Safety
 `name` must be NUL-terminated and `out` writable; see
 `carnot_model_parse_json`.
 */
enum CarnotStatus carnot_model_builtin(const char *name, uint32_t k, struct carnot_model **out);

/*
 Dimension of the ambient space, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle from this library.
 */
uint32_t carnot_model_dim(const struct carnot_model *model);

/*
 Release a model handle.

 # Safety
 `model` must be null or a pointer previously returned by a constructor
 of this library, not yet freed.
 */
void carnot_model_free(struct carnot_model *model);

/*
 Run a command against a model and return the full JSON report.

 `command` is one of `flags|strata|nu|rho|verdict|quad|ballbox|examples`;
 `options_json` may be null or a JSON object with the same option names
 as the CLI flags. `model` may be null only for `examples`.

 # Safety
 Pointer arguments must be null or valid NUL-terminated strings / live
 handles; `out_report` must be writable. On success `*out_report` owns a
 NUL-terminated JSON document; release it with `carnot_string_free`.
 */
enum CarnotStatus carnot_run_json(const struct carnot_model *model,
                                  const char *command,
                                  const char *options_json,
                                  char **out_report);

/*
 Release a string returned by this library.

 # Safety
 `s` must be null or a pointer previously returned by this library, not
 yet freed.
 */
void carnot_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARNOT_H */
