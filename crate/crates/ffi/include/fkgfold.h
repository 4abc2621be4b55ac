/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef FKGFOLD_H
#define FKGFOLD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum FkgStatus {
  FKG_STATUS_OK = 0,
  /*
   A null pointer, bad UTF-8 or an unknown name.
   */
  FKG_STATUS_INVALID_ARGUMENT = 1,
  /*
   Malformed JSON or rationals.
   */
  FKG_STATUS_PARSE = 2,
  /*
   Weights or events do not fit the space.
   */
  FKG_STATUS_INVALID_MEASURE = 3,
  FKG_STATUS_CAP_EXCEEDED = 4,
  FKG_STATUS_FOLDING_UNDEFINED = 5,
  FKG_STATUS_MALFORMED_FOLD_SPEC = 6,
  FKG_STATUS_PRECONDITION_FAILED = 7,
  /*
   A panic was caught at the boundary.
   */
  FKG_STATUS_INTERNAL = 8,
} FkgStatus;

/*
 Opaque measure handle.
 */
typedef struct FkgMeasure FkgMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a measure from its JSON form.

 # Safety
 `json` must be a nul-terminated string; `out` must be writable.
 */
enum FkgStatus fkg_measure_from_json(const char *json, struct FkgMeasure **out);

/*
 Writes the JSON form of a measure; free it with [`fkg_string_free`].

 # Safety
 `m` must be a live handle; `out` must be writable.
 */
enum FkgStatus fkg_measure_to_json(const struct FkgMeasure *m, char **out);

/*
 Number of configurations of the measure's space; 0 for a null handle.

 # Safety
 `m` must be null or a live handle.
 */
uintptr_t fkg_measure_config_count(const struct FkgMeasure *m);

/*
 # Safety
 `m` must be null or a handle not yet freed.
 */
void fkg_measure_free(struct FkgMeasure *m);

/*
 Applies a fold path given as JSON and returns a new handle.

 # Safety
 `m` must be a live handle, `path_json` nul-terminated, `out` writable.
 */
enum FkgStatus fkg_fold(const struct FkgMeasure *m, const char *path_json, struct FkgMeasure **out);

/*
 Runs `fkg`, `pa`, `na`, `nfkg` or `snfkg`. The verdict goes to `verdict`
 and, when `report` is not null, the JSON report to `*report`.

 # Safety
 `m` must be a live handle, `kind` nul-terminated, `verdict` writable and
 `report` null or writable.
 */
enum FkgStatus fkg_check(const struct FkgMeasure *m,
                         const char *kind,
                         bool *verdict,
                         char **report);

/*
 Runs the `fkg-theorem` or `snfkg-rcr` pipeline, like [`fkg_check`].

 # Safety
 As for [`fkg_check`].
 */
enum FkgStatus fkg_pipeline(const struct FkgMeasure *m,
                            const char *kind,
                            bool *verdict,
                            char **report);

/*
 Message of the last failure on this thread, or null. Valid until the next
 failing call on the same thread; do not free.
 */
const char *fkg_last_error(void);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void fkg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FKGFOLD_H */
