#ifndef SIGNCONE_H
#define SIGNCONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The first four match the exit codes of the command line tool.
typedef enum SignconeStatus {
  SIGNCONE_STATUS_OK = 0,
  SIGNCONE_STATUS_VALIDATION = 1,
  SIGNCONE_STATUS_NUMERIC = 2,
  SIGNCONE_STATUS_INTERNAL = 3,
  SIGNCONE_STATUS_NULL_POINTER = 4,
  SIGNCONE_STATUS_INVALID_UTF8 = 5,
  SIGNCONE_STATUS_PANIC = 6,
} SignconeStatus;

// Opaque handle to a validated problem.
typedef struct SignconeProblem SignconeProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and validates a problem given as JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SignconeStatus signcone_problem_from_json(const char *json, struct SignconeProblem **out);

// Loads and validates a problem file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SignconeStatus signcone_problem_from_file(const char *path, struct SignconeProblem **out);

// Releases a handle. Null is accepted.
//
// # Safety
// `problem` must come from a `signcone_problem_from_*` call and not be used afterwards.
void signcone_problem_free(struct SignconeProblem *problem);

// Writes the constants report (c, m, refined m, M) as JSON into `*out`.
//
// # Safety
// `problem` must be a live handle; `out` must be writable. Free the result
// with [`signcone_string_free`].
enum SignconeStatus signcone_constants_json(const struct SignconeProblem *problem, char **out);

// Writes the full certificate report as JSON into `*out`.
//
// # Safety
// As for [`signcone_constants_json`].
enum SignconeStatus signcone_certify_json(const struct SignconeProblem *problem, char **out);

// Runs the multistart solver and writes its report as JSON into `*out`.
//
// # Safety
// As for [`signcone_constants_json`].
enum SignconeStatus signcone_solve_json(const struct SignconeProblem *problem, char **out);

// Frees a string returned by this library. Null is accepted.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void signcone_string_free(char *s);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library from this thread.
const char *signcone_last_error(void);

// Library version as a static string.
const char *signcone_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGNCONE_H */
