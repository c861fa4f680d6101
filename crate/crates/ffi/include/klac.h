#ifndef KLAC_H
#define KLAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KlacStatus {
  KLAC_STATUS_OK = 0,
  KLAC_STATUS_INVALID_INPUT = 1,
  KLAC_STATUS_DIMENSION_MISMATCH = 2,
  KLAC_STATUS_PARSE = 3,
  KLAC_STATUS_REFUSED = 4,
  KLAC_STATUS_INFEASIBLE = 5,
  KLAC_STATUS_SIMULATION_FAILURE = 6,
  KLAC_STATUS_IO = 7,
  KLAC_STATUS_NULL_POINTER = 8,
  KLAC_STATUS_BUFFER_TOO_SMALL = 9,
  KLAC_STATUS_INTERNAL = 10,
} KlacStatus;

typedef enum KlacGraphMethod {
  // Repeated circuit reduction; `k` must be a power of two.
  KLAC_GRAPH_METHOD_SCR = 0,
  // Branching followed by minimum subset search.
  KLAC_GRAPH_METHOD_BRANCH_SEARCH = 1,
} KlacGraphMethod;

// A scheme built for one concrete set of client vectors.
typedef struct KlacGraphScheme KlacGraphScheme;

// A universal scheme for given `(T, n, k)`.
typedef struct KlacScheme KlacScheme;

// Privacy figures in bits for one `(m, T, k, s)` point.
typedef struct KlacPrivacyReport {
  double entropy_exact;
  double entropy_approx;
  double mil_upper_exact;
  double mil_upper_asymptotic;
  double mil_conventional_lower;
} KlacPrivacyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into the library from this thread.
const char *klac_last_error(void);

// Library version as a static string.
const char *klac_version(void);

// # Safety
// `s` must come from this library or be null.
void klac_string_free(char *s);

// Minimum number of rows when every client may combine at most `k`.
//
// # Safety
// `out` must be valid for writes.
enum KlacStatus klac_lower_bound(uint64_t t, uint64_t n, uint64_t k, uint64_t *out);

// Builds the universal scheme for `(t, n, k)`.
//
// # Safety
// `out` must be valid for writes.
enum KlacStatus klac_scheme_build(size_t t, uint64_t n, size_t k, struct KlacScheme **out);

// # Safety
// `s` must come from [`klac_scheme_build`] or be null.
void klac_scheme_free(struct KlacScheme *s);

// Number of transmitted rows; 0 for a null handle.
//
// # Safety
// `s` must be a live handle or null.
size_t klac_scheme_rows(const struct KlacScheme *s);

// Row `row` (0-based) of the scheme as a `0`/`1` string.
//
// # Safety
// `s` must be a live handle; `out` must be valid for writes.
enum KlacStatus klac_scheme_row(const struct KlacScheme *s, size_t row, char **out);

// Rows (1-based) that add up to the vector given as a `0`/`1` string.
//
// `len` receives the row count even when `cap` is too small.
//
// # Safety
// `s` must be a live handle, `vector` a nul-terminated string, `rows`
// valid for `cap` writes and `len` valid for one.
enum KlacStatus klac_scheme_reconstruct(const struct KlacScheme *s,
                                        const char *vector,
                                        size_t *rows,
                                        size_t cap,
                                        size_t *len);

// Builds a scheme for the client vectors in `matrix` (one `0`/`1` row per
// line). `node_budget` of 0 leaves the search unbounded.
//
// # Safety
// `matrix` must be a nul-terminated string and `out` valid for writes.
enum KlacStatus klac_graph_scheme_build(const char *matrix,
                                        size_t k,
                                        enum KlacGraphMethod method,
                                        uint64_t node_budget,
                                        struct KlacGraphScheme **out);

// # Safety
// `s` must come from [`klac_graph_scheme_build`] or be null.
void klac_graph_scheme_free(struct KlacGraphScheme *s);

// Number of transmitted rows; 0 for a null handle.
//
// # Safety
// `s` must be a live handle or null.
size_t klac_graph_scheme_rows(const struct KlacGraphScheme *s);

// The transmitted rows in the matrix text format.
//
// # Safety
// `s` must be a live handle and `out` valid for writes.
enum KlacStatus klac_graph_scheme_matrix(const struct KlacGraphScheme *s, char **out);

// Rows (1-based) assigned to `client` (0-based).
//
// # Safety
// As for [`klac_scheme_reconstruct`].
enum KlacStatus klac_graph_scheme_client_rows(const struct KlacGraphScheme *s,
                                              size_t client,
                                              size_t *rows,
                                              size_t cap,
                                              size_t *len);

// # Safety
// `out` must be valid for writes.
enum KlacStatus klac_privacy_report(size_t m,
                                    size_t t,
                                    size_t k,
                                    size_t s,
                                    struct KlacPrivacyReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KLAC_H */
