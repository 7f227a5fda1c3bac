#ifndef BOUNCE_H
#define BOUNCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BounceStatus {
  BOUNCE_STATUS_OK = 0,
  BOUNCE_STATUS_NULL_POINTER = 1,
  BOUNCE_STATUS_INVALID_UTF8 = 2,
  BOUNCE_STATUS_INVALID_POLYGON = 3,
  BOUNCE_STATUS_UNKNOWN_LABEL = 4,
  BOUNCE_STATUS_INVALID_WORD = 5,
  BOUNCE_STATUS_INFEASIBLE = 6,
  BOUNCE_STATUS_PRECONDITION = 7,
  BOUNCE_STATUS_INCONSISTENT = 8,
  BOUNCE_STATUS_BUDGET_EXHAUSTED = 9,
  BOUNCE_STATUS_SAMPLING_FAILED = 10,
  BOUNCE_STATUS_PARSE = 11,
  BOUNCE_STATUS_NOT_FOUND = 12,
  BOUNCE_STATUS_INTERNAL = 99,
} BounceStatus;

// Opaque table handle.
typedef struct BounceTable BounceTable;

typedef struct BounceAngle {
  // Radians.
  double value;
  // Nonzero when the angle was recognized as `pi * p / q`.
  int32_t exact;
  uint64_t p;
  uint64_t q;
  size_t certified_depth;
} BounceAngle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the outcome of the last call on this thread; empty
// after success. The pointer stays valid until the next call on the thread.
const char *bounce_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void bounce_string_free(char *s);

// Parses a table from JSON text `{"vertices": [[x,y],...], "labels": [...]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum BounceStatus bounce_table_from_json(const char *json, struct BounceTable **out);

// Builds a table from `n` vertices given as `xy[2i], xy[2i+1]` and `n`
// labels, edge `i` running from vertex `i` to vertex `i+1`.
//
// # Safety
// `xy` must hold `2n` doubles, `labels` `n` NUL-terminated strings, and
// `out` must be writable.
enum BounceStatus bounce_table_new(const double *xy,
                                   const char *const *labels,
                                   size_t n,
                                   struct BounceTable **out);

// Destroys a table. Null is ignored.
//
// # Safety
// `t` must come from this library and not have been freed.
void bounce_table_free(struct BounceTable *t);

// Number of edges, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live table.
size_t bounce_table_len(const struct BounceTable *t);

// Whether the comma-separated `word` is realized by some trajectory.
//
// # Safety
// `t` must be a live table, `word` NUL-terminated and `out` writable.
enum BounceStatus bounce_is_realizable(const struct BounceTable *t, const char *word, bool *out);

// Traces `bounces` bounces from `(x, y)` in direction `angle` and returns
// the comma-separated bounce word.
//
// # Safety
// `t` must be a live table and `out` writable.
enum BounceStatus bounce_trace(const struct BounceTable *t,
                               double x,
                               double y,
                               double angle,
                               size_t bounces,
                               char **out);

// Every realizable word up to `max_len`, one per line, sorted.
//
// # Safety
// `t` must be a live table and `out` writable.
enum BounceStatus bounce_language(const struct BounceTable *t, size_t max_len, char **out);

// The square-table bounce code of slope `p/q`.
//
// # Safety
// `out` must be writable.
enum BounceStatus bounce_square_word(uint64_t p, uint64_t q, char **out);

// Estimates the corner angle between edges `a` and `b` using language
// queries only.
//
// # Safety
// `t` must be a live table, `a` and `b` NUL-terminated and `out` writable.
enum BounceStatus bounce_estimate_angle(const struct BounceTable *t,
                                        const char *a,
                                        const char *b,
                                        size_t depth,
                                        struct BounceAngle *out);

// Adjacent edge pairs recovered from the language, one `A B` per line.
//
// # Safety
// `t` must be a live table and `out` writable.
enum BounceStatus bounce_adjacency(const struct BounceTable *t, size_t depth, char **out);

// Certified perturbation radius for newline-separated, comma-separated words.
//
// # Safety
// `t` must be a live table, `words` NUL-terminated and `out` writable.
enum BounceStatus bounce_persistence_radius(const struct BounceTable *t,
                                            const char *words,
                                            double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BOUNCE_H */
