#ifndef LTLGROUND_H
#define LTLGROUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_INVALID_UTF8 = 2,
  LG_STATUS_PARSE = 3,
  LG_STATUS_AUTOMATON = 4,
  LG_STATUS_MAP = 5,
  LG_STATUS_DECODE = 6,
  LG_STATUS_OUT_OF_RANGE = 7,
  LG_STATUS_PANIC = 99,
} LgStatus;

typedef struct LgDecoder LgDecoder;

typedef struct LgFormula LgFormula;

typedef struct LgMap LgMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *lg_last_error(void);

/**
 * Library version, static.
 */
const char *lg_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void lg_string_free(char *s);

/**
 * Parses prefix notation (`& F a G ! b`).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum LgStatus lg_formula_parse_prefix(const char *text, struct LgFormula **out);

/**
 * Parses infix notation (`F a & G !b`).
 *
 * # Safety
 * As [`lg_formula_parse_prefix`].
 */
enum LgStatus lg_formula_parse_infix(const char *text, struct LgFormula **out);

/**
 * # Safety
 * `f` must be NULL or a live formula handle.
 */
void lg_formula_free(struct LgFormula *f);

/**
 * # Safety
 * `f` must be a live formula handle; `out` must be writable.
 */
enum LgStatus lg_formula_to_prefix(const struct LgFormula *f, char **out);

/**
 * # Safety
 * As [`lg_formula_to_prefix`].
 */
enum LgStatus lg_formula_to_infix(const struct LgFormula *f, char **out);

/**
 * Language equivalence. On inequivalence, `witness_json` (if not NULL)
 * receives a distinguishing lasso `{"prefix": [...], "cycle": [...]}`;
 * otherwise it is set to NULL.
 *
 * # Safety
 * `a`, `b` must be live formula handles; `equivalent` must be writable;
 * `witness_json` may be NULL.
 */
enum LgStatus lg_formula_equivalent(const struct LgFormula *a,
                                    const struct LgFormula *b,
                                    bool *equivalent,
                                    char **witness_json);

/**
 * # Safety
 * `f` must be a live formula handle; `satisfiable` must be writable.
 */
enum LgStatus lg_formula_satisfiable(const struct LgFormula *f, bool *satisfiable);

/**
 * Catalog template id of the formula up to renaming (`visit_2`, `wait`,
 * ...), or NULL in `out` when it matches none.
 *
 * # Safety
 * `f` must be a live formula handle; `out` must be writable.
 */
enum LgStatus lg_formula_classify(const struct LgFormula *f, char **out);

/**
 * Loads a semantic map from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LgStatus lg_map_load(const char *path, struct LgMap **out);

/**
 * Builds a semantic map from JSON text.
 *
 * # Safety
 * As [`lg_map_load`].
 */
enum LgStatus lg_map_from_json(const char *json, struct LgMap **out);

/**
 * # Safety
 * `m` must be NULL or a live map handle.
 */
void lg_map_free(struct LgMap *m);

/**
 * Plans on `map`. `satisfiable` tells whether a walk exists; `outcome_json`
 * receives either `{"plan": {"prefix": [...], "cycle": [...]}}` or
 * `{"unsatisfiable": {"reason": ...}}`.
 *
 * # Safety
 * `map`, `f` must be live handles; the outputs must be writable.
 */
enum LgStatus lg_plan(const struct LgMap *map,
                      const struct LgFormula *f,
                      bool *satisfiable,
                      char **outcome_json);

/**
 * A decoding session over the operator tokens, the given propositions and
 * an end token. Feed token indices; read the admissible-token mask before
 * each step.
 *
 * # Safety
 * `props` must point to `n_props` NUL-terminated strings; `out` must be writable.
 */
enum LgStatus lg_decoder_new(const char *const *props,
                             size_t n_props,
                             size_t max_height,
                             size_t max_tokens,
                             struct LgDecoder **out);

/**
 * # Safety
 * `d` must be NULL or a live decoder handle.
 */
void lg_decoder_free(struct LgDecoder *d);

/**
 * Vocabulary size; 0 for a NULL handle.
 *
 * # Safety
 * `d` must be NULL or a live decoder handle.
 */
size_t lg_decoder_vocab_size(const struct LgDecoder *d);

/**
 * Text of token `i`, owned by the decoder; NULL when out of range.
 *
 * # Safety
 * `d` must be NULL or a live decoder handle.
 */
const char *lg_decoder_token(const struct LgDecoder *d, size_t i);

/**
 * Writes the admissibility of every token into `mask[0..len]`; `len` must
 * equal the vocabulary size.
 *
 * # Safety
 * `d` must be a live decoder handle; `mask` must have room for `len` bools.
 */
enum LgStatus lg_decoder_allowed(const struct LgDecoder *d, bool *mask, size_t len);

/**
 * Appends token `i`; fails with `Decode` when the mask forbids it.
 *
 * # Safety
 * `d` must be a live decoder handle.
 */
enum LgStatus lg_decoder_feed(struct LgDecoder *d, size_t token);

/**
 * True once the end token has been fed.
 *
 * # Safety
 * `d` must be NULL or a live decoder handle.
 */
bool lg_decoder_finished(const struct LgDecoder *d);

/**
 * The decoded formula, as a new handle.
 *
 * # Safety
 * `d` must be a live decoder handle; `out` must be writable.
 */
enum LgStatus lg_decoder_formula(const struct LgDecoder *d, struct LgFormula **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LTLGROUND_H */
