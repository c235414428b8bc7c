#ifndef OMEGAMB_H
#define OMEGAMB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmStatus {
  OM_STATUS_OK = 0,
  OM_STATUS_NULL_POINTER = 1,
  OM_STATUS_INVALID_UTF8 = 2,
  OM_STATUS_INVALID_INPUT = 3,
  OM_STATUS_PANIC = 4,
} OmStatus;

/**
 * A Büchi pushdown automaton.
 */
typedef struct OmBpda OmBpda;

/**
 * A context-free grammar.
 */
typedef struct OmCfg OmCfg;

/**
 * A 2-tape Büchi automaton.
 */
typedef struct OmRelation OmRelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next call.
 */
const char *om_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void om_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string, `out` writable.
 */
enum OmStatus om_cfg_from_json(const char *json, struct OmCfg **out);

/**
 * # Safety
 * `g` must come from `om_cfg_from_json` or be null.
 */
void om_cfg_free(struct OmCfg *g);

/**
 * Writes `{"kind": "Exact"|"MoreThan"|"Infinite", "value": n}`.
 *
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_cfg_parse_count(const struct OmCfg *g,
                                 const char *word,
                                 uint64_t cap,
                                 char **out_json);

/**
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_adherence_member(const struct OmCfg *g, const char *lasso_word, bool *out);

/**
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_delta_limit_member(const struct OmCfg *g, const char *lasso_word, bool *out);

/**
 * The BPDA accepting `L(g)^ω`.
 *
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_omega_power_bpda(const struct OmCfg *g, struct OmBpda **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string, `out` writable.
 */
enum OmStatus om_bpda_from_json(const char *json, struct OmBpda **out);

/**
 * # Safety
 * `a` must come from this library or be null.
 */
void om_bpda_free(struct OmBpda *a);

/**
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_bpda_accepts_lasso(const struct OmBpda *a, const char *lasso_word, bool *out);

/**
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_bpda_is_empty(const struct OmBpda *a, bool *out);

/**
 * Writes the bounded run-count report as JSON.
 *
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_bpda_count_runs(const struct OmBpda *a,
                                 const char *lasso_word,
                                 size_t steps,
                                 size_t stack,
                                 char **out_json);

/**
 * # Safety
 * `json` must be a NUL-terminated string, `out` writable.
 */
enum OmStatus om_relation_from_json(const char *json, struct OmRelation **out);

/**
 * # Safety
 * `t` must come from this library or be null.
 */
void om_relation_free(struct OmRelation *t);

/**
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_relation_accepts(const struct OmRelation *t,
                                  const char *input,
                                  const char *output,
                                  bool *out);

/**
 * Writes `{"class": ..., "k": ...}`.
 *
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_relation_classify(const struct OmRelation *t,
                                   const char *input,
                                   const char *output,
                                   char **out_json);

/**
 * The JSON of a built-in example, loadable by the `*_from_json` calls
 * through its `object` field.
 *
 * # Safety
 * Pointers must be valid as documented on the module.
 */
enum OmStatus om_corpus_dump(const char *name, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMEGAMB_H */
