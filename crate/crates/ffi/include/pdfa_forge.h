#ifndef PDFA_FORGE_H
#define PDFA_FORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_ARGUMENT = 1,
  PF_STATUS_INVALID_UTF8 = 2,
  PF_STATUS_INVALID_INPUT = 3,
  PF_STATUS_BUFFER_TOO_SMALL = 4,
  PF_STATUS_NOT_CONVERGED = 5,
  PF_STATUS_LIMIT = 6,
  PF_STATUS_IO = 7,
  PF_STATUS_PANIC = 8,
} PfStatus;

/**
 * A PDFA.
 */
typedef struct PfPdfa PfPdfa;

/**
 * A quotient PDFA whose states carry distribution classes.
 */
typedef struct PfQuotient PfQuotient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *pf_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *pf_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pf_string_free(char *s);

/**
 * Parses a PDFA from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PfStatus pf_pdfa_from_json(const char *json, struct PfPdfa **out);

/**
 * One of the bundled automata: `fig2a`, `fig2b` or `fig3a`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum PfStatus pf_pdfa_builtin(const char *name, struct PfPdfa **out);

/**
 * # Safety
 * `a` must come from this library and not have been freed.
 */
void pf_pdfa_free(struct PfPdfa *a);

/**
 * # Safety
 * `a` must be a live handle or null.
 */
size_t pf_pdfa_num_states(const struct PfPdfa *a);

/**
 * Number of symbols, not counting the terminal.
 *
 * # Safety
 * `a` must be a live handle or null.
 */
size_t pf_pdfa_alphabet_len(const struct PfPdfa *a);

/**
 * Next-symbol distribution after `word`. Writes `alphabet_len + 1`
 * probabilities, the terminal last.
 *
 * # Safety
 * `word` must point to `len` symbols (may be null when `len` is 0) and
 * `probs` to `cap` writable doubles.
 */
enum PfStatus pf_pdfa_query(const struct PfPdfa *a,
                            const size_t *word,
                            size_t len,
                            double *probs,
                            size_t cap);

/**
 * # Safety
 * `a` must be a live handle, `equiv` a NUL-terminated string and `out`
 * writable.
 */
enum PfStatus pf_quotient(const struct PfPdfa *a, const char *equiv, struct PfQuotient **out);

/**
 * # Safety
 * `q` must come from this library and not have been freed.
 */
void pf_quotient_free(struct PfQuotient *q);

/**
 * # Safety
 * `q` must be a live handle or null.
 */
size_t pf_quotient_num_states(const struct PfQuotient *q);

/**
 * # Safety
 * `q` must be a live handle and `out` writable. Free the result with
 * [`pf_string_free`].
 */
enum PfStatus pf_quotient_to_json(const struct PfQuotient *q, char **out);

/**
 * # Safety
 * As [`pf_quotient_to_json`].
 */
enum PfStatus pf_quotient_to_dot(const struct PfQuotient *q, char **out);

/**
 * Compares two PDFA under `equiv`. On a difference `*counterexample`
 * receives the least separating word, otherwise null.
 *
 * # Safety
 * `a` and `b` must be live handles, `equiv` a NUL-terminated string, and
 * both outputs writable.
 */
enum PfStatus pf_compare(const struct PfPdfa *a,
                         const struct PfPdfa *b,
                         const char *equiv,
                         bool *equivalent,
                         char **counterexample);

/**
 * Learns the quotient of `target` with L*. `eq` is `exact`,
 * `sample:<n>:<maxlen>:<seed>` or `exhaustive:<maxlen>`; `max_rounds` of
 * 0 means the default. Returns [`PfStatus::NotConverged`] on a limit, with
 * the last hypothesis in `*out` when there is one.
 *
 * # Safety
 * `target` must be a live handle, `equiv` and `eq` NUL-terminated strings
 * and `out` writable.
 */
enum PfStatus pf_learn(const struct PfPdfa *target,
                       const char *equiv,
                       const char *eq,
                       size_t max_rounds,
                       struct PfQuotient **out);

/**
 * Number of clique partitions of a JSON distribution list under `sim`.
 *
 * # Safety
 * `dists_json` and `sim` must be NUL-terminated strings and `count`
 * writable.
 */
enum PfStatus pf_clique_partition_count(const char *dists_json, const char *sim, size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDFA_FORGE_H */
