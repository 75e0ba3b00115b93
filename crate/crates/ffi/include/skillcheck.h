#ifndef SKILLCHECK_H
#define SKILLCHECK_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkcEngine {
  SKC_ENGINE_NDFS = 0,
  SKC_ENGINE_SCC = 1,
} SkcEngine;

typedef enum SkcStatus {
  SKC_STATUS_OK = 0,
  SKC_STATUS_NULL_POINTER = 1,
  SKC_STATUS_INVALID_UTF8 = 2,
  /**
   * Syntax, scope or compilation errors in an input text.
   */
  SKC_STATUS_DIAGNOSTICS = 3,
  /**
   * The attached models do not close the skillset.
   */
  SKC_STATUS_CLOSURE = 4,
  /**
   * The property could not be checked.
   */
  SKC_STATUS_CHECK = 5,
  SKC_STATUS_PANIC = 6,
} SkcStatus;

/**
 * Opaque session handle.
 */
typedef struct SkcSession SkcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and compiles a skillset. On success `*out` receives a session to
 * be released with [`skc_session_free`].
 *
 * # Safety
 * `skillset` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkcStatus skc_session_new(const char *skillset, struct SkcSession **out);

/**
 * # Safety
 * `s` must come from [`skc_session_new`] and not be used afterwards.
 */
void skc_session_free(struct SkcSession *s);

/**
 * Attaches a layer model given in the layer-model language.
 *
 * # Safety
 * `s` must be a live session and `model` a NUL-terminated string.
 */
enum SkcStatus skc_session_attach_layer(struct SkcSession *s, const char *model);

/**
 * Attaches a builtin model such as `refined-goto:Bmax=6,Dmax=2`.
 *
 * # Safety
 * `s` must be a live session and `spec` a NUL-terminated string.
 */
enum SkcStatus skc_session_attach_builtin(struct SkcSession *s, const char *spec);

/**
 * Whether uncovered interfaces are closed with the most abstract models.
 *
 * # Safety
 * `s` must be a live session.
 */
enum SkcStatus skc_session_set_auto_abstract(struct SkcSession *s, bool on);

/**
 * The interface manifest as JSON.
 *
 * # Safety
 * `s` must be a live session and `out` a valid pointer.
 */
enum SkcStatus skc_session_manifest_json(struct SkcSession *s, char **out);

/**
 * Checks `property` on the closed system. `*holds` receives the verdict
 * and `*verdict_json` its JSON form. With `timing` false the JSON leaves
 * out `time_ms`.
 *
 * # Safety
 * `s` must be a live session, `property` a NUL-terminated string and the
 * out-pointers valid.
 */
enum SkcStatus skc_session_verify(struct SkcSession *s,
                                  const char *property,
                                  enum SkcEngine engine,
                                  size_t max_states,
                                  bool timing,
                                  bool *holds,
                                  char **verdict_json);

/**
 * Reachability statistics of the closed system as JSON.
 *
 * # Safety
 * `s` must be a live session and `out` a valid pointer.
 */
enum SkcStatus skc_session_explore(struct SkcSession *s, size_t max_states, char **out);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *skc_last_error(void);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void skc_string_free(char *p);

const char *skc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKILLCHECK_H */
