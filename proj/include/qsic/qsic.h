#ifndef QSIC_H
#define QSIC_H

/* C interface to libqsic: preprocessing of universally quantified ABV
 * problems, solving through an external quantifier-free solver, brute-force
 * checks, and benchmark generation. Inputs are SMT-LIB 2 texts. Every call
 * that can fail returns a qsic_status and leaves a message in the context.
 * Results are immutable and own their strings. */

#include <stddef.h>
#include <stdint.h>

#if defined(QSIC_BUILDING)
#define QSIC_API __attribute__((visibility("default")))
#else
#define QSIC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qsic_status {
  QSIC_OK = 0,
  QSIC_E_PARSE,
  QSIC_E_SORT,
  QSIC_E_UNSUPPORTED_SYMBOL,
  QSIC_E_UNSUPPORTED_STRUCTURE,
  QSIC_E_UNBOUND_SYMBOL,
  QSIC_E_MODEL_SHAPE,
  QSIC_E_MISSING_ENTRY,
  QSIC_E_INCOMPLETE_MODEL,
  QSIC_E_MALFORMED_RULE,
  QSIC_E_SOLVER_NOT_FOUND,
  QSIC_E_IO,
  QSIC_E_INVALID_ARGUMENT,
  QSIC_E_NO_ARRAY_SYMBOLS,
  QSIC_E_INTERNAL
} qsic_status;

/* Values double as the CLI exit codes. */
typedef enum qsic_verdict {
  QSIC_SAT = 0,
  QSIC_UNSAT = 10,
  QSIC_UNKNOWN = 20
} qsic_verdict;

typedef struct qsic_context qsic_context;
typedef struct qsic_result qsic_result;

typedef struct qsic_preprocess_options {
  int simplify;             /* default 1 */
  unsigned share_threshold; /* let-bind repeated subterms in output; 0 disables; default 2 */
  const char *targets;      /* comma-separated names, NULL for all universal variables */
  int declared_shadows;     /* shadow arrays as declared symbols instead of constant arrays */
  int memoize;              /* default 1 */
  const char *rules;        /* extra (absorb ...) rules, or NULL */
} qsic_preprocess_options;

typedef struct qsic_solver_options {
  const char *command;     /* e.g. "z3 {file}"; NULL: QSIC_SOLVER, then z3 */
  const char *config_file; /* key=value file (solver.cmd, solver.timeout); applied last */
  double timeout;          /* seconds; default 30 */
  int enumerate;           /* decide by exhaustive enumeration, no subprocess */
} qsic_solver_options;

typedef struct qsic_check_options {
  unsigned widths;      /* narrow bitvectors to at most this width first; 0 keeps them */
  const char *sic;      /* a SIC to check instead of the inferred one: a term, or a
                           script whose last assertion is taken */
  int lift;             /* also solve and check the lifted model */
  uint64_t seed;        /* sampling seed; default 1 */
} qsic_check_options;

QSIC_API const char *qsic_version(void);
QSIC_API const char *qsic_status_name(qsic_status status);

QSIC_API qsic_context *qsic_context_new(void);
QSIC_API void qsic_context_free(qsic_context *ctx);
/* Message of the last failed call on ctx ("" if none). Valid until the next call. */
QSIC_API const char *qsic_last_error(const qsic_context *ctx);

QSIC_API void qsic_preprocess_options_init(qsic_preprocess_options *opts);
QSIC_API void qsic_solver_options_init(qsic_solver_options *opts);
QSIC_API void qsic_check_options_init(qsic_check_options *opts);

/* Strengthened quantifier-free script: qsic_result_output. */
QSIC_API qsic_status qsic_preprocess(qsic_context *ctx, const char *smt2,
                                     const qsic_preprocess_options *opts, qsic_result **out);

/* Preprocess plus one solver call. Solver start-up failures are errors
 * (QSIC_E_SOLVER_NOT_FOUND), not unknown. */
QSIC_API qsic_status qsic_solve(qsic_context *ctx, const char *smt2,
                                const qsic_preprocess_options *popts,
                                const qsic_solver_options *sopts, qsic_result **out);

/* Brute-force checks; one JSON line per check in qsic_result_report and
 * qsic_result_check_ok for the conjunction. */
QSIC_API qsic_status qsic_check(qsic_context *ctx, const char *smt2,
                                const qsic_preprocess_options *popts,
                                const qsic_check_options *copts,
                                const qsic_solver_options *sopts, qsic_result **out);

/* Universally quantifies the selected arrays. selection: "unwritten", "all",
 * "count:N" or comma-separated globs. Output script: qsic_result_output. */
QSIC_API qsic_status qsic_benchgen(qsic_context *ctx, const char *smt2, const char *selection,
                                   uint64_t seed, unsigned min_selected, qsic_result **out);

/* Decides a script by enumeration over its free constants. */
QSIC_API qsic_status qsic_enum_solve(qsic_context *ctx, const char *smt2, uint64_t budget,
                                     qsic_result **out);

QSIC_API const char *qsic_result_output(const qsic_result *r); /* script text or "" */
QSIC_API const char *qsic_result_sic(const qsic_result *r);    /* simplified SIC term or "" */
QSIC_API int qsic_result_is_wic(const qsic_result *r);
QSIC_API qsic_verdict qsic_result_verdict(const qsic_result *r);
QSIC_API const char *qsic_result_model(const qsic_result *r);  /* define-fun forms or "" */
QSIC_API const char *qsic_result_report(const qsic_result *r); /* JSON lines */
QSIC_API int qsic_result_check_ok(const qsic_result *r);
QSIC_API void qsic_result_free(qsic_result *r);

#ifdef __cplusplus
}
#endif

#endif
