/*
 * ctmctail C API.
 *
 * Analysis of one-dimensional continuous-time Markov chains with
 * power-law transition rates: tail classification of stationary and
 * quasi-stationary distributions, numerical solvers, identity
 * verification, tail fitting and stochastic simulation.
 *
 * All objects are opaque handles freed with the matching *_free call.
 * Functions return CTMC_OK (0) on success; on failure they return a
 * status code and leave a message retrievable with ctmc_last_error()
 * (thread-local).  Strings returned through char** are owned by the
 * caller and released with ctmc_string_free.
 *
 * Structured inputs and outputs use JSON; distributions and trajectories
 * use CSV ("x,p(x),T(x)" and "t,x").
 */

#ifndef CTMCTAIL_H
#define CTMCTAIL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ctmc_model ctmc_model;
typedef struct ctmc_dist ctmc_dist;

typedef enum ctmc_status {
  CTMC_OK = 0,
  CTMC_ERR_SYNTAX = 2,       /* unparsable input */
  CTMC_ERR_VALIDATION = 3,   /* model invariant violated */
  CTMC_ERR_PRECONDITION = 4, /* operation precondition failed */
  CTMC_ERR_SOLVER = 5,
  CTMC_ERR_SIMULATION = 6,
  CTMC_ERR_INVALID_ARG = 7,
  CTMC_ERR_INTERNAL = 8
} ctmc_status;

unsigned ctmc_abi_version(void);

/* Thread-local message for the last failing call in this thread. */
const char *ctmc_last_error(void);
/* Stable machine-readable tag (e.g. "SyntaxError", "ThetaMismatch"). */
const char *ctmc_last_error_tag(void);

void ctmc_string_free(char *s);

/* ---- models ----------------------------------------------------------- */

/* kind: "model" (jump DSL), "rxn" (reaction lines) or NULL to accept the
 * full statement grammar. */
ctmc_status ctmc_model_parse(const char *text, const char *kind,
                             ctmc_model **out);
ctmc_status ctmc_model_parse_file(const char *path, const char *kind,
                                  ctmc_model **out);
void ctmc_model_free(ctmc_model *m);
ctmc_status ctmc_model_pretty(const ctmc_model *m, char **out_text);

/* ---- analysis ---------------------------------------------------------- */

/* opts_json (all optional): {"theta": number, "solve_qsd": bool,
 * "N": int, "tol": number}.  Emits jump structure, asymptotic parameters,
 * consistency report, stationary classification or support obstruction,
 * and a QSD classification when requested and applicable. */
ctmc_status ctmc_analyze_json(const ctmc_model *m, const char *opts_json,
                              char **out_json);

/* ---- solvers ----------------------------------------------------------- */

/* opts_json: {"N": int, "tol": number, "method":
 * "truncated"|"recursive"|"bdp", "seeds": [numbers]} */
ctmc_status ctmc_solve_stationary(const ctmc_model *m, const char *opts_json,
                                  ctmc_dist **out);
/* opts_json: {"N": int, "tol": number, "method": "inverse"|"power"} */
ctmc_status ctmc_solve_qsd(const ctmc_model *m, const char *opts_json,
                           ctmc_dist **out);
/* spec_json: {"kind": "cmp"|"zeta"|"geometric"|"poisson"|
 * "negative_binomial", "a": number, "b": number, "N": int} */
ctmc_status ctmc_reference_dist(const char *spec_json, ctmc_dist **out);

void ctmc_dist_free(ctmc_dist *d);
ctmc_status ctmc_dist_len(const ctmc_dist *d, size_t *out);
ctmc_status ctmc_dist_offset(const ctmc_dist *d, long long *out);
ctmc_status ctmc_dist_value(const ctmc_dist *d, long long x, double *out);
ctmc_status ctmc_dist_tail(const ctmc_dist *d, long long x, double *out);
ctmc_status ctmc_dist_mass_defect(const ctmc_dist *d, double *out);
/* CTMC_ERR_PRECONDITION when the distribution carries no theta. */
ctmc_status ctmc_dist_theta(const ctmc_dist *d, double *out);
ctmc_status ctmc_dist_csv(const ctmc_dist *d, char **out_csv);
ctmc_status ctmc_dist_from_csv(const char *csv, ctmc_dist **out);

/* ---- verification and fitting ------------------------------------------ */

/* kind: "stationary" | "qsd" | "tail"; theta_override > 0 replaces the
 * distribution's theta for QSD verification (pass 0 to keep it). */
ctmc_status ctmc_verify_json(const ctmc_model *m, const ctmc_dist *d,
                             const char *kind, double theta_override,
                             char **out_json);
/* opts_json: {"lo": int, "hi": int, "predicted_family": string?} */
ctmc_status ctmc_fit_tail_json(const ctmc_dist *d, const char *opts_json,
                               char **out_json);

/* ---- simulation --------------------------------------------------------- */

/* opts_json: {"x0": int, "t_end": number, "seed": int, "max_steps": int} */
ctmc_status ctmc_simulate_trajectory_csv(const ctmc_model *m,
                                         const char *opts_json,
                                         char **out_csv);
/* opts_json: {"x0": int, "t_end": number, "burn_in": number,
 * "replicas": int, "seed": int} */
ctmc_status ctmc_simulate_stationary(const ctmc_model *m,
                                     const char *opts_json, ctmc_dist **out);
/* opts_json: {"x0": int, "cycles": int, "seed": int} */
ctmc_status ctmc_simulate_qsd(const ctmc_model *m, const char *opts_json,
                              ctmc_dist **out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CTMCTAIL_H */
