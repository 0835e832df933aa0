/* hinfcon: distributed H-infinity consensus observer synthesis over Markov
 * switching networks.
 *
 * C interface of the shared library. All entry points return a status code
 * (HINFCON_OK on success); output strings are heap-allocated and must be
 * released with hinfcon_string_free. Handles are opaque and freed with their
 * dedicated functions.
 */
#ifndef HINFCON_H
#define HINFCON_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hinfcon_problem hinfcon_problem;
typedef struct hinfcon_gains hinfcon_gains;

enum hinfcon_status {
  HINFCON_OK = 0,
  /* configuration unreadable, unparsable, or structurally invalid */
  HINFCON_E_CONFIG = 1,
  /* a structural assumption of the requested analysis is violated */
  HINFCON_E_ASSUMPTION = 2,
  /* synthesis did not reach a verified feasible point */
  HINFCON_E_INFEASIBLE = 3,
  /* supplied artifacts (gains) do not match the configuration */
  HINFCON_E_MISMATCH = 4,
  /* invalid argument to an API call */
  HINFCON_E_ARGUMENT = 5,
  /* internal failure (integration blow-up, unexpected exception) */
  HINFCON_E_INTERNAL = 6
};

const char* hinfcon_version(void);
const char* hinfcon_status_message(int status);
void hinfcon_string_free(char* s);

/* Load and structurally check a problem configuration. On parse failure the
 * handle stays NULL and *error (if non-NULL) carries a message. */
int hinfcon_problem_load_file(const char* path, hinfcon_problem** out,
                              char** error);
int hinfcon_problem_load_string(const char* json_text, hinfcon_problem** out,
                                char** error);
void hinfcon_problem_free(hinfcon_problem* p);

/* Structural validation. *report_json receives {"valid":..., "violations":[...]};
 * returns HINFCON_OK when there are no violations, HINFCON_E_CONFIG otherwise. */
int hinfcon_validate(const hinfcon_problem* p, char** report_json);

/* Graph-detectability necessary conditions. *report_json receives the
 * per-state analysis; returns HINFCON_OK when the intersection condition
 * holds for every state. */
int hinfcon_detect(const hinfcon_problem* p, char** report_json);

/* Observer synthesis. mode is "local" (locality-constrained, rank-constrained
 * LMIs) or "global" (global-state broadcast, convex LMIs). On feasibility
 * *gains_json receives the gain tables and *summary_json a result summary;
 * *solver_log_csv receives the residual history either way. */
int hinfcon_synthesize(const hinfcon_problem* p, const char* mode,
                       char** gains_json, char** summary_json,
                       char** solver_log_csv);

int hinfcon_gains_load_string(const char* json_text, hinfcon_gains** out,
                              char** error);
void hinfcon_gains_free(hinfcon_gains* g);

/* One trajectory run plus the configured Monte Carlo battery.
 * *metrics_json and *trajectory_csv receive the artifacts. */
int hinfcon_simulate(const hinfcon_problem* p, const hinfcon_gains* g,
                     char** metrics_json, char** trajectory_csv);

/* Feasibility frontier over gamma^2 in [lo, hi]; *csv receives rows
 * gamma2,status,margin sorted by gamma2. */
int hinfcon_gamma_search(const hinfcon_problem* p, double lo, double hi,
                         int steps, const char* mode, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* HINFCON_H */
