/* C interface to the conserva toolkit.
 *
 * All inputs and outputs are JSON text; returned strings are heap-allocated
 * and must be released with conserva_string_free. Functions return
 * conserva_status; on CONSERVA_NO_EQUILIBRIUM and CONSERVA_EMPTY_FAMILY a
 * report is still produced. conserva_last_error() describes the most recent
 * failure on the calling thread.
 */

#ifndef CONSERVA_H
#define CONSERVA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CONSERVA_OK = 0,
  CONSERVA_INPUT_ERROR = 1,
  CONSERVA_NO_EQUILIBRIUM = 2,
  CONSERVA_EMPTY_FAMILY = 3,
  CONSERVA_RUNTIME_ERROR = 4
} conserva_status;

typedef struct conserva_system conserva_system;

/* Parses a system description:
 *   {"kind": "replicator", "payoff": [[...], ...]}
 *   {"kind": "lotka_volterra", "interaction": [[...], ...], "r": [...]}
 * plus optional "equilibrium" and "labels" fields. */
conserva_status conserva_system_from_json(const char* json_text, conserva_system** out);
void conserva_system_free(conserva_system* system);

/* Canonical JSON echo of a parsed system; NULL on allocation failure. */
char* conserva_system_to_json(const conserva_system* system);

/* options_json (may be NULL or "{}"):
 *   {"method": "general"|"reduced"|"both", "rank_tol": 1e-10,
 *    "certificate_tol": 1e-8, "identity_samples": 20,
 *    "orthogonality_samples": 100, "seed": 20260814} */
conserva_status conserva_analyze(const conserva_system* system, const char* options_json,
                                 char** report_json);

/* to_kind: "replicator" or "lv". */
conserva_status conserva_convert(const conserva_system* system, const char* to_kind,
                                 char** system_json);

/* options_json (may be NULL):
 *   {"certificate": [[...], ...], "rank_tol": 1e-10, "certificate_tol": 1e-8}
 * Without a certificate the general search provides one. */
conserva_status conserva_classify(const conserva_system* system, const char* options_json,
                                  char** report_json);

/* options_json (may be NULL):
 *   {"samples": 20, "seed": 20260814, "rank_tol": 1e-10} */
conserva_status conserva_check(const conserva_system* system, const char* options_json,
                               char** report_json);

/* options_json:
 *   {"start": "x0"|"y0"|"u0", "initial": [...], "t_end": 10.0,
 *    "method": "rk45"|"rk4", "step": 0.01, "abs_tol": 1e-10,
 *    "rel_tol": 1e-10, "record_every": 1, "max_steps": 1000000,
 *    "observe": "H"|"none", "time_scaled": false,
 *    "certificate": [[...], ...], "plot_data": false}
 * csv_text receives the trajectory table; when plot_data is set the summary
 * contains "plot_time_h" and "plot_phase" string fields. */
conserva_status conserva_simulate(const conserva_system* system, const char* options_json,
                                  char** summary_json, char** csv_text);

void conserva_string_free(char* text);

/* Thread-local message describing the last failure; empty string if none. */
const char* conserva_last_error(void);

const char* conserva_version(void);

#ifdef __cplusplus
}
#endif

#endif /* CONSERVA_H */
