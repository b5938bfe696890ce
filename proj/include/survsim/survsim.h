/* C interface to the survivable-cluster network simulator.
 *
 * All functions return a survsim_status unless documented otherwise; on any
 * failure survsim_last_error() describes what went wrong (thread local).
 * Handles are opaque and must be freed with their matching *_free call.
 * Strings returned through survsim_result_* stay owned by the result handle;
 * strings returned through char** out-parameters must be freed with
 * survsim_string_free.
 */
#ifndef SURVSIM_H
#define SURVSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum survsim_status {
    SURVSIM_OK = 0,
    SURVSIM_ERR_INVARIANT = 1, /* invariant sweep failed during a checked run */
    SURVSIM_ERR_CONFIG = 2,    /* malformed scenario document or value */
    SURVSIM_ERR_RUNTIME = 3,   /* unexpected internal failure */
    SURVSIM_ERR_ARG = 4        /* null handle or bad argument */
} survsim_status;

typedef struct survsim_scenario survsim_scenario;
typedef struct survsim_result survsim_result;

/* Library version, e.g. "0.1.0". Static storage, never freed. */
const char* survsim_version(void);

/* Last error message of the calling thread, empty string if none. Static
 * until the next failing call on the same thread. */
const char* survsim_last_error(void);

/* --- scenarios ---------------------------------------------------------- */

survsim_status survsim_scenario_from_file(const char* path, survsim_scenario** out);
survsim_status survsim_scenario_from_string(const char* json_text,
                                            survsim_scenario** out);

/* Overwrites one value addressed by a dotted key path ("seed",
 * "nodes.radio_range", ...) with a JSON literal ("42", "1.5", "[1,2]").
 * The document is re-validated; on failure the scenario is unchanged. */
survsim_status survsim_scenario_set(survsim_scenario* sc, const char* key_path,
                                    const char* json_value);

/* Re-runs full validation. SURVSIM_OK means runnable. */
survsim_status survsim_scenario_validate(const survsim_scenario* sc);

/* Canonical JSON of the scenario with every default expanded. Free the
 * string with survsim_string_free. */
survsim_status survsim_scenario_to_string(const survsim_scenario* sc, char** out);

void survsim_scenario_free(survsim_scenario* sc);

/* --- runs --------------------------------------------------------------- */

/* Runs the scenario to completion. check_invariants != 0 enables the
 * per-timestamp consistency sweep (SURVSIM_ERR_INVARIANT on failure). */
survsim_status survsim_run(const survsim_scenario* sc, int check_invariants,
                           survsim_result** out);

/* Event trace, one record per line. Owned by the result. */
const char* survsim_result_trace(const survsim_result* res);

/* Aggregated metrics as JSON / CSV. Owned by the result. */
const char* survsim_result_metrics_json(const survsim_result* res);
const char* survsim_result_metrics_csv(const survsim_result* res);

void survsim_result_free(survsim_result* res);

/* --- traces ------------------------------------------------------------- */

/* Recomputes metrics JSON from serialized trace text: parsing the trace and
 * folding it gives the same report a run produces. Free *out with
 * survsim_string_free. */
survsim_status survsim_metrics_from_trace(const char* trace_text, char** out);

void survsim_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SURVSIM_H */
