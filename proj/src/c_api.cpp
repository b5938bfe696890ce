#include "survsim/survsim.h"

#include <cstring>
#include <new>
#include <string>
#include <utility>

#include "survsim/engine.hpp"
#include "survsim/scenario_io.hpp"
#include "survsim/trace.hpp"
#include "survsim/version.hpp"

using survsim::Json;

struct survsim_scenario {
    survsim::Scenario scenario;
    Json doc;  // kept alongside for key-path edits
};

struct survsim_result {
    std::string trace;
    std::string metrics_json;
    std::string metrics_csv;
};

namespace {

thread_local std::string g_last_error;

survsim_status set_error(survsim_status st, const std::string& what) {
    g_last_error = what;
    return st;
}

survsim_status ok() {
    g_last_error.clear();
    return SURVSIM_OK;
}

/// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
survsim_status guarded(Fn&& fn) {
    try {
        fn();
        return ok();
    } catch (const survsim::ScenarioError& e) {
        return set_error(SURVSIM_ERR_CONFIG, e.what());
    } catch (const survsim::InvariantViolation& e) {
        return set_error(SURVSIM_ERR_INVARIANT, e.what());
    } catch (const std::invalid_argument& e) {
        return set_error(SURVSIM_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SURVSIM_ERR_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return set_error(SURVSIM_ERR_RUNTIME, e.what());
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* survsim_version(void) { return survsim::kVersion; }

const char* survsim_last_error(void) { return g_last_error.c_str(); }

survsim_status survsim_scenario_from_file(const char* path, survsim_scenario** out) {
    if (!path || !out) return set_error(SURVSIM_ERR_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto sc = survsim::parse_scenario_file(path);
        Json doc = survsim::scenario_to_json(sc);
        *out = new survsim_scenario{std::move(sc), std::move(doc)};
    });
}

survsim_status survsim_scenario_from_string(const char* json_text,
                                            survsim_scenario** out) {
    if (!json_text || !out) return set_error(SURVSIM_ERR_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto sc = survsim::parse_scenario_text(json_text);
        Json doc = survsim::scenario_to_json(sc);
        *out = new survsim_scenario{std::move(sc), std::move(doc)};
    });
}

survsim_status survsim_scenario_set(survsim_scenario* sc, const char* key_path,
                                    const char* json_value) {
    if (!sc || !key_path || !json_value) {
        return set_error(SURVSIM_ERR_ARG, "null argument");
    }
    return guarded([&] {
        std::string pointer = "/";
        for (const char* p = key_path; *p; ++p) {
            pointer += *p == '.' ? '/' : *p;
        }
        Json value;
        try {
            value = Json::parse(json_value);
        } catch (const nlohmann::json::parse_error& e) {
            throw survsim::ScenarioError(std::string("value is not valid JSON: ") +
                                         e.what());
        }
        Json candidate = sc->doc;
        try {
            candidate[Json::json_pointer(pointer)] = std::move(value);
        } catch (const nlohmann::json::exception& e) {
            throw survsim::ScenarioError(std::string("bad key path \"") + key_path +
                                         "\": " + e.what());
        }
        // Validation happens on the copy, so failure leaves the handle intact.
        survsim::Scenario parsed = survsim::scenario_from_json(candidate);
        sc->scenario = std::move(parsed);
        sc->doc = survsim::scenario_to_json(sc->scenario);
    });
}

survsim_status survsim_scenario_validate(const survsim_scenario* sc) {
    if (!sc) return set_error(SURVSIM_ERR_ARG, "null scenario");
    return guarded([&] { (void)survsim::scenario_from_json(sc->doc); });
}

survsim_status survsim_scenario_to_string(const survsim_scenario* sc, char** out) {
    if (!sc || !out) return set_error(SURVSIM_ERR_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = copy_string(sc->doc.dump(2) + "\n"); });
}

void survsim_scenario_free(survsim_scenario* sc) { delete sc; }

survsim_status survsim_run(const survsim_scenario* sc, int check_invariants,
                           survsim_result** out) {
    if (!sc || !out) return set_error(SURVSIM_ERR_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        survsim::RunResult r = survsim::run(sc->scenario, check_invariants != 0);
        auto* res = new survsim_result;
        res->trace = survsim::serialize_trace(r.trace);
        res->metrics_json = survsim::metrics_to_json(r.metrics);
        res->metrics_csv = survsim::metrics_to_csv(r.metrics);
        *out = res;
    });
}

const char* survsim_result_trace(const survsim_result* res) {
    return res ? res->trace.c_str() : nullptr;
}

const char* survsim_result_metrics_json(const survsim_result* res) {
    return res ? res->metrics_json.c_str() : nullptr;
}

const char* survsim_result_metrics_csv(const survsim_result* res) {
    return res ? res->metrics_csv.c_str() : nullptr;
}

void survsim_result_free(survsim_result* res) { delete res; }

survsim_status survsim_metrics_from_trace(const char* trace_text, char** out) {
    if (!trace_text || !out) return set_error(SURVSIM_ERR_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto records = survsim::parse_trace(trace_text);
        const auto report = survsim::collect_metrics(records);
        *out = copy_string(survsim::metrics_to_json(report));
    });
}

void survsim_string_free(char* s) { delete[] s; }

}  // extern "C"
