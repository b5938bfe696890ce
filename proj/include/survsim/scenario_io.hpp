#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "survsim/engine.hpp"

namespace survsim {

/// Raised for any structural or semantic problem in a scenario document.
/// Messages name the offending key path, e.g. "nodes.radio_range".
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

/// Builds a validated Scenario from a parsed document. Unknown keys are
/// rejected. Omitted optional keys take the documented defaults; duration
/// defaults to the latest event time.
Scenario scenario_from_json(const Json& doc);

/// Inverse of scenario_from_json: emits every field explicitly so the
/// round trip is lossless.
Json scenario_to_json(const Scenario& scenario);

/// Parses JSON text and validates it. Syntax errors surface as
/// ScenarioError too.
Scenario parse_scenario_text(const std::string& text);

/// Reads and parses the file at `path`.
Scenario parse_scenario_file(const std::string& path);

}  // namespace survsim
