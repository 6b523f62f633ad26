#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "powalloc/link_model.hpp"
#include "powalloc/power_model.hpp"

// JSON scenario files. The schema is strict: unknown keys are rejected with
// an error naming the key, so unit typos in physics parameters fail loudly.
// Decibel values live in the file; everything is converted to linear SI
// units on load.
//
//   {
//     "bandwidth_hz": 1e7,
//     "noise": {"mode": "explicit", "noise_dbm": -103},
//              or {"mode": "thermal", "temperature_k": 290},
//     "p_max_dbm": 46,              // or null / absent for uncapped
//     "links": [{"gain_db": -100, "rate_bps": 1e7}, ...],
//     "power_model": {"preset": "macro", "load_factor": 1}
//              or {"p0_w": 39.81, "load_factor": 1, "p_max_dbm": 46}
//   }

namespace powalloc {

struct LoadedScenario {
  Scenario scenario;
  std::optional<PowerModel> power_model;
};

/// Parses a scenario document. Throws InvalidConfigError on schema or
/// validation failures (including JSON syntax errors).
LoadedScenario parse_scenario_text(const std::string& json_text);

/// Reads and parses a scenario file.
LoadedScenario load_scenario_file(const std::string& path);

/// Scenario serialized back into the file schema (dB at the boundary).
/// Parsing the result reproduces the scenario to printed precision.
nlohmann::json scenario_to_json(const Scenario& scenario,
                                const std::optional<PowerModel>& model);

}  // namespace powalloc
