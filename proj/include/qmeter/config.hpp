#pragma once

#include <string>

#include <json.hpp>

#include "qmeter/experiments.hpp"

namespace qmeter {

// Parsed and validated run configuration. sweep holds everything in
// internal units (rad/us); the resolved JSON echo keeps the user-facing
// units (MHz, us) so a re-run of the echo reproduces the run.
struct RunConfig {
  SweepSpec sweep;
  std::string figure;  // preset id when built from one, else empty
  std::string out_dir = "out";
  std::string format = "csv";  // csv | json
  bool dry_run = false;
  // Fully-defaulted user-unit key set captured at parse time, so the echo
  // re-parses to the exact same sweep (unit conversions are not inverted).
  nlohmann::json echo;
};

RunConfig parse_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& doc,
                           const std::string& context);

// Named figure presets f1a..f1d, f2a..f2c, f3a..f3d.
RunConfig preset_config(const std::string& figure_id);
const std::vector<std::string>& preset_ids();

// Full key set echo (defaults filled in), parseable by config_from_json.
nlohmann::json resolved_json(const RunConfig& cfg);

}  // namespace qmeter
