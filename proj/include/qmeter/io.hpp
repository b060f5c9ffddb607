#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qmeter/config.hpp"
#include "qmeter/experiments.hpp"

namespace qmeter {

struct Dataset {
  std::string name;  // file stem, e.g. "chern_raw"
  SeriesTable table;
};

// Maps an ExperimentResult onto the dataset files the requested outputs
// call for (chern_raw/chern_corrected, std_p, curvature, ...).
std::vector<Dataset> build_datasets(const RunConfig& cfg,
                                    const ExperimentResult& result);

// Per-point diagnostics plus run provenance; wall time lives in a separate
// "timing" section so dataset payloads stay reproducible bit for bit.
nlohmann::json diagnostics_json(const RunConfig& cfg,
                                const ExperimentResult& result,
                                double wall_seconds);

// Numbers are serialized with 12 significant digits.
void write_csv(const std::string& path, const SeriesTable& table);
void write_json_records(const std::string& path, const SeriesTable& table);
void write_text(const std::string& path, const std::string& content);

std::string format_double(double v);  // the shared %.12g formatter

}  // namespace qmeter
