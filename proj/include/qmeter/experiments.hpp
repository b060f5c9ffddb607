#pragma once

#include <map>
#include <string>
#include <vector>

#include "qmeter/analysis.hpp"
#include "qmeter/meter.hpp"
#include "qmeter/model.hpp"
#include "qmeter/propagator.hpp"

namespace qmeter {

struct GridPolicy {
  std::size_t n = 0;      // 0 -> default_grid_n(dx)
  double half_width = 0;  // 0 -> default_half_width(dx)
};

// One sweep: the cartesian product delta2_values x dx_values under a fixed
// protocol kind. base.delta2 is ignored; each point substitutes its own.
struct SweepSpec {
  DriveParams base;
  ProtocolKind kind = ProtocolKind::Single;
  CouplingLaw coupling = CouplingLaw::BerryWeighted;
  std::vector<double> delta2_values;  // rad/us
  std::vector<double> dx_values;
  GridPolicy grid;
  IntegratorConfig integrator;
  std::vector<std::string> outputs;
  std::vector<double> series_x;  // exact lane positions for series outputs
  int workers = 1;
};

// Observable names accepted in SweepSpec::outputs.
const std::vector<std::string>& known_outputs();
void validate_outputs(const std::vector<std::string>& outputs);

struct PointDiagnostics {
  double max_norm_drift = 0;
  std::size_t steps_total = 0;
  double dual_p_delta = 0;        // |spectral <p> - derivative <p>|
  double heisenberg_delta = 0;    // |spectral <p> - Heisenberg <p>|
  double richardson_delta = 0;    // x = 0 final-state change at 2x steps
  std::vector<std::string> warnings;
};

// Column-labeled numeric table (CSV/JSON payloads are built from these).
struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct PointRecord {
  double delta2 = 0;
  double dx = 0;
  int chern_ideal = 0;
  double beta = 0;
  double mean_p = 0;
  double std_p = 0;
  double mean_p_corrected = 0;
  double heisenberg_p = 0;
  double chern_x0 = 0;                 // curvature integral of the x = 0 lane
  std::vector<double> chern_partials;  // per-leg integrals (triple quench)
  std::map<std::string, SeriesTable> series;
  PointDiagnostics diag;
  std::string error;  // nonempty when this point failed
};

struct ExperimentResult {
  std::string spec_hash;
  std::vector<PointRecord> points;  // delta2 outer loop, dx inner loop
};

// Canonical FNV-1a hash of every result-bearing spec field. Worker count
// and kernel backend are excluded: payloads are bit-identical across them.
std::string spec_hash(const SweepSpec& spec);

ExperimentResult run_single_quench(const SweepSpec& spec);
ExperimentResult run_triple_quench(const SweepSpec& spec);
ExperimentResult run_sweep(const SweepSpec& spec);  // dispatches on kind

// Midpoint crossing of std_p between its small- and large-delta2 plateaus.
struct TransitionEstimate {
  bool found = false;
  double delta2_star = 0;
  double plateau_low = 0;
  double plateau_high = 0;
};
TransitionEstimate transition_indicator(const ExperimentResult& result,
                                        double dx);

}  // namespace qmeter
