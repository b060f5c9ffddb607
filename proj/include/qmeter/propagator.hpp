#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qmeter/kernels.hpp"
#include "qmeter/model.hpp"

namespace qmeter {

struct QubitAmplitudes {
  std::complex<double> ce{1.0, 0.0};  // starts in |e>
  std::complex<double> cg{0.0, 0.0};
};

struct IntegratorConfig {
  int steps_per_tq = 20000;
  // Recorded intervals per tq; a single quench stores samples_per_tq + 1
  // points. Must divide steps_per_tq.
  int samples_per_tq = 1000;
  bool strict = false;  // promote the step-resolution warning to an error
  kernels::Backend backend = kernels::Backend::Auto;
  // Raise the step count when the analytic RK4 norm-decay estimate for the
  // run's fastest lane would exceed ~1e-9 over the full protocol.
  bool auto_refine_steps = true;
};

// Time series for one meter position x. No renormalization is applied
// during integration; max_norm_drift records max |norm^2 - 1| over samples.
struct Trajectory {
  double x = 0;
  std::vector<double> t;
  std::vector<double> theta_timeline;
  std::vector<double> theta_local;
  std::vector<std::complex<double>> ce, cg;
  std::vector<double> sx, sy, sz;
  std::vector<int> branch;          // +1 follows chi_plus, -1 chi_minus
  std::vector<double> overlap_sq;   // |<chi_branch|c>|^2 / norm^2
  std::vector<std::size_t> seg_begin;  // first sample index of each leg
  double max_norm_drift = 0;
};

// Accumulated phase bookkeeping for one lane (see phase_decompose for the
// derived geometric part). gamma_total advances by the principal-value
// increment of arg<chi_branch|c> between samples; across a branch change
// the previous sample is re-referenced to the new branch so only physical
// evolution contributes. gamma_dyn = -int sgn(branch) E_plus dt.
struct LanePhase {
  double gamma_total = 0;
  double gamma_dyn = 0;
  int branch_final = +1;
  int flips = 0;
  double min_overlap_sq = 1;
  bool degenerate_hit = false;
};

struct GridEvolveRequest {
  std::vector<double> x;       // lane positions (typically a MeterGrid's x)
  std::vector<double> weight;  // per-lane weight for the aggregated sigma_y;
                               // empty disables aggregation
  bool track_phases = false;   // accumulate LanePhase per lane
  // Evolve only x >= 0 lanes and reconstruct the x < 0 half through the
  // exact mirror map (see evolve_grid notes). Requires a grid symmetric
  // about 0 and symmetric weights; ignored when track_phases is set.
  bool mirror_economy = true;
  int workers = 1;
};

struct GridEvolveResult {
  std::vector<double> t;
  std::vector<double> theta_timeline;
  std::vector<std::size_t> seg_begin;      // first sample index of each leg
  std::vector<double> sigma_y_weighted;    // sum_j w_j <sigma_y>_j per sample
  std::vector<std::complex<double>> ce_final, cg_final;  // all lanes, final time
  std::vector<LanePhase> phases;           // per lane when track_phases
  double max_norm_drift = 0;
  std::size_t steps_total = 0;
  bool mirror_used = false;
  std::vector<std::string> warnings;
};

// Integrates i d/dt (ce, cg) = H(t; x) (ce, cg) for one lane and records
// the sampled trajectory. Throws StepSizeError when the resolution warning
// fires under strict mode.
Trajectory evolve(double x, const Protocol& protocol,
                  const IntegratorConfig& cfg, QubitAmplitudes initial = {});

// Same integration across a whole lane set, initial state |e> everywhere.
// Mirror economy: the phi = 0 Hamiltonians at +x and -x are related by the
// fixed unitary diag(1, e^{-2i xi}), xi = arctan(x), so
//   ce(-x,t) = ce(x,t),   cg(-x,t) = e^{-2i xi} cg(x,t),
// and the Bloch vector at -x is the one at +x rotated about z by -2 xi.
// The aggregated sigma_y and the final snapshot use that map exactly.
GridEvolveResult evolve_grid(const Protocol& protocol,
                             const GridEvolveRequest& req,
                             const IntegratorConfig& cfg);

// The recorded <sigma_y> series (convention: 2 Im(ce* cg), so the state
// (|e> + i|g>)/sqrt(2) gives +1).
std::vector<double> sigma_y_series(const Trajectory& traj);

}  // namespace qmeter
