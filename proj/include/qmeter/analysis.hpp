#pragma once

#include <cstddef>
#include <vector>

#include "qmeter/model.hpp"
#include "qmeter/propagator.hpp"

namespace qmeter {

// b(theta) = (omega1 / 2 nu) <sigma_y> sin(theta_local), sampled on the
// global theta timeline. Using the in-leg drive angle in the sine and the
// timeline rate in the prefactor makes -int b dtheta_timeline reproduce
// each leg's curvature integral at that leg's own sweep rate.
struct CurvatureSeries {
  double x = 0;
  std::vector<double> theta;  // timeline angle nu * t
  std::vector<double> b;
  std::vector<std::size_t> seg_begin;
};
CurvatureSeries berry_curvature(const Trajectory& traj, const Protocol& p);

// C = -int b dtheta by composite Simpson per leg. partials holds each
// leg's own integral; running is the cumulative integral on the sample
// grid. Throws SamplingError if theta is not uniform inside a leg.
struct ChernResult {
  double total = 0;
  std::vector<double> partials;
  std::vector<double> running;
};
ChernResult chern_integral(const CurvatureSeries& cs);

// Finite-meter underestimation factor
//   beta(dx) = int |phi(x)|^2 / (1 + x^2) dx
//            = sqrt(pi / (2 dx^2)) e^{1/(2 dx^2)} erfc(1/(sqrt(2) dx)),
// evaluated through the scaled complementary error function so small dx
// does not overflow. Monotone decreasing, beta -> 1 as dx -> 0.
double beta_closed_form(double dx_param);

// The same integral by adaptive quadrature; cross-check oracle.
double beta_quadrature(double dx_param, double tol = 1e-10);

double corrected_chern(double mean_p, double dx_param);

// <p>(t) = -int_0^t g(t') S(t') dt', with S the weight-aggregated
// <sigma_y> recorded by evolve_grid. Simpson per leg, cumulative across
// the run; the last entry is the Heisenberg-picture final momentum.
std::vector<double> heisenberg_mean_p(const GridEvolveResult& grid,
                                      const Protocol& p);

// gamma_total: unwrapped phase of the overlap with the followed branch;
// gamma_dyn: -int sgn(branch) E_plus dt; gamma_geo = total - dyn. valid is
// cleared when the branch overlap amplitude dips below 0.9 (|.|^2 < 0.81).
struct PhaseDecomposition {
  double x = 0;
  double gamma_total = 0;
  double gamma_dyn = 0;
  double gamma_geo = 0;
  double min_overlap_sq = 1;
  int flips = 0;
  bool valid = true;
};
PhaseDecomposition phase_decompose(const Trajectory& traj, const Protocol& p);
PhaseDecomposition phase_decompose(const LanePhase& lane, double x);

// Momentum-width growth model: returns
//   sqrt(1 + 16 (enhancement * f)^2 tq_eff^2 dx^4) / (2 dx).
// enhancement = 1 for a single quench, 4 for the triple quench when the
// middle leg stays on the same branch (|delta2| > |delta1|), 0 when the
// branch alternates and the quadratic phase cancels.
double dp_prediction(double dx_param, double f, double tq_eff,
                     double enhancement);

}  // namespace qmeter
