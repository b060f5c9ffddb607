#include "qmeter/analysis.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "qmeter/errors.hpp"
#include "qmeter/numerics.hpp"
#include "qmeter/units.hpp"

namespace qmeter {

namespace {

// Bounds of leg i inside the flat sample arrays: [begin, end).
struct LegSpan {
  std::size_t begin, end;
};

std::vector<LegSpan> leg_spans(const std::vector<std::size_t>& seg_begin,
                               std::size_t total) {
  std::vector<LegSpan> spans;
  for (std::size_t i = 0; i < seg_begin.size(); ++i) {
    std::size_t end = i + 1 < seg_begin.size() ? seg_begin[i + 1] : total;
    spans.push_back({seg_begin[i], end});
  }
  return spans;
}

void check_uniform(const std::vector<double>& grid, std::size_t lo,
                   std::size_t hi, double h, const char* what) {
  double tol = std::max(1e-12, 1e-9 * std::abs(h));
  for (std::size_t k = lo + 1; k < hi; ++k) {
    if (std::abs(grid[k] - grid[k - 1] - h) > tol) {
      std::ostringstream os;
      os << what << " samples are not uniformly spaced inside a leg (index "
         << k << ")";
      throw SamplingError(os.str());
    }
  }
}

double gauss_density(double x, double dx_param) {
  double s2 = dx_param * dx_param;
  return std::exp(-0.5 * x * x / s2) / (dx_param * std::sqrt(kTwoPi));
}

}  // namespace

CurvatureSeries berry_curvature(const Trajectory& traj, const Protocol& p) {
  CurvatureSeries cs;
  cs.x = traj.x;
  cs.theta = traj.theta_timeline;
  cs.seg_begin = traj.seg_begin;
  cs.b.resize(traj.sy.size());
  const double pref = p.params().omega1 / (2.0 * p.nu());
  for (std::size_t k = 0; k < traj.sy.size(); ++k) {
    cs.b[k] = pref * traj.sy[k] * std::sin(traj.theta_local[k]);
  }
  return cs;
}

ChernResult chern_integral(const CurvatureSeries& cs) {
  if (cs.b.size() != cs.theta.size() || cs.b.empty()) {
    throw SamplingError("curvature series is empty or inconsistent");
  }
  ChernResult out;
  out.running.resize(cs.b.size());
  double offset = 0.0;
  for (const LegSpan& leg : leg_spans(cs.seg_begin, cs.b.size())) {
    std::size_t count = leg.end - leg.begin;
    if (count < 2) throw SamplingError("curvature leg has fewer than 2 samples");
    double h = (cs.theta[leg.end - 1] - cs.theta[leg.begin]) /
               static_cast<double>(count - 1);
    check_uniform(cs.theta, leg.begin, leg.end, h, "curvature");
    std::vector<double> seg_b(cs.b.begin() + static_cast<std::ptrdiff_t>(leg.begin),
                              cs.b.begin() + static_cast<std::ptrdiff_t>(leg.end));
    double integral = num::simpson(seg_b, h);
    out.partials.push_back(-integral);
    std::vector<double> cum = num::cumulative_integral(seg_b, h);
    for (std::size_t k = 0; k < count; ++k) {
      out.running[leg.begin + k] = offset - cum[k];
    }
    offset -= integral;
  }
  out.total = offset;
  return out;
}

double beta_closed_form(double dx_param) {
  if (!(dx_param > 0)) throw ConfigError("beta: dx must be positive");
  double z = 1.0 / (std::sqrt(2.0) * dx_param);
  return std::sqrt(kPi) * z * num::erfcx(z);
}

double beta_quadrature(double dx_param, double tol) {
  if (!(dx_param > 0)) throw ConfigError("beta: dx must be positive");
  auto f = [dx_param](double x) {
    return gauss_density(x, dx_param) / (1.0 + x * x);
  };
  double w = std::max(12.0 * dx_param, 12.0);
  return 2.0 * num::adaptive_simpson(f, 0.0, w, 0.5 * tol);
}

double corrected_chern(double mean_p, double dx_param) {
  return mean_p / beta_closed_form(dx_param);
}

std::vector<double> heisenberg_mean_p(const GridEvolveResult& grid,
                                      const Protocol& p) {
  if (grid.sigma_y_weighted.empty()) {
    throw ConfigError(
        "heisenberg_mean_p needs the weight-aggregated sigma_y series");
  }
  const auto& segs = p.segments();
  if (grid.seg_begin.size() != segs.size()) {
    throw SamplingError("grid series legs do not match the protocol");
  }
  const DriveParams& d = p.params();
  const bool berry = p.coupling() == CouplingLaw::BerryWeighted;

  std::vector<double> out(grid.sigma_y_weighted.size());
  double offset = 0.0;
  auto spans = leg_spans(grid.seg_begin, out.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const LegSpan& leg = spans[i];
    std::size_t count = leg.end - leg.begin;
    if (count < 2) throw SamplingError("series leg has fewer than 2 samples");
    double h = (grid.t[leg.end - 1] - grid.t[leg.begin]) /
               static_cast<double>(count - 1);
    check_uniform(grid.t, leg.begin, leg.end, h, "time");
    std::vector<double> y(count);
    for (std::size_t k = 0; k < count; ++k) {
      double tau = grid.t[leg.begin + k] - segs[i].t0;
      double theta = segs[i].rate * tau;
      double g = berry ? 0.5 * d.omega1 * std::sin(theta) : 0.0;
      y[k] = -g * grid.sigma_y_weighted[leg.begin + k];
    }
    std::vector<double> cum = num::cumulative_integral(y, h);
    for (std::size_t k = 0; k < count; ++k) out[leg.begin + k] = offset + cum[k];
    offset += cum[count - 1];
  }
  return out;
}

PhaseDecomposition phase_decompose(const Trajectory& traj, const Protocol& p) {
  const std::size_t total = traj.ce.size();
  if (total == 0 || traj.branch.size() != total) {
    throw SamplingError("trajectory has no recorded samples");
  }
  const DriveParams& d = p.params();
  const double x = traj.x;
  const double boost = std::sqrt(1.0 + x * x);

  auto drive_at_theta = [&](double theta, double& delta, double& omega) {
    delta = d.delta1 * std::cos(theta) + d.delta2;
    omega = d.omega1 * std::sin(theta);
  };
  // Overlap of the state with the branch eigenvector, components
  // conjugated; same gauge as the propagator's tracker.
  auto overlap = [&](int branch, double delta, double omega,
                     std::complex<double> ce, std::complex<double> cg,
                     bool& ok) -> std::complex<double> {
    double planar = std::abs(omega) * boost;
    double norm = std::hypot(delta, planar);
    if (norm < 1e-12) {
      ok = false;
      return {0.0, 0.0};
    }
    ok = true;
    double half = 0.5 * std::atan2(planar, delta);
    double xi = (omega == 0.0) ? std::atan(x) : std::atan2(omega * x, omega);
    std::complex<double> phase(std::cos(xi), -std::sin(xi));
    double c = std::cos(half), s = std::sin(half);
    if (branch > 0) return c * ce + s * phase * cg;
    return s * ce - c * phase * cg;
  };
  auto energy = [&](double delta, double omega) {
    return 0.5 * std::hypot(delta, std::abs(omega) * boost);
  };

  PhaseDecomposition res;
  res.x = x;
  res.flips = 0;
  res.min_overlap_sq = 1.0;

  auto spans = leg_spans(traj.seg_begin, total);
  bool anchored = false;
  double prev_arg = 0.0;
  int prev_branch = +1;
  double gamma = 0.0, dyn = 0.0;
  bool degenerate = false;

  for (const LegSpan& leg : spans) {
    std::size_t count = leg.end - leg.begin;
    if (count < 2) throw SamplingError("trajectory leg has fewer than 2 samples");
    double dt = (traj.t[leg.end - 1] - traj.t[leg.begin]) /
                static_cast<double>(count - 1);
    double e_prev = 0.0, e_prev2 = 0.0;
    int par = 0;
    int sign_prev = +1, sign_prev2 = +1;
    for (std::size_t k = leg.begin; k < leg.end; ++k) {
      double delta, omega;
      drive_at_theta(traj.theta_local[k], delta, omega);
      int branch = traj.branch[k];
      bool ok = false;
      std::complex<double> o =
          overlap(branch, delta, omega, traj.ce[k], traj.cg[k], ok);
      if (!ok) {
        degenerate = true;
        continue;
      }
      double arg_now = std::arg(o);
      if (!anchored) {
        anchored = true;
        prev_arg = arg_now;
        prev_branch = branch;
      } else {
        double ref = prev_arg;
        if (branch != prev_branch) {
          // Re-reference the previous amplitudes against the new branch.
          // Across a leg boundary both legs meet at omega = 0 and the
          // previous sample shares this sample's time, so this leg's own
          // angle is the right previous drive.
          double theta_prev = (k == leg.begin) ? traj.theta_local[k]
                                               : traj.theta_local[k - 1];
          double dp, op;
          drive_at_theta(theta_prev, dp, op);
          bool ok_prev = false;
          std::complex<double> o_prev = overlap(
              branch, dp, op, traj.ce[k - 1], traj.cg[k - 1], ok_prev);
          if (ok_prev) ref = std::arg(o_prev);
          res.flips += 1;
          prev_branch = branch;
        }
        gamma += num::principal(arg_now - ref);
        prev_arg = arg_now;
      }
      res.min_overlap_sq = std::min(res.min_overlap_sq, traj.overlap_sq[k]);

      double e_now = static_cast<double>(branch) * energy(delta, omega);
      if (k == leg.begin) {
        par = 0;
        e_prev = e_now;
        e_prev2 = 0.0;
        sign_prev = branch;
        sign_prev2 = branch;
      } else {
        par += 1;
        if (par == 2) {
          bool flipped = sign_prev != branch || sign_prev2 != sign_prev;
          if (flipped) {
            dyn -= dt * (0.5 * (e_prev2 + e_prev) + 0.5 * (e_prev + e_now));
          } else {
            dyn -= dt / 3.0 * (e_prev2 + 4.0 * e_prev + e_now);
          }
          par = 0;
        }
        e_prev2 = e_prev;
        e_prev = e_now;
        sign_prev2 = sign_prev;
        sign_prev = branch;
      }
    }
  }

  res.gamma_total = gamma;
  res.gamma_dyn = dyn;
  res.gamma_geo = gamma - dyn;
  res.valid = !degenerate && res.min_overlap_sq >= 0.81;
  return res;
}

PhaseDecomposition phase_decompose(const LanePhase& lane, double x) {
  PhaseDecomposition res;
  res.x = x;
  res.gamma_total = lane.gamma_total;
  res.gamma_dyn = lane.gamma_dyn;
  res.gamma_geo = lane.gamma_total - lane.gamma_dyn;
  res.min_overlap_sq = lane.min_overlap_sq;
  res.flips = lane.flips;
  res.valid = !lane.degenerate_hit && lane.min_overlap_sq >= 0.81;
  return res;
}

double dp_prediction(double dx_param, double f, double tq_eff,
                     double enhancement) {
  if (!(dx_param > 0)) throw ConfigError("dp_prediction: dx must be positive");
  double a = enhancement * f * tq_eff * dx_param * dx_param;
  return std::sqrt(1.0 + 16.0 * a * a) / (2.0 * dx_param);
}

}  // namespace qmeter
