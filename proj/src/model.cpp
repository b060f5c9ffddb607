#include "qmeter/model.hpp"

#include <cmath>
#include <sstream>

#include "qmeter/errors.hpp"
#include "qmeter/numerics.hpp"

namespace qmeter {

void DriveParams::validate() const {
  if (!(tq > 0.0)) {
    std::ostringstream os;
    os << "tq must be positive (got " << tq << " us)";
    throw ConfigError(os.str());
  }
  if (omega1 < 0.0) {
    throw ConfigError("omega1 must be nonnegative");
  }
  if (!std::isfinite(delta1) || !std::isfinite(delta2) ||
      !std::isfinite(omega1) || !std::isfinite(phi)) {
    throw ConfigError("drive parameters must be finite");
  }
}

Protocol Protocol::single(const DriveParams& p, CouplingLaw law) {
  p.validate();
  Protocol proto;
  proto.params_ = p;
  proto.coupling_ = law;
  proto.kind_ = ProtocolKind::Single;
  proto.segments_ = {{0.0, p.tq, p.nu(), 1}};
  return proto;
}

Protocol Protocol::triple(const DriveParams& p, CouplingLaw law) {
  p.validate();
  Protocol proto;
  proto.params_ = p;
  proto.coupling_ = law;
  proto.kind_ = ProtocolKind::Triple;
  double nu = p.nu();
  proto.segments_ = {{0.0, p.tq, nu, 1},
                     {p.tq, 3.0 * p.tq, 0.5 * nu, 2},
                     {3.0 * p.tq, 4.0 * p.tq, nu, 1}};
  return proto;
}

DriveSample Protocol::drive_in_segment(std::size_t seg, double tau) const {
  const Segment& s = segments_[seg];
  double theta = s.rate * tau;
  DriveSample out;
  out.theta_local = theta;
  out.theta_timeline = nu() * (s.t0 + tau);
  out.delta = params_.delta1 * std::cos(theta) + params_.delta2;
  out.omega = params_.omega1 * std::sin(theta);
  out.g = (coupling_ == CouplingLaw::BerryWeighted) ? 0.5 * out.omega : 0.0;
  return out;
}

DriveSample Protocol::drive_at(double t) const {
  const double eps = 1e-12 * duration();
  if (t < -eps || t > duration() + eps) {
    std::ostringstream os;
    os << "time " << t << " outside protocol timeline [0, " << duration()
       << "]";
    throw std::out_of_range(os.str());
  }
  if (t < 0.0) t = 0.0;
  if (t > duration()) t = duration();
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    if (t < segments_[i].t1) return drive_in_segment(i, t - segments_[i].t0);
  }
  return drive_in_segment(segments_.size() - 1,
                          t - segments_.back().t0);
}

std::array<std::complex<double>, 4> hamiltonian_matrix(double delta,
                                                       double omega,
                                                       double phi, double g,
                                                       double x) {
  const std::complex<double> i1(0.0, 1.0);
  double q = 0.5 * omega * std::cos(phi);
  double v = 0.5 * omega * std::sin(phi) + g * x;
  return {std::complex<double>(0.5 * delta, 0.0), q - i1 * v, q + i1 * v,
          std::complex<double>(-0.5 * delta, 0.0)};
}

AdiabaticFrame adiabatic_eigensystem(double delta, double omega, double x) {
  double planar = omega * std::sqrt(1.0 + x * x);
  double norm = std::hypot(delta, planar);
  if (norm == 0.0) {
    throw DegeneracyError("adiabatic eigensystem at a degenerate point");
  }
  AdiabaticFrame frame;
  frame.e_plus = 0.5 * norm;
  frame.e_minus = -frame.e_plus;
  frame.r_plus = {omega / norm, omega * x / norm, delta / norm};
  frame.r_minus = {-frame.r_plus[0], -frame.r_plus[1], -frame.r_plus[2]};
  frame.omega_tilde = planar;
  // Azimuth of the in-plane field (omega, omega x). For omega = 0 take the
  // omega -> 0+ limit so the gauge continues through the poles.
  frame.xi = (omega == 0.0) ? std::atan(x) : std::atan2(omega * x, omega);
  return frame;
}

AdiabaticStates adiabatic_states(double delta, double omega, double x) {
  double planar = std::abs(omega) * std::sqrt(1.0 + x * x);
  double norm = std::hypot(delta, planar);
  if (norm == 0.0) {
    throw DegeneracyError("adiabatic states at a degenerate point");
  }
  double theta = std::atan2(planar, delta);  // polar angle, in [0, pi]
  double xi = (omega == 0.0) ? std::atan(x) : std::atan2(omega * x, omega);
  double c = std::cos(0.5 * theta);
  double s = std::sin(0.5 * theta);
  std::complex<double> phase(std::cos(xi), std::sin(xi));
  AdiabaticStates st;
  st.plus_e = c;
  st.plus_g = s * phase;
  st.minus_e = s;
  st.minus_g = -c * phase;
  st.e_plus = 0.5 * norm;
  return st;
}

double dynamic_phase_coefficient(const Protocol& p) {
  if (p.kind() != ProtocolKind::Single) {
    throw ConfigError(
        "dynamic_phase_coefficient expects a single-quench protocol");
  }
  const DriveParams& d = p.params();
  // Rate-independent form: average over theta in [0, pi].
  const std::size_t n = 4097;
  double h = kPi / static_cast<double>(n - 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double theta = h * static_cast<double>(i);
    double om = d.omega1 * std::sin(theta);
    double de = d.delta1 * std::cos(theta) + d.delta2;
    double e2 = de * de + om * om;
    if (e2 < 1e-24) {
      throw DegeneracyError(
          "drive passes through a spectral degeneracy; the dynamic-phase "
          "coefficient is singular");
    }
    y[i] = om * om / (4.0 * std::sqrt(e2));
  }
  return num::simpson(y, h) / kPi;
}

int chern_ideal(const DriveParams& p) {
  return std::abs(p.delta2) < std::abs(p.delta1) ? 1 : 0;
}

}  // namespace qmeter
