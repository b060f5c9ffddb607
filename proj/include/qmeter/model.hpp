#pragma once

#include <array>
#include <complex>
#include <vector>

#include "qmeter/units.hpp"

namespace qmeter {

// Quench drive parameter set. All frequencies are angular (rad/us); the
// config layer converts from MHz. tq is the duration of one quench leg.
struct DriveParams {
  double delta1 = 0;
  double delta2 = 0;
  double omega1 = 0;
  double phi = 0;  // drive phase; curvature analysis assumes 0
  double tq = 1;

  double nu() const { return kPi / tq; }
  void validate() const;  // throws ConfigError on nonsense values
};

enum class CouplingLaw { Off, BerryWeighted };
enum class ProtocolKind { Single, Triple };

// One drive leg. The drive angle ramps 0 -> pi at `rate` inside the leg;
// `mult` is the duration in units of tq (1 or 2).
struct Segment {
  double t0 = 0;
  double t1 = 0;
  double rate = 0;
  int mult = 1;
};

// Instantaneous drive values. theta_local is the in-leg drive angle that
// the detuning/Rabi laws consume; theta_timeline = nu * t is the global
// reporting angle (they coincide for the single quench).
struct DriveSample {
  double delta = 0;
  double omega = 0;
  double g = 0;
  double theta_local = 0;
  double theta_timeline = 0;
};

// A quench schedule: either one leg (theta: 0 -> pi over tq) or three legs
// of durations (tq, 2tq, tq). Each leg restarts the drive angle at 0 and
// sweeps it to pi at rates (nu, nu/2, nu), so the detuning jumps suddenly
// at the leg boundaries while Omega and the coupling pass through zero
// continuously. The qubit state is carried across boundaries.
class Protocol {
 public:
  static Protocol single(const DriveParams& p,
                         CouplingLaw law = CouplingLaw::BerryWeighted);
  static Protocol triple(const DriveParams& p,
                         CouplingLaw law = CouplingLaw::BerryWeighted);

  const DriveParams& params() const { return params_; }
  CouplingLaw coupling() const { return coupling_; }
  ProtocolKind kind() const { return kind_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double duration() const { return segments_.back().t1; }
  double nu() const { return params_.nu(); }
  double theta_timeline(double t) const { return nu() * t; }

  // Drive at absolute time t. Boundary times are attributed to the later
  // leg except the final instant, which closes the last leg. Throws a
  // range error outside [0, duration].
  DriveSample drive_at(double t) const;

  // Drive inside a specific leg at local time tau = t - t0. Integration
  // uses this to keep boundary attribution explicit.
  DriveSample drive_in_segment(std::size_t seg, double tau) const;

  double coupling_at(double t) const { return drive_at(t).g; }

 private:
  DriveParams params_;
  CouplingLaw coupling_ = CouplingLaw::BerryWeighted;
  ProtocolKind kind_ = ProtocolKind::Single;
  std::vector<Segment> segments_;
};

// 2x2 Hermitian qubit Hamiltonian at fixed meter position x, row-major
// (H00, H01, H10, H11):
//   H = (delta/2) sz + (omega/2)(cos phi sx + sin phi sy) + g x sy
// The meter coupling enters with a plus sign so that Heisenberg evolution
// gives d<p>/dt = -g <sigma_y> and the aligned-branch Bloch vector is
// (omega, omega x, delta)/norm (for g = omega/2).
std::array<std::complex<double>, 4> hamiltonian_matrix(double delta,
                                                       double omega,
                                                       double phi, double g,
                                                       double x);

// Instantaneous eigenframe of the phi = 0 Hamiltonian with g = omega/2.
struct AdiabaticFrame {
  double e_plus = 0;   // +0.5 sqrt(delta^2 + omega^2 (1+x^2))
  double e_minus = 0;  // -e_plus
  std::array<double, 3> r_plus{};   // unit Bloch vector of chi_plus
  std::array<double, 3> r_minus{};  // = -r_plus
  double xi = 0;           // azimuth of the in-plane field, atan2(omega x, omega)
  double omega_tilde = 0;  // sqrt(1+x^2) * omega
};
AdiabaticFrame adiabatic_eigensystem(double delta, double omega, double x);

// Eigenstates in the gauge with a real-positive |e> component:
//   chi_plus  = (cos(th/2), sin(th/2) e^{i xi})
//   chi_minus = (sin(th/2), -cos(th/2) e^{i xi})
// th is the polar angle of r_plus. At omega = 0 the azimuth uses the
// omega -> 0+ continuation xi = arctan(x).
struct AdiabaticStates {
  std::complex<double> plus_e, plus_g;
  std::complex<double> minus_e, minus_g;
  double e_plus = 0;
};
AdiabaticStates adiabatic_states(double delta, double omega, double x);

// Time-averaged quadratic coefficient of the small-x expansion of E_plus:
//   f = (1/tq) int_0^tq omega^2 / (4 sqrt(delta^2 + omega^2)) dt
// Requires a single-quench protocol (the triple quench reuses the same
// per-leg value by construction).
double dynamic_phase_coefficient(const Protocol& p);

// Ideal Chern number of the closed drive loop: 1 when the detuning ramp
// crosses zero (|delta2| < |delta1|), else 0.
int chern_ideal(const DriveParams& p);

}  // namespace qmeter
