#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "qmeter/analysis.hpp"
#include "qmeter/errors.hpp"
#include "qmeter/experiments.hpp"
#include "qmeter/meter.hpp"
#include "qmeter/numerics.hpp"
#include "qmeter/units.hpp"

using namespace qmeter;

namespace {

DriveParams fig1_params(double delta2_mhz, double tq = 1.0) {
  DriveParams p;
  p.delta1 = mhz_to_rad_us(30.0);
  p.delta2 = mhz_to_rad_us(delta2_mhz);
  p.omega1 = mhz_to_rad_us(10.0);
  p.tq = tq;
  return p;
}

IntegratorConfig cfg(int steps, int samples) {
  IntegratorConfig c;
  c.steps_per_tq = steps;
  c.samples_per_tq = samples;
  return c;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("beta closed form against frozen references") {
  // mpmath (30 digits): sqrt(pi) z exp(z^2) erfc(z), z = 1/(sqrt(2) dx).
  struct Row {
    double dx, expect;
  };
  const Row rows[] = {
      {0.01, 0.99990002998501049}, {0.1, 0.99028596471731921},
      {0.3, 0.92732969462431396},  {0.5, 0.84273845857610895},
      {1.0, 0.65567954241879847},  {2.0, 0.43818222822684617},
      {3.0, 0.32631845921383451},
  };
  for (const Row& r : rows) {
    CHECK(beta_closed_form(r.dx) == doctest::Approx(r.expect).epsilon(1e-13));
    CHECK(beta_quadrature(r.dx) == doctest::Approx(r.expect).epsilon(1e-9));
    CHECK(oracles::beta_reference(r.dx) ==
          doctest::Approx(r.expect).epsilon(1e-10));
  }
  // Monotone decreasing, approaching 1 for a sharp meter.
  CHECK(beta_closed_form(1e-3) > 0.99999);
  double prev = 1.0;
  for (double dx = 0.05; dx < 5.0; dx += 0.05) {
    double b = beta_closed_form(dx);
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("corrected estimator divides out the meter width") {
  for (double dx : {0.1, 0.5, 2.0}) {
    double mp = beta_closed_form(dx) * 1.0;
    CHECK(corrected_chern(mp, dx) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(corrected_chern(0.0, 1.0) == 0.0);
}

TEST_CASE("curvature integral on a synthetic series") {
  CurvatureSeries cs;
  cs.x = 0.0;
  cs.seg_begin = {0};
  const std::size_t n = 201;
  for (std::size_t k = 0; k < n; ++k) {
    double th = kPi * static_cast<double>(k) / static_cast<double>(n - 1);
    cs.theta.push_back(th);
    cs.b.push_back(std::sin(th));
  }
  ChernResult res = chern_integral(cs);
  CHECK(res.total == doctest::Approx(-2.0).epsilon(1e-9));
  REQUIRE(res.partials.size() == 1);
  CHECK(res.partials[0] == doctest::Approx(-2.0).epsilon(1e-9));
  REQUIRE(res.running.size() == n);
  CHECK(res.running.front() == 0.0);
  CHECK(res.running.back() == doctest::Approx(res.total).epsilon(1e-12));
  // C = -int b dtheta, so positive curvature accumulates negative C.
  CHECK(res.running[n / 2] < res.running[0]);

  // A zero series integrates to exactly zero.
  CurvatureSeries zero = cs;
  std::fill(zero.b.begin(), zero.b.end(), 0.0);
  CHECK(chern_integral(zero).total == 0.0);

  // Non-uniform theta samples are a hard error, not a silent inaccuracy.
  CurvatureSeries bad = cs;
  bad.theta[5] += 1e-6;
  CHECK_THROWS_AS(chern_integral(bad), SamplingError);
}

TEST_CASE("curvature series wires the drive weighting correctly") {
  DriveParams p = fig1_params(0.3);
  Protocol proto = Protocol::single(p);
  Trajectory tr = evolve(0.0, proto, cfg(20000, 500));
  CurvatureSeries cs = berry_curvature(tr, proto);
  REQUIRE(cs.theta.size() == tr.t.size());
  CHECK(cs.seg_begin == tr.seg_begin);
  double pref = p.omega1 / (2.0 * proto.nu());
  for (std::size_t k : {std::size_t{17}, std::size_t{250}, std::size_t{499}}) {
    double want = pref * tr.sy[k] * std::sin(tr.theta_local[k]);
    CHECK(cs.b[k] == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(cs.theta == tr.theta_timeline);
}

TEST_CASE("slow sweep reproduces the 1/(1+x^2) curvature suppression") {
  // At meter position x the followed branch carries an adiabatic <sigma_y>
  // of order x/sqrt(1+x^2): the coupling tilts the drive axis. That part is
  // odd in x and grows with the sweep time, so it swamps any single lane
  // but cancels between mirror lanes. The even combination is the actual
  // curvature response, diluted by the solid-angle factor 1/(1+x^2).
  DriveParams p = fig1_params(0.3, 20.0);
  Protocol proto = Protocol::single(p);
  IntegratorConfig c = cfg(20000, 500);
  double c0 = chern_integral(berry_curvature(evolve(0.0, proto, c), proto))
                  .total;
  double x = 0.35;
  double cp = chern_integral(berry_curvature(evolve(x, proto, c), proto))
                  .total;
  double cm = chern_integral(berry_curvature(evolve(-x, proto, c), proto))
                  .total;
  CHECK(c0 == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(std::abs(0.5 * (cp - cm)) > 10.0);  // the odd tilt background
  CHECK(0.5 * (cp + cm) / c0 ==
        doctest::Approx(1.0 / (1.0 + x * x)).epsilon(0.02));
}

TEST_CASE("dynamic phase is even in the meter position") {
  Protocol proto = Protocol::single(fig1_params(0.3));
  IntegratorConfig c = cfg(20000, 1000);
  PhaseDecomposition plus = phase_decompose(evolve(0.3, proto, c), proto);
  PhaseDecomposition minus = phase_decompose(evolve(-0.3, proto, c), proto);
  CHECK(plus.valid);
  CHECK(minus.valid);
  CHECK(plus.gamma_dyn == doctest::Approx(minus.gamma_dyn).epsilon(1e-10));
}

TEST_CASE("dynamic phase scales with the sweep time, geometric does not") {
  IntegratorConfig c = cfg(20000, 1000);
  Protocol p5 = Protocol::single(fig1_params(0.3, 5.0));
  Protocol p10 = Protocol::single(fig1_params(0.3, 10.0));
  PhaseDecomposition d5 = phase_decompose(evolve(0.3, p5, c), p5);
  PhaseDecomposition d10 = phase_decompose(evolve(0.3, p10, c), p10);
  CHECK(d5.valid);
  CHECK(d10.valid);
  CHECK(d10.gamma_dyn / d5.gamma_dyn == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(std::abs(d10.gamma_geo - d5.gamma_geo) < 2e-2);
}

TEST_CASE("triple quench cancels the dynamic phase at x = 0") {
  Protocol proto = Protocol::triple(fig1_params(0.3));
  Trajectory tr = evolve(0.0, proto, cfg(20000, 1000));
  PhaseDecomposition pd = phase_decompose(tr, proto);
  CHECK(pd.valid);
  CHECK(pd.flips == 2);
  // The echo: one leg on chi_plus, two tq on chi_minus, one leg back.
  CHECK(std::abs(pd.gamma_dyn) < 1e-4);
}

TEST_CASE("tracker and replay phase routes agree") {
  Protocol proto = Protocol::triple(fig1_params(0.3));
  IntegratorConfig c = cfg(20000, 1000);
  Trajectory tr = evolve(0.2, proto, c);
  PhaseDecomposition replay = phase_decompose(tr, proto);

  GridEvolveRequest req;
  req.x = {0.2};
  req.track_phases = true;
  GridEvolveResult res = evolve_grid(proto, req, c);
  REQUIRE(res.phases.size() == 1);
  PhaseDecomposition live = phase_decompose(res.phases[0], 0.2);

  CHECK(live.flips == replay.flips);
  CHECK(live.gamma_dyn == doctest::Approx(replay.gamma_dyn).epsilon(1e-9));
  CHECK(live.gamma_total == doctest::Approx(replay.gamma_total).epsilon(1e-9));
  CHECK(live.gamma_geo == doctest::Approx(replay.gamma_geo).epsilon(1e-9));
}

TEST_CASE("momentum bookkeeping identities on a production-size run") {
  DriveParams p = fig1_params(0.3);
  Protocol proto = Protocol::single(p);
  IntegratorConfig c = cfg(20000, 1000);
  MeterGrid grid = make_grid(0.5);

  GridEvolveRequest req;
  req.x = grid.x;
  req.weight.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    req.weight[j] = grid.h * grid.phi[j] * grid.phi[j];
  }
  GridEvolveResult res = evolve_grid(proto, req, c);
  JointState js = assemble(grid, res.ce_final, res.cg_final, res.t.back());
  MomentumDistribution md = momentum_transform(js);

  // Heisenberg route: -int g <sigma_y> dt over the weighted ensemble.
  std::vector<double> hp = heisenberg_mean_p(res, proto);
  REQUIRE(hp.size() == res.t.size());
  CHECK(hp.front() == 0.0);
  CHECK(std::abs(md.mean_p - hp.back()) < 1e-6);

  // Derivative route on the final joint state.
  CHECK(std::abs(md.mean_p - mean_p_derivative(js)) < 1e-5);

  // The interaction commutes with x: position density frozen, norms kept.
  CHECK(position_density_error(js) < 1e-9);
  CHECK(parseval_error(js, md) < 1e-10);

  // Phase-gradient route: <p> = sum_j w_j sum_a |c_a|^2 d(arg c_a)/dx,
  // finite-differenced across lanes. Independent of the FFT machinery.
  double acc = 0.0;
  for (std::size_t j = 1; j + 1 < grid.n; ++j) {
    double inv_2h = 1.0 / (2.0 * grid.h);
    auto grad = [&](const std::vector<std::complex<double>>& amp) {
      double d = std::arg(amp[j + 1]) - std::arg(amp[j - 1]);
      return num::principal(d) * inv_2h;
    };
    double we = std::norm(res.ce_final[j]);
    double wg = std::norm(res.cg_final[j]);
    double lane = 0.0;
    if (we > 1e-12) lane += we * grad(res.ce_final);
    if (wg > 1e-12) lane += wg * grad(res.cg_final);
    acc += req.weight[j] * lane;
  }
  CHECK(acc == doctest::Approx(md.mean_p).epsilon(0.02));
}

TEST_CASE("width prediction closed forms") {
  // Zero enhancement leaves the bare minimal-uncertainty width.
  CHECK(dp_prediction(0.5, 3.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(dp_prediction(0.1, 10.0, 2.0, 0.0) == doctest::Approx(5.0));
  // Frozen mpmath values for the two parameter sets used in acceptance.
  CHECK(dp_prediction(0.3, kTwoPi * 10.0 / 8.0, 1.0, 1.0) ==
        doctest::Approx(4.99843852420222).epsilon(1e-12));
  CHECK(dp_prediction(1.0, 1.38528516905811, 1.0, 4.0) ==
        doctest::Approx(11.0935548844899).epsilon(1e-10));
  // Monotone in the drive coefficient.
  CHECK(dp_prediction(1.0, 2.0, 1.0, 1.0) < dp_prediction(1.0, 3.0, 1.0, 1.0));
}

TEST_CASE("transition estimate from a synthetic sweep") {
  ExperimentResult result;
  for (int i = 1; i <= 10; ++i) {
    PointRecord rec;
    rec.delta2 = static_cast<double>(i);
    rec.dx = 1.0;
    rec.std_p = i <= 5 ? 0.6 : 2.8;
    result.points.push_back(rec);
  }
  // Points at other widths and failed points must not contaminate the fit.
  PointRecord other;
  other.delta2 = 2.0;
  other.dx = 0.5;
  other.std_p = 100.0;
  result.points.push_back(other);
  PointRecord failed;
  failed.delta2 = 5.5;
  failed.dx = 1.0;
  failed.std_p = 1e9;
  failed.error = "synthetic failure";
  result.points.push_back(failed);

  TransitionEstimate est = transition_indicator(result, 1.0);
  REQUIRE(est.found);
  CHECK(est.plateau_low == doctest::Approx(0.6));
  CHECK(est.plateau_high == doctest::Approx(2.8));
  CHECK(est.delta2_star > 5.0);
  CHECK(est.delta2_star < 6.0);

  // Flat data has no crossing to report.
  ExperimentResult flat;
  for (int i = 1; i <= 6; ++i) {
    PointRecord rec;
    rec.delta2 = static_cast<double>(i);
    rec.dx = 1.0;
    rec.std_p = 1.0;
    flat.points.push_back(rec);
  }
  CHECK(!transition_indicator(flat, 1.0).found);
}

}  // TEST_SUITE
