#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "qmeter/errors.hpp"
#include "qmeter/experiments.hpp"
#include "qmeter/units.hpp"

using namespace qmeter;

namespace {

SweepSpec fig1_spec() {
  SweepSpec spec;
  spec.base.delta1 = mhz_to_rad_us(30.0);
  spec.base.omega1 = mhz_to_rad_us(10.0);
  spec.base.tq = 1.0;
  spec.delta2_values = {mhz_to_rad_us(0.3)};
  spec.dx_values = {0.5};
  spec.grid.n = 512;
  spec.grid.half_width = 6.0;
  spec.integrator.steps_per_tq = 20000;
  spec.integrator.samples_per_tq = 1000;
  spec.outputs = {"mean_p", "std_p"};
  return spec;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("output names are validated") {
  CHECK_NOTHROW(validate_outputs({"mean_p", "std_p", "transition"}));
  CHECK_THROWS_AS(validate_outputs({"mean_q"}), ConfigError);
  const auto& known = known_outputs();
  CHECK(std::find(known.begin(), known.end(), "curvature_series") !=
        known.end());
}

TEST_CASE("spec hash tracks physics inputs and ignores execution knobs") {
  SweepSpec spec = fig1_spec();
  std::string base = spec_hash(spec);
  CHECK(base.size() == 16);

  SweepSpec w = spec;
  w.workers = 7;
  w.integrator.backend = kernels::Backend::Scalar;
  CHECK(spec_hash(w) == base);

  SweepSpec d = spec;
  d.dx_values = {0.6};
  CHECK(spec_hash(d) != base);

  SweepSpec s = spec;
  s.integrator.steps_per_tq = 10000;
  CHECK(spec_hash(s) != base);

  SweepSpec k = spec;
  k.kind = ProtocolKind::Triple;
  CHECK(spec_hash(k) != base);
}

TEST_CASE("payloads are bit-identical across workers and backends") {
  SweepSpec spec = fig1_spec();
  spec.workers = 1;
  ExperimentResult a = run_sweep(spec);

  SweepSpec par = spec;
  par.workers = 3;
  ExperimentResult b = run_sweep(par);

  SweepSpec sc = spec;
  sc.integrator.backend = kernels::Backend::Scalar;
  ExperimentResult c = run_sweep(sc);

  REQUIRE(a.points.size() == 1);
  REQUIRE(b.points.size() == 1);
  REQUIRE(c.points.size() == 1);
  CHECK(a.spec_hash == b.spec_hash);
  CHECK(a.spec_hash == c.spec_hash);
  for (const ExperimentResult* r : {&b, &c}) {
    CHECK(r->points[0].mean_p == a.points[0].mean_p);
    CHECK(r->points[0].std_p == a.points[0].std_p);
    CHECK(r->points[0].heisenberg_p == a.points[0].heisenberg_p);
    CHECK(r->points[0].chern_x0 == a.points[0].chern_x0);
    CHECK(r->points[0].mean_p_corrected == a.points[0].mean_p_corrected);
  }
  CHECK(a.points[0].error.empty());
  CHECK(a.points[0].diag.max_norm_drift < 1e-9);
  CHECK(a.points[0].diag.richardson_delta < 1e-9);
}

TEST_CASE("sharp meter agrees with the center-lane curvature integral") {
  SweepSpec spec = fig1_spec();
  spec.dx_values = {0.1};
  spec.grid.n = 0;  // default sizing: 4096 points for this width
  spec.grid.half_width = 0.0;
  ExperimentResult res = run_sweep(spec);
  REQUIRE(res.points.size() == 1);
  const PointRecord& rec = res.points[0];
  REQUIRE(rec.error.empty());
  CHECK(rec.chern_ideal == 1);
  CHECK(std::abs(rec.chern_x0 - 1.0) < 0.02);
  CHECK(std::abs(rec.mean_p_corrected - rec.chern_x0) < 0.02);
  CHECK(std::abs(rec.mean_p - rec.heisenberg_p) < 1e-6);
}

TEST_CASE("a failing point is recorded, not fatal") {
  SweepSpec spec = fig1_spec();
  spec.integrator.steps_per_tq = 20000;
  spec.dx_values = {0.5, -1.0};  // the second width is impossible
  ExperimentResult res = run_sweep(spec);
  REQUIRE(res.points.size() == 2);
  CHECK(res.points[0].error.empty());
  CHECK(!res.points[1].error.empty());
  CHECK(res.points[1].error.find("dx=-1") != std::string::npos);

  SweepSpec empty = fig1_spec();
  empty.delta2_values.clear();
  CHECK_THROWS_AS(run_sweep(empty), ConfigError);
}

TEST_CASE("series outputs carry the documented tables") {
  SweepSpec spec = fig1_spec();
  spec.integrator.steps_per_tq = 4000;
  spec.integrator.samples_per_tq = 200;
  spec.outputs = {"bloch_series", "curvature_series", "momentum_density",
                  "phase_decomposition"};
  spec.series_x = {0.0, 0.35};
  ExperimentResult res = run_sweep(spec);
  REQUIRE(res.points.size() == 1);
  const PointRecord& rec = res.points[0];
  REQUIRE(rec.error.empty());

  REQUIRE(rec.series.count("bloch") == 1);
  const SeriesTable& bloch = rec.series.at("bloch");
  CHECK(bloch.columns ==
        std::vector<std::string>{"x", "theta", "sx", "sy", "sz"});
  CHECK(bloch.rows.size() == 2 * 201);  // two lanes, 201 samples each

  REQUIRE(rec.series.count("curvature") == 1);
  REQUIRE(rec.series.count("chern_running") == 1);
  CHECK(rec.series.at("curvature").rows.size() == 2 * 201);

  REQUIRE(rec.series.count("momentum_density") == 1);
  CHECK(rec.series.at("momentum_density").rows.size() == 512);

  REQUIRE(rec.series.count("phase_decomposition") == 1);
  const SeriesTable& ph = rec.series.at("phase_decomposition");
  CHECK(ph.columns.size() == 6);
  CHECK(ph.rows.size() == 512);
}

TEST_CASE("triple-quench width sweep locates the topological transition") {
  SweepSpec spec = fig1_spec();
  spec.kind = ProtocolKind::Triple;
  spec.dx_values = {1.0};
  spec.grid.n = 0;
  spec.grid.half_width = 0.0;
  spec.integrator.steps_per_tq = 10000;
  spec.integrator.samples_per_tq = 500;
  spec.delta2_values.clear();
  // Three points on each flat shoulder for the plateau averages, plus two
  // inside the rise so the midpoint crossing lands between them. The knee
  // just past the transition (std_p peaks near 33 MHz before the 1/delta2
  // falloff) stays out of the plateau windows on purpose.
  for (double mhz : {1.5, 3.0, 6.0, 24.0, 36.0, 45.0, 52.5, 60.0}) {
    spec.delta2_values.push_back(mhz_to_rad_us(mhz));
  }
  ExperimentResult res = run_sweep(spec);
  for (const PointRecord& rec : res.points) CHECK(rec.error.empty());

  TransitionEstimate est = transition_indicator(res, 1.0);
  REQUIRE(est.found);
  // The width jumps where the detuning offset stops the branch alternation
  // that cancels the dispersive phase, i.e. at |delta2| = |delta1|.
  double star_mhz = rad_us_to_mhz(est.delta2_star);
  CHECK(star_mhz > 24.0);
  CHECK(star_mhz < 36.0);
  CHECK(est.plateau_low < 0.7);
  CHECK(est.plateau_high > 10.0);
  CHECK(est.plateau_high > 5.0 * est.plateau_low);
}

}  // TEST_SUITE
