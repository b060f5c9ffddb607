#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "qmeter/config.hpp"
#include "qmeter/errors.hpp"
#include "qmeter/units.hpp"

using namespace qmeter;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("an empty document gets the reference parameters") {
  RunConfig cfg = config_from_json(json::object(), "test");
  const SweepSpec& sw = cfg.sweep;
  CHECK(sw.base.delta1 == doctest::Approx(mhz_to_rad_us(30.0)));
  CHECK(sw.base.omega1 == doctest::Approx(mhz_to_rad_us(10.0)));
  CHECK(sw.base.tq == 1.0);
  CHECK(sw.kind == ProtocolKind::Single);
  CHECK(sw.coupling == CouplingLaw::BerryWeighted);
  REQUIRE(sw.delta2_values.size() == 1);
  CHECK(sw.delta2_values[0] == doctest::Approx(mhz_to_rad_us(0.3)));
  CHECK(sw.dx_values == std::vector<double>{1.0});
  CHECK(sw.series_x == std::vector<double>{0.0});
  CHECK(sw.grid.n == 0);
  CHECK(sw.integrator.steps_per_tq == 20000);
  CHECK(sw.integrator.samples_per_tq == 1000);
  CHECK(sw.integrator.auto_refine_steps);
  CHECK(!sw.integrator.strict);
  CHECK(sw.workers >= 1);
  CHECK(sw.outputs == std::vector<std::string>{"mean_p", "std_p"});
  CHECK(cfg.format == "csv");
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.figure.empty());
}

TEST_CASE("frequencies convert from MHz to angular rad/us") {
  json doc = {{"delta1_MHz", 12.5}, {"delta2_MHz", -4.0}};
  RunConfig cfg = config_from_json(doc, "test");
  CHECK(cfg.sweep.base.delta1 ==
        doctest::Approx(kTwoPi * 12.5).epsilon(1e-15));
  CHECK(cfg.sweep.delta2_values[0] ==
        doctest::Approx(-kTwoPi * 4.0).epsilon(1e-15));
}

TEST_CASE("bad documents are rejected with the offending key named") {
  CHECK_THROWS_AS(config_from_json(json::array(), "t"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json({{"delton_MHz", 1.0}}, "t"),
                       doctest::Contains("delton_MHz"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"delta1_MHz", "thirty"}}, "t"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json({{"delta2_MHz", 1.0}, {"delta2_MHz_values", {1.0}}},
                       "t"),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_json({{"dx", 1.0}, {"dx_values", {1.0}}}, "t"),
      ConfigError);
  CHECK_THROWS_AS(config_from_json({{"phi_rad", 0.1}}, "t"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"dx", -2.0}}, "t"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"kernel", "mmx"}}, "t"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"format", "xml"}}, "t"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"protocol", "double"}}, "t"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json({{"outputs", {"mean_q"}}}, "t"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json({{"grid_n", -4}}, "t"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"workers", -1}}, "t"), ConfigError);
  CHECK_THROWS_AS(
      config_from_json({{"steps_per_tq", 1000}, {"samples_per_tq", 300}},
                       "t"),
      ConfigError);
  CHECK_THROWS_AS(config_from_json({{"tq_us", 0.0}}, "t"), ConfigError);
}

TEST_CASE("kernel and worker knobs parse") {
  json doc = {{"kernel", "scalar"}, {"workers", 3}, {"strict", true}};
  RunConfig cfg = config_from_json(doc, "test");
  CHECK(cfg.sweep.integrator.backend == kernels::Backend::Scalar);
  CHECK(cfg.sweep.workers == 3);
  CHECK(cfg.sweep.integrator.strict);
  // workers = 0 resolves to the machine's concurrency, never zero.
  RunConfig autod = config_from_json({{"workers", 0}}, "test");
  CHECK(autod.sweep.workers >= 1);
}

TEST_CASE("presets cover every figure panel") {
  CHECK(preset_ids().size() == 11);
  for (const std::string& id : preset_ids()) {
    RunConfig cfg = preset_config(id);
    CHECK(cfg.figure == id);
    CHECK(!cfg.sweep.outputs.empty());
  }
  CHECK_THROWS_AS(preset_config("f9z"), ConfigError);
}

TEST_CASE("preset parameter sets match the documented panels") {
  RunConfig f1c = preset_config("f1c");
  CHECK(f1c.sweep.kind == ProtocolKind::Single);
  CHECK(f1c.sweep.dx_values ==
        std::vector<double>{0.01, 0.1, 0.5, 1.0, 2.0, 3.0});
  // 41-point ramp over [0, 2 delta1] plus the 5-point comb at the
  // transition, deduplicated at delta1 itself.
  CHECK(f1c.sweep.delta2_values.size() == 45);

  RunConfig f1a = preset_config("f1a");
  CHECK(f1a.sweep.series_x == std::vector<double>{0.0, 0.35, -0.35});

  RunConfig f3d = preset_config("f3d");
  CHECK(f3d.sweep.kind == ProtocolKind::Triple);
  CHECK(f3d.sweep.dx_values == std::vector<double>{1.0});
  CHECK(f3d.sweep.delta2_values.size() == 45);
  CHECK(std::find(f3d.sweep.outputs.begin(), f3d.sweep.outputs.end(),
                  "transition") != f3d.sweep.outputs.end());
}

TEST_CASE("explicit keys override the preset they extend") {
  // The preset fills dx_values, so the override must use the list form;
  // mixing in the scalar dx would trip the one-form-only guard.
  json doc = {{"figure", "f1b"}, {"dx_values", {0.25}}, {"workers", 2}};
  RunConfig cfg = config_from_json(doc, "test");
  CHECK(cfg.figure == "f1b");
  CHECK(cfg.sweep.dx_values == std::vector<double>{0.25});
  CHECK(cfg.sweep.workers == 2);
  CHECK(cfg.sweep.outputs == std::vector<std::string>{"curvature_series"});
}

TEST_CASE("resolved echo reparses to the same sweep") {
  RunConfig a = preset_config("f2a");
  json echo = resolved_json(a);
  RunConfig b = config_from_json(echo, "echo");
  CHECK(spec_hash(a.sweep) == spec_hash(b.sweep));
  CHECK(a.format == b.format);
  CHECK(a.out_dir == b.out_dir);
  CHECK(resolved_json(b) == echo);
}

TEST_CASE("config files parse from disk") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path();
  fs::path good = dir / "qmeter_test_good.json";
  fs::path bad = dir / "qmeter_test_bad.json";
  {
    std::ofstream out(good);
    out << R"({"figure": "f2c", "steps_per_tq": 4000,
               "samples_per_tq": 200})";
  }
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  RunConfig cfg = parse_config(good.string());
  CHECK(cfg.figure == "f2c");
  CHECK(cfg.sweep.integrator.steps_per_tq == 4000);
  CHECK_THROWS_AS(parse_config(bad.string()), ConfigError);
  CHECK_THROWS_AS(parse_config((dir / "qmeter_missing.json").string()),
                  ConfigError);
  std::remove(good.string().c_str());
  std::remove(bad.string().c_str());
}

}  // TEST_SUITE
