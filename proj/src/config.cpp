#include "qmeter/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "qmeter/errors.hpp"
#include "qmeter/kernels.hpp"
#include "qmeter/units.hpp"

namespace qmeter {

namespace {

using nlohmann::json;

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "figure",        "protocol",          "coupling",
      "delta1_MHz",    "delta2_MHz",        "delta2_MHz_values",
      "omega1_MHz",    "phi_rad",           "tq_us",
      "dx",            "dx_values",         "series_x",
      "grid_n",        "grid_half_width",   "steps_per_tq",
      "samples_per_tq","kernel",            "auto_refine_steps",
      "outputs",       "workers",           "strict",
      "format",        "out_dir"};
  return keys;
}

[[noreturn]] void fail(const std::string& context, const std::string& msg) {
  throw ConfigError(context + ": " + msg);
}

double get_num(const json& doc, const char* key, double def,
               const std::string& ctx) {
  if (!doc.contains(key)) return def;
  const json& v = doc.at(key);
  if (!v.is_number()) fail(ctx, std::string(key) + " must be a number");
  return v.get<double>();
}

long long get_int(const json& doc, const char* key, long long def,
                  const std::string& ctx) {
  if (!doc.contains(key)) return def;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) {
    fail(ctx, std::string(key) + " must be an integer");
  }
  return v.get<long long>();
}

bool get_bool(const json& doc, const char* key, bool def,
              const std::string& ctx) {
  if (!doc.contains(key)) return def;
  const json& v = doc.at(key);
  if (!v.is_boolean()) fail(ctx, std::string(key) + " must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& doc, const char* key, const std::string& def,
                    const std::string& ctx) {
  if (!doc.contains(key)) return def;
  const json& v = doc.at(key);
  if (!v.is_string()) fail(ctx, std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_num_list(const json& doc, const char* key,
                                 const std::string& ctx) {
  std::vector<double> out;
  if (!doc.contains(key)) return out;
  const json& v = doc.at(key);
  if (!v.is_array()) fail(ctx, std::string(key) + " must be an array");
  for (const json& e : v) {
    if (!e.is_number()) {
      fail(ctx, std::string(key) + " must hold only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> get_str_list(const json& doc, const char* key,
                                      const std::string& ctx) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const json& v = doc.at(key);
  if (!v.is_array()) fail(ctx, std::string(key) + " must be an array");
  for (const json& e : v) {
    if (!e.is_string()) {
      fail(ctx, std::string(key) + " must hold only strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// The default transition sweep: 41 values across [0, 2 delta1] plus a
// finer comb around delta1 itself (duplicates removed).
std::vector<double> transition_sweep_mhz(double delta1_mhz) {
  std::vector<double> v = linspace(0.0, 2.0 * delta1_mhz, 41);
  for (double f : {0.92, 0.96, 1.0, 1.04, 1.08}) {
    v.push_back(delta1_mhz * f);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          v.end());
  return v;
}

json preset_doc(const std::string& id) {
  json d;
  if (id == "f1a") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {0.5};
    d["outputs"] = {"bloch_series"};
    d["series_x"] = {0.0, 0.35, -0.35};
  } else if (id == "f1b") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {0.5};
    d["outputs"] = {"curvature_series"};
    d["series_x"] = {0.0, 0.35, -0.35, 1.0};
  } else if (id == "f1c") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = transition_sweep_mhz(30.0);
    d["dx_values"] = {0.01, 0.1, 0.5, 1.0, 2.0, 3.0};
    d["outputs"] = {"mean_p", "mean_p_corrected", "chern_ideal"};
  } else if (id == "f1d") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = {-10.0};
    d["dx_values"] = {0.01, 0.05, 0.1, 0.15, 0.2,  0.3, 0.4, 0.5,
                      0.7,  1.0,  1.3, 1.6,  2.0,  2.5, 3.0};
    d["outputs"] = {"mean_p", "mean_p_corrected", "beta_law"};
  } else if (id == "f2a") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = {-10.0, -5.0, 0.0,  5.0,  10.0,
                              20.0,  30.0, 40.0, 50.0, 60.0};
    d["dx_values"] = {0.1, 0.15, 0.2, 0.23, 0.3, 0.4, 0.5, 1.0, 2.0, 3.0};
    d["outputs"] = {"std_p", "optimal_dx"};
  } else if (id == "f2b") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = linspace(-10.0, 60.0, 36);
    d["dx_values"] = {0.1, 0.5, 1.0, 2.0, 3.0};
    d["outputs"] = {"std_p"};
  } else if (id == "f2c") {
    d["protocol"] = "single";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {1.0};
    d["outputs"] = {"momentum_density"};
  } else if (id == "f3a") {
    d["protocol"] = "triple";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {1.0};
    d["outputs"] = {"bloch_series"};
    d["series_x"] = {0.0};
  } else if (id == "f3b") {
    d["protocol"] = "triple";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {1.0};
    d["outputs"] = {"curvature_series"};
    d["series_x"] = {0.0};
  } else if (id == "f3c") {
    d["protocol"] = "triple";
    d["delta2_MHz_values"] = {0.3};
    d["dx_values"] = {1.0};
    d["outputs"] = {"bloch_series", "curvature_series"};
    d["series_x"] = {0.0, 0.35, -0.35};
  } else if (id == "f3d") {
    d["protocol"] = "triple";
    d["delta2_MHz_values"] = transition_sweep_mhz(30.0);
    d["dx_values"] = {1.0};
    d["outputs"] = {"std_p", "transition"};
  } else {
    std::ostringstream os;
    os << "unknown preset '" << id << "'; available presets:";
    for (const std::string& p : preset_ids()) os << ' ' << p;
    throw ConfigError(os.str());
  }
  d["figure"] = id;
  return d;
}

}  // namespace

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {"f1a", "f1b", "f1c", "f1d",
                                               "f2a", "f2b", "f2c", "f3a",
                                               "f3b", "f3c", "f3d"};
  return ids;
}

RunConfig config_from_json(const json& doc, const std::string& context) {
  if (!doc.is_object()) fail(context, "top level must be a JSON object");
  for (const auto& item : doc.items()) {
    if (allowed_keys().count(item.key()) == 0) {
      std::ostringstream os;
      os << "unknown key '" << item.key() << "'; valid keys are:";
      for (const std::string& k : allowed_keys()) os << ' ' << k;
      fail(context, os.str());
    }
  }

  // A figure id pulls in the preset; explicit keys then override it.
  std::string figure = get_str(doc, "figure", "", context);
  json merged;
  if (!figure.empty()) {
    merged = preset_doc(figure);
    for (const auto& item : doc.items()) merged[item.key()] = item.value();
  } else {
    merged = doc;
  }

  RunConfig cfg;
  cfg.figure = figure;
  SweepSpec& sw = cfg.sweep;

  std::string protocol = get_str(merged, "protocol", "single", context);
  if (protocol == "single") {
    sw.kind = ProtocolKind::Single;
  } else if (protocol == "triple") {
    sw.kind = ProtocolKind::Triple;
  } else {
    fail(context, "protocol must be 'single' or 'triple'");
  }

  std::string coupling = get_str(merged, "coupling", "berry", context);
  if (coupling == "berry") {
    sw.coupling = CouplingLaw::BerryWeighted;
  } else if (coupling == "off") {
    sw.coupling = CouplingLaw::Off;
  } else {
    fail(context, "coupling must be 'berry' or 'off'");
  }

  double delta1_mhz = get_num(merged, "delta1_MHz", 30.0, context);
  double omega1_mhz = get_num(merged, "omega1_MHz", 10.0, context);
  double phi = get_num(merged, "phi_rad", 0.0, context);
  double tq = get_num(merged, "tq_us", 1.0, context);
  if (phi != 0.0) {
    fail(context,
         "phi_rad must be 0: the curvature and momentum readouts assume the "
         "in-plane drive sits on the x axis");
  }
  sw.base.delta1 = mhz_to_rad_us(delta1_mhz);
  sw.base.omega1 = mhz_to_rad_us(omega1_mhz);
  sw.base.phi = 0.0;
  sw.base.tq = tq;

  std::vector<double> d2_mhz;
  if (merged.contains("delta2_MHz") && merged.contains("delta2_MHz_values")) {
    fail(context, "give delta2_MHz or delta2_MHz_values, not both");
  }
  if (merged.contains("delta2_MHz")) {
    d2_mhz.push_back(get_num(merged, "delta2_MHz", 0.0, context));
  } else {
    d2_mhz = get_num_list(merged, "delta2_MHz_values", context);
  }
  if (d2_mhz.empty()) d2_mhz.push_back(0.3);
  for (double v : d2_mhz) sw.delta2_values.push_back(mhz_to_rad_us(v));
  sw.base.delta2 = sw.delta2_values.front();

  if (merged.contains("dx") && merged.contains("dx_values")) {
    fail(context, "give dx or dx_values, not both");
  }
  if (merged.contains("dx")) {
    sw.dx_values.push_back(get_num(merged, "dx", 1.0, context));
  } else {
    sw.dx_values = get_num_list(merged, "dx_values", context);
  }
  if (sw.dx_values.empty()) sw.dx_values.push_back(1.0);
  for (double v : sw.dx_values) {
    if (!(v > 0) || !std::isfinite(v)) {
      fail(context, "dx values must be positive and finite");
    }
  }

  sw.series_x = get_num_list(merged, "series_x", context);
  if (sw.series_x.empty()) sw.series_x.push_back(0.0);

  long long grid_n = get_int(merged, "grid_n", 0, context);
  if (grid_n < 0) fail(context, "grid_n must be >= 0");
  sw.grid.n = static_cast<std::size_t>(grid_n);
  sw.grid.half_width = get_num(merged, "grid_half_width", 0.0, context);
  if (sw.grid.half_width < 0) fail(context, "grid_half_width must be >= 0");

  long long steps = get_int(merged, "steps_per_tq", 20000, context);
  long long samples = get_int(merged, "samples_per_tq", 1000, context);
  if (steps <= 0 || samples <= 0) {
    fail(context, "steps_per_tq and samples_per_tq must be positive");
  }
  if (steps % samples != 0) {
    fail(context, "samples_per_tq must divide steps_per_tq");
  }
  sw.integrator.steps_per_tq = static_cast<int>(steps);
  sw.integrator.samples_per_tq = static_cast<int>(samples);
  sw.integrator.strict = get_bool(merged, "strict", false, context);
  sw.integrator.auto_refine_steps =
      get_bool(merged, "auto_refine_steps", true, context);

  std::string kernel = get_str(merged, "kernel", "auto", context);
  if (auto backend = kernels::parse_backend(kernel)) {
    sw.integrator.backend = *backend;
  } else {
    fail(context, "kernel must be one of: auto scalar avx2 neon");
  }

  sw.outputs = get_str_list(merged, "outputs", context);
  if (sw.outputs.empty()) sw.outputs = {"mean_p", "std_p"};
  try {
    validate_outputs(sw.outputs);
  } catch (const std::exception& ex) {
    fail(context, ex.what());
  }

  long long workers = get_int(merged, "workers", 0, context);
  if (workers < 0) fail(context, "workers must be >= 0");
  if (workers == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    workers = hw > 0 ? static_cast<long long>(hw) : 1;
  }
  sw.workers = static_cast<int>(workers);

  cfg.format = get_str(merged, "format", "csv", context);
  if (cfg.format != "csv" && cfg.format != "json") {
    fail(context, "format must be 'csv' or 'json'");
  }
  cfg.out_dir = get_str(merged, "out_dir", "out", context);

  try {
    sw.base.validate();
  } catch (const std::exception& ex) {
    fail(context, ex.what());
  }

  // Echo the fully-defaulted user-unit key set. Re-parsing it applies the
  // same conversions, so the reproduced sweep matches bit for bit.
  json echo;
  echo["figure"] = cfg.figure;
  echo["protocol"] = protocol;
  echo["coupling"] = coupling;
  echo["delta1_MHz"] = delta1_mhz;
  echo["delta2_MHz_values"] = d2_mhz;
  echo["omega1_MHz"] = omega1_mhz;
  echo["phi_rad"] = 0.0;
  echo["tq_us"] = tq;
  echo["dx_values"] = sw.dx_values;
  echo["series_x"] = sw.series_x;
  echo["grid_n"] = grid_n;
  echo["grid_half_width"] = sw.grid.half_width;
  echo["steps_per_tq"] = steps;
  echo["samples_per_tq"] = samples;
  echo["kernel"] = kernel;
  echo["auto_refine_steps"] = sw.integrator.auto_refine_steps;
  echo["outputs"] = sw.outputs;
  echo["workers"] = workers;
  echo["strict"] = sw.integrator.strict;
  echo["format"] = cfg.format;
  echo["out_dir"] = cfg.out_dir;
  cfg.echo = echo;
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& ex) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + ex.what());
  }
  return config_from_json(doc, path);
}

RunConfig preset_config(const std::string& figure_id) {
  return config_from_json(preset_doc(figure_id), "preset " + figure_id);
}

json resolved_json(const RunConfig& cfg) {
  if (!cfg.echo.is_null()) return cfg.echo;
  // Configs built in code rather than parsed: synthesize the echo by
  // inverting the unit conversions (1 ulp noise is possible here).
  json echo;
  echo["figure"] = cfg.figure;
  echo["protocol"] =
      cfg.sweep.kind == ProtocolKind::Triple ? "triple" : "single";
  echo["coupling"] =
      cfg.sweep.coupling == CouplingLaw::BerryWeighted ? "berry" : "off";
  echo["delta1_MHz"] = rad_us_to_mhz(cfg.sweep.base.delta1);
  std::vector<double> d2;
  for (double v : cfg.sweep.delta2_values) d2.push_back(rad_us_to_mhz(v));
  echo["delta2_MHz_values"] = d2;
  echo["omega1_MHz"] = rad_us_to_mhz(cfg.sweep.base.omega1);
  echo["phi_rad"] = cfg.sweep.base.phi;
  echo["tq_us"] = cfg.sweep.base.tq;
  echo["dx_values"] = cfg.sweep.dx_values;
  echo["series_x"] = cfg.sweep.series_x;
  echo["grid_n"] = cfg.sweep.grid.n;
  echo["grid_half_width"] = cfg.sweep.grid.half_width;
  echo["steps_per_tq"] = cfg.sweep.integrator.steps_per_tq;
  echo["samples_per_tq"] = cfg.sweep.integrator.samples_per_tq;
  echo["kernel"] = kernels::backend_name(cfg.sweep.integrator.backend);
  echo["auto_refine_steps"] = cfg.sweep.integrator.auto_refine_steps;
  echo["outputs"] = cfg.sweep.outputs;
  echo["workers"] = cfg.sweep.workers;
  echo["strict"] = cfg.sweep.integrator.strict;
  echo["format"] = cfg.format;
  echo["out_dir"] = cfg.out_dir;
  return echo;
}

}  // namespace qmeter
