#include "qmeter/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "qmeter/errors.hpp"
#include "qmeter/units.hpp"

namespace qmeter {

namespace {

using nlohmann::json;

bool has_output(const RunConfig& cfg, const std::string& name) {
  const auto& outs = cfg.sweep.outputs;
  return std::find(outs.begin(), outs.end(), name) != outs.end();
}

// Per-point scalar table with a fixed (delta2_MHz, dx) prefix.
SeriesTable scalar_table(const ExperimentResult& res,
                         const std::vector<std::string>& tail,
                         const std::vector<double (*)(const PointRecord&)>&
                             getters) {
  SeriesTable t;
  t.columns = {"delta2_MHz", "dx"};
  t.columns.insert(t.columns.end(), tail.begin(), tail.end());
  for (const PointRecord& rec : res.points) {
    if (!rec.error.empty()) continue;
    std::vector<double> row = {rad_us_to_mhz(rec.delta2), rec.dx};
    for (auto g : getters) row.push_back(g(rec));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Flattens a stored per-point series, prefixing the sweep coordinates.
SeriesTable series_table(const ExperimentResult& res, const char* key) {
  SeriesTable t;
  bool first = true;
  for (const PointRecord& rec : res.points) {
    if (!rec.error.empty()) continue;
    auto it = rec.series.find(key);
    if (it == rec.series.end()) continue;
    if (first) {
      t.columns = {"delta2_MHz", "dx"};
      t.columns.insert(t.columns.end(), it->second.columns.begin(),
                       it->second.columns.end());
      first = false;
    }
    for (const std::vector<double>& row : it->second.rows) {
      std::vector<double> out = {rad_us_to_mhz(rec.delta2), rec.dx};
      out.insert(out.end(), row.begin(), row.end());
      t.rows.push_back(std::move(out));
    }
  }
  return t;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<Dataset> build_datasets(const RunConfig& cfg,
                                    const ExperimentResult& res) {
  std::vector<Dataset> out;
  auto add = [&out](const char* name, SeriesTable t) {
    if (!t.rows.empty()) out.push_back({name, std::move(t)});
  };

  if (has_output(cfg, "mean_p")) {
    add("chern_raw",
        scalar_table(res, {"mean_p", "beta", "heisenberg_p"},
                     {[](const PointRecord& r) { return r.mean_p; },
                      [](const PointRecord& r) { return r.beta; },
                      [](const PointRecord& r) { return r.heisenberg_p; }}));
  }
  if (has_output(cfg, "mean_p_corrected")) {
    add("chern_corrected",
        scalar_table(res, {"mean_p", "beta", "mean_p_corrected"},
                     {[](const PointRecord& r) { return r.mean_p; },
                      [](const PointRecord& r) { return r.beta; },
                      [](const PointRecord& r) { return r.mean_p_corrected; }}));
  }
  if (has_output(cfg, "chern_ideal")) {
    add("chern_ideal",
        scalar_table(
            res, {"chern_ideal", "chern_x0"},
            {[](const PointRecord& r) { return double(r.chern_ideal); },
             [](const PointRecord& r) { return r.chern_x0; }}));
  }
  if (has_output(cfg, "std_p")) {
    add("std_p",
        scalar_table(res, {"std_p", "mean_p"},
                     {[](const PointRecord& r) { return r.std_p; },
                      [](const PointRecord& r) { return r.mean_p; }}));
  }
  if (has_output(cfg, "beta_law")) {
    SeriesTable t;
    t.columns = {"dx", "beta", "mean_p", "ratio"};
    for (const PointRecord& rec : res.points) {
      if (!rec.error.empty()) continue;
      double ratio = rec.beta != 0 ? rec.mean_p / rec.beta : 0.0;
      t.rows.push_back({rec.dx, rec.beta, rec.mean_p, ratio});
    }
    add("beta_law", std::move(t));
  }
  if (has_output(cfg, "curvature_series")) {
    add("curvature", series_table(res, "curvature"));
    add("chern_running", series_table(res, "chern_running"));
  }
  if (has_output(cfg, "bloch_series")) {
    add("bloch_series", series_table(res, "bloch"));
  }
  if (has_output(cfg, "momentum_density")) {
    add("momentum_density", series_table(res, "momentum_density"));
  }
  if (has_output(cfg, "phase_decomposition")) {
    add("phase_decomposition", series_table(res, "phase_decomposition"));
  }
  if (has_output(cfg, "optimal_dx")) {
    SeriesTable t;
    t.columns = {"delta2_MHz", "argmin_dx", "min_std_p"};
    std::map<double, std::pair<double, double>> best;  // delta2 -> (dx, std_p)
    for (const PointRecord& rec : res.points) {
      if (!rec.error.empty()) continue;
      auto it = best.find(rec.delta2);
      if (it == best.end() || rec.std_p < it->second.second) {
        best[rec.delta2] = {rec.dx, rec.std_p};
      }
    }
    for (const auto& kv : best) {
      t.rows.push_back(
          {rad_us_to_mhz(kv.first), kv.second.first, kv.second.second});
    }
    add("optimal_dx", std::move(t));
  }
  if (has_output(cfg, "transition")) {
    SeriesTable t;
    t.columns = {"dx", "delta2_star_MHz", "plateau_low", "plateau_high",
                 "found"};
    for (double dx : cfg.sweep.dx_values) {
      TransitionEstimate est = transition_indicator(res, dx);
      t.rows.push_back({dx, rad_us_to_mhz(est.delta2_star), est.plateau_low,
                        est.plateau_high, est.found ? 1.0 : 0.0});
    }
    add("transition", std::move(t));
  }
  return out;
}

json diagnostics_json(const RunConfig& cfg, const ExperimentResult& res,
                      double wall_seconds) {
  json doc;
  doc["spec_hash"] = res.spec_hash;
  doc["figure"] = cfg.figure;
  json pts = json::array();
  for (const PointRecord& rec : res.points) {
    json p;
    p["delta2_MHz"] = rad_us_to_mhz(rec.delta2);
    p["dx"] = rec.dx;
    if (!rec.error.empty()) {
      p["error"] = rec.error;
    } else {
      p["mean_p"] = rec.mean_p;
      p["std_p"] = rec.std_p;
      p["chern_x0"] = rec.chern_x0;
      p["max_norm_drift"] = rec.diag.max_norm_drift;
      p["steps_total"] = rec.diag.steps_total;
      p["dual_p_delta"] = rec.diag.dual_p_delta;
      p["heisenberg_delta"] = rec.diag.heisenberg_delta;
      p["richardson_delta"] = rec.diag.richardson_delta;
      p["warnings"] = rec.diag.warnings;
    }
    pts.push_back(std::move(p));
  }
  doc["points"] = std::move(pts);
  doc["timing"]["wall_seconds"] = wall_seconds;
  return doc;
}

void write_csv(const std::string& path, const SeriesTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const std::vector<double>& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

void write_json_records(const std::string& path, const SeriesTable& table) {
  json arr = json::array();
  for (const std::vector<double>& row : table.rows) {
    json rec;
    for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c) {
      rec[table.columns[c]] = row[c];
    }
    arr.push_back(std::move(rec));
  }
  write_text(path, arr.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace qmeter
