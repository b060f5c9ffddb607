#include "qmeter/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qmeter/errors.hpp"
#include "qmeter/numerics.hpp"

namespace qmeter {

namespace {

bool wants(const std::vector<std::string>& outputs, const std::string& name) {
  return std::find(outputs.begin(), outputs.end(), name) != outputs.end();
}

void append_field(std::string& s, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  s += key;
  s += '=';
  s += buf;
  s += ';';
}

void append_list(std::string& s, const char* key,
                 const std::vector<double>& vs) {
  s += key;
  s += '=';
  char buf[64];
  for (double v : vs) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    s += buf;
  }
  s += ';';
}

SeriesTable bloch_table(const std::vector<Trajectory>& lanes) {
  SeriesTable t;
  t.columns = {"x", "theta", "sx", "sy", "sz"};
  for (const Trajectory& traj : lanes) {
    for (std::size_t k = 0; k < traj.sy.size(); ++k) {
      t.rows.push_back({traj.x, traj.theta_timeline[k], traj.sx[k],
                        traj.sy[k], traj.sz[k]});
    }
  }
  return t;
}

}  // namespace

const std::vector<std::string>& known_outputs() {
  static const std::vector<std::string> names = {
      "chern_ideal",   "mean_p",           "mean_p_corrected",
      "std_p",         "curvature_series", "momentum_density",
      "phase_decomposition", "bloch_series", "beta_law",
      "optimal_dx",    "transition"};
  return names;
}

void validate_outputs(const std::vector<std::string>& outputs) {
  const auto& known = known_outputs();
  for (const std::string& o : outputs) {
    if (std::find(known.begin(), known.end(), o) == known.end()) {
      std::ostringstream os;
      os << "unknown output '" << o << "'; valid outputs are:";
      for (const std::string& k : known) os << ' ' << k;
      throw ConfigError(os.str());
    }
  }
}

std::string spec_hash(const SweepSpec& spec) {
  // Canonical serialization of every result-bearing field. Worker count
  // and kernel backend are left out on purpose: payloads are bit-identical
  // across them, and the hash asserts exactly that equivalence.
  std::string s;
  append_field(s, "delta1", spec.base.delta1);
  append_field(s, "omega1", spec.base.omega1);
  append_field(s, "phi", spec.base.phi);
  append_field(s, "tq", spec.base.tq);
  s += spec.kind == ProtocolKind::Triple ? "kind=triple;" : "kind=single;";
  s += spec.coupling == CouplingLaw::BerryWeighted ? "coupling=berry;"
                                                   : "coupling=off;";
  append_list(s, "delta2", spec.delta2_values);
  append_list(s, "dx", spec.dx_values);
  append_field(s, "grid_n", static_cast<double>(spec.grid.n));
  append_field(s, "half_width", spec.grid.half_width);
  append_field(s, "steps", static_cast<double>(spec.integrator.steps_per_tq));
  append_field(s, "samples",
               static_cast<double>(spec.integrator.samples_per_tq));
  s += spec.integrator.strict ? "strict=1;" : "strict=0;";
  s += spec.integrator.auto_refine_steps ? "refine=1;" : "refine=0;";
  s += "outputs=";
  for (const std::string& o : spec.outputs) {
    s += o;
    s += ',';
  }
  s += ';';
  append_list(s, "series_x", spec.series_x);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(num::fnv1a(s)));
  return buf;
}

namespace {

PointRecord run_point(const SweepSpec& spec, double delta2, double dx) {
  PointRecord rec;
  rec.delta2 = delta2;
  rec.dx = dx;

  DriveParams params = spec.base;
  params.delta2 = delta2;
  Protocol protocol = spec.kind == ProtocolKind::Triple
                          ? Protocol::triple(params, spec.coupling)
                          : Protocol::single(params, spec.coupling);
  rec.chern_ideal = chern_ideal(params);
  rec.beta = beta_closed_form(dx);

  const bool track_phases = wants(spec.outputs, "phase_decomposition");
  MeterGrid grid = make_grid(dx, spec.grid.n, spec.grid.half_width);

  GridEvolveRequest req;
  req.x = grid.x;
  req.weight.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    req.weight[j] = grid.h * grid.phi[j] * grid.phi[j];
  }
  req.track_phases = track_phases;
  req.mirror_economy = true;
  req.workers = spec.workers;

  GridEvolveResult gres = evolve_grid(protocol, req, spec.integrator);
  rec.diag.max_norm_drift = gres.max_norm_drift;
  rec.diag.steps_total = gres.steps_total;
  rec.diag.warnings = gres.warnings;

  JointState js = assemble(grid, gres.ce_final, gres.cg_final, gres.t.back());
  MomentumDistribution md = momentum_transform(js);
  rec.mean_p = md.mean_p;
  rec.std_p = md.std_p;
  rec.mean_p_corrected = md.mean_p / rec.beta;
  rec.diag.dual_p_delta = std::abs(md.mean_p - mean_p_derivative(js));

  std::vector<double> hp = heisenberg_mean_p(gres, protocol);
  rec.heisenberg_p = hp.back();
  rec.diag.heisenberg_delta = std::abs(md.mean_p - rec.heisenberg_p);

  // The x = 0 lane carries the ideal pointer reading; its curvature
  // integral is the reference Chern number for the point.
  Trajectory center = evolve(0.0, protocol, spec.integrator);
  ChernResult cres = chern_integral(berry_curvature(center, protocol));
  rec.chern_x0 = cres.total;
  rec.chern_partials = cres.partials;

  // Step-halving check on the center lane: the final state must be
  // converged well past the acceptance tolerances.
  {
    IntegratorConfig twice = spec.integrator;
    twice.steps_per_tq *= 2;
    Trajectory fine = evolve(0.0, protocol, twice);
    double d2 = std::norm(center.ce.back() - fine.ce.back()) +
                std::norm(center.cg.back() - fine.cg.back());
    rec.diag.richardson_delta = std::sqrt(d2);
  }

  std::vector<double> series_x = spec.series_x;
  if (series_x.empty()) series_x.push_back(0.0);

  if (wants(spec.outputs, "bloch_series")) {
    std::vector<Trajectory> lanes;
    for (double sx : series_x) {
      lanes.push_back(evolve(sx, protocol, spec.integrator));
    }
    rec.series["bloch"] = bloch_table(lanes);
  }

  if (wants(spec.outputs, "curvature_series")) {
    SeriesTable curv, running;
    curv.columns = {"x", "theta", "b"};
    running.columns = {"x", "theta", "running_chern"};
    for (double sx : series_x) {
      Trajectory traj = evolve(sx, protocol, spec.integrator);
      CurvatureSeries cs = berry_curvature(traj, protocol);
      ChernResult cr = chern_integral(cs);
      for (std::size_t k = 0; k < cs.b.size(); ++k) {
        curv.rows.push_back({sx, cs.theta[k], cs.b[k]});
        running.rows.push_back({sx, cs.theta[k], cr.running[k]});
      }
    }
    rec.series["curvature"] = curv;
    rec.series["chern_running"] = running;
  }

  if (wants(spec.outputs, "momentum_density")) {
    SeriesTable t;
    t.columns = {"p", "density_e", "density_g", "density_total"};
    for (std::size_t k = 0; k < md.p.size(); ++k) {
      t.rows.push_back({md.p[k], md.density_e[k], md.density_g[k],
                        md.density_e[k] + md.density_g[k]});
    }
    rec.series["momentum_density"] = t;
  }

  if (track_phases) {
    SeriesTable t;
    t.columns = {"x", "gamma_total", "gamma_dyn", "gamma_geo", "flips",
                 "valid"};
    for (std::size_t j = 0; j < grid.n; ++j) {
      PhaseDecomposition pd = phase_decompose(gres.phases[j], grid.x[j]);
      t.rows.push_back({pd.x, pd.gamma_total, pd.gamma_dyn, pd.gamma_geo,
                        static_cast<double>(pd.flips),
                        pd.valid ? 1.0 : 0.0});
    }
    rec.series["phase_decomposition"] = t;
  }

  return rec;
}

}  // namespace

ExperimentResult run_sweep(const SweepSpec& spec) {
  validate_outputs(spec.outputs);
  spec.base.validate();
  if (spec.delta2_values.empty() || spec.dx_values.empty()) {
    throw ConfigError("sweep needs at least one delta2 and one dx value");
  }
  ExperimentResult result;
  result.spec_hash = spec_hash(spec);
  for (double delta2 : spec.delta2_values) {
    for (double dx : spec.dx_values) {
      try {
        result.points.push_back(run_point(spec, delta2, dx));
      } catch (const std::exception& ex) {
        PointRecord rec;
        rec.delta2 = delta2;
        rec.dx = dx;
        std::ostringstream os;
        os << "delta2=" << delta2 << " dx=" << dx << ": " << ex.what();
        rec.error = os.str();
        result.points.push_back(std::move(rec));
      }
    }
  }
  return result;
}

ExperimentResult run_single_quench(const SweepSpec& spec) {
  SweepSpec s = spec;
  s.kind = ProtocolKind::Single;
  return run_sweep(s);
}

ExperimentResult run_triple_quench(const SweepSpec& spec) {
  SweepSpec s = spec;
  s.kind = ProtocolKind::Triple;
  return run_sweep(s);
}

TransitionEstimate transition_indicator(const ExperimentResult& result,
                                        double dx) {
  std::vector<std::pair<double, double>> pts;  // (delta2, std_p)
  for (const PointRecord& rec : result.points) {
    if (rec.dx == dx && rec.error.empty()) {
      pts.emplace_back(rec.delta2, rec.std_p);
    }
  }
  TransitionEstimate est;
  if (pts.size() < 4) return est;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::size_t edge = std::min<std::size_t>(3, pts.size() / 2);
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < edge; ++i) {
    lo += pts[i].second;
    hi += pts[pts.size() - 1 - i].second;
  }
  lo /= static_cast<double>(edge);
  hi /= static_cast<double>(edge);
  est.plateau_low = lo;
  est.plateau_high = hi;
  if (std::abs(hi - lo) < 1e-9 * std::max(std::abs(hi), std::abs(lo))) {
    return est;  // no contrast between the plateaus
  }
  double mid = 0.5 * (lo + hi);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i].second - mid, b = pts[i + 1].second - mid;
    if (a == 0.0) {
      est.found = true;
      est.delta2_star = pts[i].first;
      return est;
    }
    if (a * b < 0.0) {
      double f = a / (a - b);
      est.found = true;
      est.delta2_star = pts[i].first + f * (pts[i + 1].first - pts[i].first);
      return est;
    }
  }
  return est;
}

}  // namespace qmeter
