#include "qmeter/propagator.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <sstream>
#include <thread>

#include "qmeter/errors.hpp"
#include "qmeter/numerics.hpp"

namespace qmeter {

namespace {

struct SegmentPlan {
  double t0 = 0;
  double duration = 0;
  double rate = 0;
  std::size_t steps = 0;
  std::size_t samples = 0;  // recorded intervals; points = samples + 1
  std::size_t stride = 0;   // steps per recorded interval
  double dt = 0;
};

struct Plan {
  std::vector<SegmentPlan> segs;
  std::vector<double> t, theta_timeline, theta_local;
  std::vector<std::size_t> seg_begin;
  std::size_t total_points = 0;
  std::size_t steps_total = 0;
  double e_max = 0;
  std::vector<std::string> warnings;
};

double max_quasienergy(const Protocol& p, double x_absmax) {
  const DriveParams& d = p.params();
  double boost = std::sqrt(1.0 + x_absmax * x_absmax);
  double e_max = 0.0;
  const int n = 1025;
  for (int i = 0; i < n; ++i) {
    double theta = kPi * static_cast<double>(i) / (n - 1);
    double de = d.delta1 * std::cos(theta) + d.delta2;
    double om = d.omega1 * std::sin(theta) * boost;
    e_max = std::max(e_max, 0.5 * std::hypot(de, om));
  }
  return e_max;
}

Plan plan_segments(const Protocol& p, const IntegratorConfig& cfg,
                   double x_absmax, bool strict) {
  if (cfg.steps_per_tq <= 0 || cfg.samples_per_tq <= 0) {
    throw ConfigError("steps_per_tq and samples_per_tq must be positive");
  }
  if (cfg.steps_per_tq % cfg.samples_per_tq != 0) {
    std::ostringstream os;
    os << "samples_per_tq (" << cfg.samples_per_tq
       << ") must divide steps_per_tq (" << cfg.steps_per_tq << ")";
    throw ConfigError(os.str());
  }

  Plan plan;
  plan.e_max = max_quasienergy(p, x_absmax);
  const DriveParams& d = p.params();

  // Rough resolution guard on the configured step count: ask for at least
  // 100 steps per cycle of the fastest precession over the x range.
  double omega_max = 2.0 * plan.e_max;
  double needed = 100.0 * (omega_max * d.tq / kTwoPi);
  if (static_cast<double>(cfg.steps_per_tq) < needed) {
    std::ostringstream os;
    os << "steps_per_tq = " << cfg.steps_per_tq
       << " is below the resolution guard of " << needed
       << " for omega_max = " << omega_max << " rad/us";
    if (strict) throw StepSizeError(os.str());
    plan.warnings.push_back(os.str());
  }

  // Fixed-step RK4 loses norm at ~(E dt)^6 / 72 per step. Raise the step
  // count when the configured one would let the total drift pass ~1e-9 for
  // the fastest lane.
  int total_mult = 0;
  for (const Segment& s : p.segments()) total_mult += s.mult;
  std::size_t n_min_total = 0;
  if (cfg.auto_refine_steps) {
    double et = plan.e_max * p.duration();
    n_min_total =
        static_cast<std::size_t>(std::ceil(26.9 * std::pow(et, 1.2)));
  }

  std::size_t base_steps = static_cast<std::size_t>(cfg.steps_per_tq);
  std::size_t bumped_total = 0;
  for (const Segment& s : p.segments()) {
    SegmentPlan sp;
    sp.t0 = s.t0;
    sp.duration = s.t1 - s.t0;
    sp.rate = s.rate;
    sp.samples = static_cast<std::size_t>(cfg.samples_per_tq) * s.mult;
    std::size_t steps = base_steps * s.mult;
    if (n_min_total > 0) {
      std::size_t want = (n_min_total * s.mult + total_mult - 1) / total_mult;
      steps = std::max(steps, want);
    }
    sp.stride = (steps + sp.samples - 1) / sp.samples;
    sp.steps = sp.stride * sp.samples;
    sp.dt = sp.duration / static_cast<double>(sp.steps);
    if (sp.steps > base_steps * static_cast<std::size_t>(s.mult)) {
      bumped_total += sp.steps;
    }
    plan.seg_begin.push_back(plan.total_points);
    plan.total_points += sp.samples + 1;
    plan.steps_total += sp.steps;
    plan.segs.push_back(sp);
  }
  if (bumped_total > 0) {
    std::ostringstream os;
    os << "step count raised to " << plan.steps_total
       << " total to hold the norm-drift target at E_max = " << plan.e_max
       << " rad/us";
    plan.warnings.push_back(os.str());
  }

  plan.t.resize(plan.total_points);
  plan.theta_timeline.resize(plan.total_points);
  plan.theta_local.resize(plan.total_points);
  double nu = p.nu();
  std::size_t k = 0;
  for (const SegmentPlan& sp : plan.segs) {
    for (std::size_t i = 0; i <= sp.samples; ++i) {
      double tau = static_cast<double>(i * sp.stride) * sp.dt;
      plan.t[k] = sp.t0 + tau;
      plan.theta_local[k] = sp.rate * tau;
      plan.theta_timeline[k] = nu * plan.t[k];
      ++k;
    }
  }
  return plan;
}

struct StageCoefs {
  kernels::StepContext ctx;
};

// Drive coefficients for the RK4 stages of step s inside one segment.
StageCoefs stage_drive(const Protocol& p, const SegmentPlan& sp,
                       std::size_t s) {
  const DriveParams& d = p.params();
  const double cphi = std::cos(d.phi);
  const double sphi = std::sin(d.phi);
  const bool berry = p.coupling() == CouplingLaw::BerryWeighted;
  auto at = [&](double tau) {
    double theta = sp.rate * tau;
    double om = d.omega1 * std::sin(theta);
    kernels::StageDrive sd;
    sd.p = 0.5 * (d.delta1 * std::cos(theta) + d.delta2);
    sd.q = 0.5 * om * cphi;
    sd.gy = 0.5 * om * sphi;
    sd.g = berry ? 0.5 * om : 0.0;
    return sd;
  };
  double tau = static_cast<double>(s) * sp.dt;
  StageCoefs c;
  c.ctx.s0 = at(tau);
  c.ctx.s1 = at(tau + 0.5 * sp.dt);
  c.ctx.s2 = at(tau + sp.dt);
  c.ctx.dt = sp.dt;
  return c;
}

struct PhaseTracker {
  double gamma = 0;
  double dyn = 0;
  int branch = +1;
  int flips = 0;
  double min_overlap = 1;
  bool degenerate = false;
  bool started = false;
  double prev_arg = 0;
  // Simpson pairing state for the dynamic-phase integral.
  double e_prev = 0, e_prev2 = 0;
  int par = 0;
  int sign_prev = +1, sign_prev2 = +1;
  // Previous-sample amplitudes, for re-referencing across branch changes.
  double par_amp[4] = {1, 0, 0, 0};
};

struct OverlapEval {
  double o_plus_re, o_plus_im, o_minus_re, o_minus_im;
  double p_plus, p_minus;
  double e_plus;
  bool ok;
};

OverlapEval eval_overlaps(double delta, double omega, double x, double ar,
                          double ai, double br, double bi) {
  OverlapEval ev{};
  double planar = std::abs(omega) * std::sqrt(1.0 + x * x);
  double norm = std::hypot(delta, planar);
  if (norm < 1e-12) {
    ev.ok = false;
    return ev;
  }
  double theta = std::atan2(planar, delta);
  double xi = (omega == 0.0) ? std::atan(x) : std::atan2(omega * x, omega);
  double c = std::cos(0.5 * theta);
  double s = std::sin(0.5 * theta);
  double cx = std::cos(xi), sx = std::sin(xi);
  // <chi|c> with chi components conjugated.
  ev.o_plus_re = c * ar + s * (cx * br + sx * bi);
  ev.o_plus_im = c * ai + s * (cx * bi - sx * br);
  ev.o_minus_re = s * ar - c * (cx * br + sx * bi);
  ev.o_minus_im = s * ai - c * (cx * bi - sx * br);
  ev.p_plus = ev.o_plus_re * ev.o_plus_re + ev.o_plus_im * ev.o_plus_im;
  ev.p_minus = ev.o_minus_re * ev.o_minus_re + ev.o_minus_im * ev.o_minus_im;
  ev.e_plus = 0.5 * norm;
  ev.ok = true;
  return ev;
}

void update_tracker(PhaseTracker& tr, const Protocol& p,
                    const SegmentPlan& sp, std::size_t sample_in_seg,
                    double dt_sample, double x, double ar, double ai,
                    double br, double bi) {
  double tau = static_cast<double>(sample_in_seg * sp.stride) * sp.dt;
  double theta = sp.rate * tau;
  const DriveParams& d = p.params();
  double delta = d.delta1 * std::cos(theta) + d.delta2;
  double omega = d.omega1 * std::sin(theta);
  OverlapEval ev = eval_overlaps(delta, omega, x, ar, ai, br, bi);
  if (!ev.ok) {
    tr.degenerate = true;
    // Freeze the integrand pairing and carry the previous branch; the next
    // sample re-anchors the phase by principal increment.
    return;
  }
  double norm2 = ev.p_plus + ev.p_minus;
  int branch = tr.branch;
  if (std::abs(ev.p_plus - ev.p_minus) > 1e-12 * norm2) {
    branch = ev.p_plus >= ev.p_minus ? +1 : -1;
  }
  double o_re = branch > 0 ? ev.o_plus_re : ev.o_minus_re;
  double o_im = branch > 0 ? ev.o_plus_im : ev.o_minus_im;
  double arg_now = std::atan2(o_im, o_re);
  double overlap = (branch > 0 ? ev.p_plus : ev.p_minus) / norm2;

  if (!tr.started) {
    tr.started = true;
    tr.branch = branch;
    tr.gamma = 0.0;  // measured relative to the initial overlap phase
    tr.prev_arg = arg_now;
    tr.min_overlap = overlap;
    tr.e_prev2 = 0.0;
    tr.e_prev = static_cast<double>(branch) * ev.e_plus;
    tr.par = 0;
    tr.sign_prev = branch;
    tr.sign_prev2 = branch;
    tr.par_amp[0] = ar;
    tr.par_amp[1] = ai;
    tr.par_amp[2] = br;
    tr.par_amp[3] = bi;
    return;
  }

  double ref_arg = tr.prev_arg;
  if (branch != tr.branch) {
    // Re-reference the previous sample against the new branch so only the
    // evolution between samples enters the unwrapped total.
    double tau_prev = tau - static_cast<double>(sp.stride) * sp.dt;
    bool boundary = sample_in_seg == 0;
    double theta_prev = boundary ? 0.0 : sp.rate * tau_prev;
    // At a leg boundary the previous sample belongs to the previous leg at
    // the same absolute time; its drive differs only through theta_local,
    // and both legs meet at omega = 0. Using this leg's theta = 0 drive is
    // then exact. (Mid-leg flips use this leg's previous theta.)
    double delta_prev = d.delta1 * std::cos(theta_prev) + d.delta2;
    double omega_prev = d.omega1 * std::sin(theta_prev);
    OverlapEval pv =
        eval_overlaps(delta_prev, omega_prev, x, tr.par_amp[0], tr.par_amp[1],
                      tr.par_amp[2], tr.par_amp[3]);
    if (pv.ok) {
      ref_arg = branch > 0 ? std::atan2(pv.o_plus_im, pv.o_plus_re)
                           : std::atan2(pv.o_minus_im, pv.o_minus_re);
    }
    tr.flips += 1;
    tr.branch = branch;
  }
  tr.gamma += num::principal(arg_now - ref_arg);
  tr.prev_arg = arg_now;
  tr.min_overlap = std::min(tr.min_overlap, overlap);

  // Signed dynamic integrand, Simpson by interval pairs (trapezoid across
  // a pair that straddles a branch flip). A leg's first sample duplicates
  // the previous boundary in time, so it only re-anchors the pairing.
  double e_now = static_cast<double>(branch) * ev.e_plus;
  if (sample_in_seg == 0) {
    tr.par = 0;
    tr.e_prev2 = 0.0;
    tr.e_prev = e_now;
    tr.sign_prev2 = branch;
    tr.sign_prev = branch;
  } else {
    tr.par += 1;
    if (tr.par == 2) {
      bool flipped = tr.sign_prev != branch || tr.sign_prev2 != tr.sign_prev;
      if (flipped) {
        tr.dyn -= dt_sample * (0.5 * (tr.e_prev2 + tr.e_prev) +
                               0.5 * (tr.e_prev + e_now));
      } else {
        tr.dyn -= dt_sample / 3.0 * (tr.e_prev2 + 4.0 * tr.e_prev + e_now);
      }
      tr.par = 0;
    }
    tr.e_prev2 = tr.e_prev;
    tr.e_prev = e_now;
    tr.sign_prev2 = tr.sign_prev;
    tr.sign_prev = branch;
  }
  tr.par_amp[0] = ar;
  tr.par_amp[1] = ai;
  tr.par_amp[2] = br;
  tr.par_amp[3] = bi;
}

}  // namespace

std::vector<double> sigma_y_series(const Trajectory& traj) { return traj.sy; }

Trajectory evolve(double x, const Protocol& protocol,
                  const IntegratorConfig& cfg, QubitAmplitudes initial) {
  Plan plan = plan_segments(protocol, cfg, std::abs(x), cfg.strict);
  kernels::Backend backend = kernels::resolve_backend(cfg.backend);
  kernels::StepFn step = kernels::step_fn(backend);

  Trajectory traj;
  traj.x = x;
  traj.t = plan.t;
  traj.theta_timeline = plan.theta_timeline;
  traj.theta_local = plan.theta_local;
  traj.seg_begin = plan.seg_begin;
  traj.ce.reserve(plan.total_points);
  traj.cg.reserve(plan.total_points);
  traj.sx.reserve(plan.total_points);
  traj.sy.reserve(plan.total_points);
  traj.sz.reserve(plan.total_points);
  traj.branch.reserve(plan.total_points);
  traj.overlap_sq.reserve(plan.total_points);

  double ar = initial.ce.real(), ai = initial.ce.imag();
  double br = initial.cg.real(), bi = initial.cg.imag();
  double xbuf[1] = {x};
  int branch_prev = +1;
  double overlap_prev = 1.0;
  const DriveParams& d = protocol.params();

  auto record = [&](const SegmentPlan& sp, std::size_t sample_in_seg) {
    double tau = static_cast<double>(sample_in_seg * sp.stride) * sp.dt;
    double theta = sp.rate * tau;
    traj.ce.emplace_back(ar, ai);
    traj.cg.emplace_back(br, bi);
    double sx = 2.0 * (ar * br + ai * bi);
    double sy = 2.0 * (ar * bi - ai * br);
    double norm2 = ar * ar + ai * ai + br * br + bi * bi;
    traj.sx.push_back(sx);
    traj.sy.push_back(sy);
    traj.sz.push_back((ar * ar + ai * ai) - (br * br + bi * bi));
    traj.max_norm_drift =
        std::max(traj.max_norm_drift, std::abs(norm2 - 1.0));
    double delta = d.delta1 * std::cos(theta) + d.delta2;
    double omega = d.omega1 * std::sin(theta);
    OverlapEval ev = eval_overlaps(delta, omega, x, ar, ai, br, bi);
    if (ev.ok) {
      if (std::abs(ev.p_plus - ev.p_minus) > 1e-12 * norm2) {
        branch_prev = ev.p_plus >= ev.p_minus ? +1 : -1;
      }
      overlap_prev =
          (branch_prev > 0 ? ev.p_plus : ev.p_minus) / (ev.p_plus + ev.p_minus);
    }
    traj.branch.push_back(branch_prev);
    traj.overlap_sq.push_back(overlap_prev);
  };

  for (const SegmentPlan& sp : plan.segs) {
    record(sp, 0);
    std::size_t sample_in_seg = 1;
    for (std::size_t s = 0; s < sp.steps; ++s) {
      StageCoefs c = stage_drive(protocol, sp, s);
      step(c.ctx, xbuf, 1, &ar, &ai, &br, &bi);
      if ((s + 1) % sp.stride == 0) {
        record(sp, sample_in_seg);
        ++sample_in_seg;
      }
    }
  }

  return traj;
}

GridEvolveResult evolve_grid(const Protocol& protocol,
                             const GridEvolveRequest& req,
                             const IntegratorConfig& cfg) {
  const std::size_t n = req.x.size();
  if (n == 0) throw ConfigError("evolve_grid: empty lane set");
  if (!req.weight.empty() && req.weight.size() != n) {
    throw ConfigError("evolve_grid: weight size does not match lane count");
  }

  double x_absmax = 0.0;
  for (double v : req.x) x_absmax = std::max(x_absmax, std::abs(v));
  Plan plan = plan_segments(protocol, cfg, x_absmax, cfg.strict);
  kernels::Backend backend = kernels::resolve_backend(cfg.backend);
  kernels::StepFn step = kernels::step_fn(backend);

  // Mirror economy is valid when the lane set is the standard symmetric
  // grid x_j = (j - n/2) h (x_{n-j} built as the exact negation of x_j)
  // with symmetric weights.
  bool mirror = req.mirror_economy && !req.track_phases && n % 2 == 0;
  if (mirror) {
    for (std::size_t j = 1; j < n && mirror; ++j) {
      if (req.x[n - j] != -req.x[j]) mirror = false;
      if (!req.weight.empty() && req.weight[n - j] != req.weight[j]) {
        mirror = false;
      }
    }
    if (mirror && req.x[n / 2] != 0.0) mirror = false;
  }

  // Lanes actually integrated: everything, or the x >= 0 half plus the
  // unpaired -L endpoint.
  std::vector<std::size_t> lanes;
  if (mirror) {
    lanes.reserve(n / 2 + 2);
    lanes.push_back(0);
    for (std::size_t j = n / 2; j < n; ++j) lanes.push_back(j);
  } else {
    lanes.resize(n);
    for (std::size_t j = 0; j < n; ++j) lanes[j] = j;
  }

  const bool aggregate = !req.weight.empty();
  // Per-lane coefficients folding the mirror image into the aggregated
  // sigma_y: sigma_y(-x) = -sin(2 xi) sigma_x(x) + cos(2 xi) sigma_y(x).
  std::vector<double> coef_sy, coef_sx;
  if (aggregate) {
    coef_sy.assign(lanes.size(), 0.0);
    coef_sx.assign(lanes.size(), 0.0);
    for (std::size_t li = 0; li < lanes.size(); ++li) {
      std::size_t j = lanes[li];
      double w = req.weight[j];
      double xv = req.x[j];
      if (!mirror || j == 0 || j == n / 2) {
        coef_sy[li] = w;
      } else {
        double r = 1.0 + xv * xv;
        double cos2xi = (1.0 - xv * xv) / r;
        double sin2xi = 2.0 * xv / r;
        coef_sy[li] = w * (1.0 + cos2xi);
        coef_sx[li] = -w * sin2xi;
      }
    }
  }

  GridEvolveResult res;
  res.t = plan.t;
  res.theta_timeline = plan.theta_timeline;
  res.seg_begin = plan.seg_begin;
  res.steps_total = plan.steps_total * lanes.size();
  res.mirror_used = mirror;
  res.warnings = plan.warnings;
  res.ce_final.resize(n);
  res.cg_final.resize(n);
  if (aggregate) res.sigma_y_weighted.assign(plan.total_points, 0.0);
  if (req.track_phases) res.phases.resize(n);

  const std::size_t block_size = 128;
  const std::size_t n_blocks = (lanes.size() + block_size - 1) / block_size;
  std::vector<std::vector<double>> block_agg(aggregate ? n_blocks : 0);
  std::vector<double> block_drift(n_blocks, 0.0);

  std::atomic<std::size_t> next_block{0};
  std::vector<std::exception_ptr> errors(n_blocks);

  auto run_block = [&](std::size_t b) {
    const std::size_t lo = b * block_size;
    const std::size_t hi = std::min(lo + block_size, lanes.size());
    const std::size_t m = hi - lo;
    std::vector<double> xs(m), ar(m, 1.0), ai(m, 0.0), br(m, 0.0), bi(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) xs[i] = req.x[lanes[lo + i]];
    std::vector<double>* agg = nullptr;
    if (aggregate) {
      block_agg[b].assign(plan.total_points, 0.0);
      agg = &block_agg[b];
    }
    std::vector<PhaseTracker> trackers;
    if (req.track_phases) trackers.resize(m);
    double drift = 0.0;

    std::size_t sample_idx = 0;
    for (std::size_t si = 0; si < plan.segs.size(); ++si) {
      const SegmentPlan& sp = plan.segs[si];
      double dt_sample = static_cast<double>(sp.stride) * sp.dt;
      auto record = [&](std::size_t sample_in_seg) {
        for (std::size_t i = 0; i < m; ++i) {
          double a_r = ar[i], a_i = ai[i], b_r = br[i], b_i = bi[i];
          double norm2 = a_r * a_r + a_i * a_i + b_r * b_r + b_i * b_i;
          drift = std::max(drift, std::abs(norm2 - 1.0));
          if (agg) {
            double sy = 2.0 * (a_r * b_i - a_i * b_r);
            double acc = coef_sy[lo + i] * sy;
            if (coef_sx[lo + i] != 0.0) {
              double sx = 2.0 * (a_r * b_r + a_i * b_i);
              acc += coef_sx[lo + i] * sx;
            }
            (*agg)[sample_idx] += acc;
          }
          if (req.track_phases) {
            update_tracker(trackers[i], protocol, sp, sample_in_seg,
                           dt_sample, xs[i], a_r, a_i, b_r, b_i);
          }
        }
        ++sample_idx;
      };

      record(0);
      std::size_t sample_in_seg = 1;
      for (std::size_t s = 0; s < sp.steps; ++s) {
        StageCoefs c = stage_drive(protocol, sp, s);
        step(c.ctx, xs.data(), m, ar.data(), ai.data(), br.data(), bi.data());
        if ((s + 1) % sp.stride == 0) {
          record(sample_in_seg);
          ++sample_in_seg;
        }
      }
    }

    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = lanes[lo + i];
      res.ce_final[j] = {ar[i], ai[i]};
      res.cg_final[j] = {br[i], bi[i]};
      if (req.track_phases) {
        const PhaseTracker& tr = trackers[i];
        LanePhase& ph = res.phases[j];
        ph.gamma_total = tr.gamma;
        ph.gamma_dyn = tr.dyn;
        ph.branch_final = tr.branch;
        ph.flips = tr.flips;
        ph.min_overlap_sq = tr.min_overlap;
        ph.degenerate_hit = tr.degenerate;
      }
    }
    block_drift[b] = drift;
  };

  auto worker = [&]() {
    for (;;) {
      std::size_t b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        run_block(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  int workers = std::max(1, req.workers);
  workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), n_blocks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  // Deterministic reduction: block partials summed in block order.
  if (aggregate) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::vector<double>& part = block_agg[b];
      for (std::size_t k = 0; k < plan.total_points; ++k) {
        res.sigma_y_weighted[k] += part[k];
      }
    }
  }
  for (double d : block_drift) res.max_norm_drift = std::max(res.max_norm_drift, d);

  if (mirror) {
    // Reconstruct the x < 0 half: ce even, cg picks up e^{-2i xi}.
    for (std::size_t j = n / 2 + 1; j < n; ++j) {
      std::size_t jm = n - j;
      double xv = req.x[j];
      double r = 1.0 + xv * xv;
      std::complex<double> rot((1.0 - xv * xv) / r, -2.0 * xv / r);
      res.ce_final[jm] = res.ce_final[j];
      res.cg_final[jm] = rot * res.cg_final[j];
    }
  }

  return res;
}

}  // namespace qmeter
