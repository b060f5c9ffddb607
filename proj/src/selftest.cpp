#include "qmeter/selftest.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "qmeter/analysis.hpp"
#include "qmeter/kernels.hpp"
#include "qmeter/meter.hpp"
#include "qmeter/model.hpp"
#include "qmeter/propagator.hpp"
#include "qmeter/units.hpp"

namespace qmeter {

namespace {

DriveParams base_params() {
  DriveParams d;
  d.delta1 = mhz_to_rad_us(30.0);
  d.delta2 = mhz_to_rad_us(0.3);
  d.omega1 = mhz_to_rad_us(10.0);
  d.tq = 1.0;
  return d;
}

struct Reporter {
  std::ostream& os;
  int failures = 0;
  void check(bool ok, const char* name, const std::string& detail) {
    os << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) os << ": " << detail;
    os << '\n';
    if (!ok) ++failures;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

int run_selftest(std::ostream& os) {
  Reporter rep{os};

  // Drive endpoints of the sawtooth sweep.
  {
    Protocol p = Protocol::single(base_params());
    DriveSample d0 = p.drive_at(0.0);
    DriveSample dm = p.drive_at(0.5 * p.params().tq);
    double e0 = std::abs(d0.delta - (p.params().delta1 + p.params().delta2)) +
                std::abs(d0.omega);
    double em = std::abs(dm.delta - p.params().delta2) +
                std::abs(dm.omega - p.params().omega1);
    rep.check(e0 < 1e-9 && em < 1e-9, "drive endpoints",
              "theta=0 and theta=pi/2 residual " + num(std::max(e0, em)));
  }

  // Eigenvector consistency: H chi = E chi for the coupled lane matrix.
  {
    double delta = 1.3, omega = 0.7, x = 0.4;
    AdiabaticFrame fr = adiabatic_eigensystem(delta, omega, x);
    AdiabaticStates st = adiabatic_states(delta, omega, x);
    auto H = hamiltonian_matrix(delta, omega, 0.0, 0.5 * omega, x);
    auto resid = [&](std::complex<double> a, std::complex<double> b,
                     double e) {
      std::complex<double> r1 = H[0] * a + H[1] * b - e * a;
      std::complex<double> r2 = H[2] * a + H[3] * b - e * b;
      return std::abs(r1) + std::abs(r2);
    };
    double r = resid(st.plus_e, st.plus_g, fr.e_plus) +
               resid(st.minus_e, st.minus_g, fr.e_minus);
    rep.check(r < 1e-12, "adiabatic eigensystem", "residual " + num(r));
  }

  // Closed form of the cycle-averaged quasienergy when delta1 = omega1.
  {
    DriveParams d = base_params();
    d.delta1 = mhz_to_rad_us(10.0);
    d.omega1 = mhz_to_rad_us(10.0);
    d.delta2 = 0.0;
    double f = dynamic_phase_coefficient(Protocol::single(d));
    double want = d.delta1 / 8.0;
    double rel = std::abs(f - want) / want;
    rep.check(rel < 1e-10, "quasienergy average", "rel err " + num(rel));
  }

  // Meter suppression factor: closed form against quadrature.
  {
    double a = beta_closed_form(0.7);
    double b = beta_quadrature(0.7);
    rep.check(std::abs(a - b) < 1e-8, "beta cross-check",
              "difference " + num(std::abs(a - b)));
  }

  // Momentum readout on a boosted Gaussian: mean, Parseval, dual route.
  {
    MeterGrid g = make_grid(1.0, 1024);
    std::vector<std::complex<double>> ce(g.n), cg(g.n, {0.0, 0.0});
    for (std::size_t j = 0; j < g.n; ++j) {
      ce[j] = std::polar(1.0, 0.7 * g.x[j]);
    }
    JointState js = assemble(g, ce, cg, 0.0);
    MomentumDistribution md = momentum_transform(js);
    double e_mean = std::abs(md.mean_p - 0.7);
    double e_par = parseval_error(js, md);
    double e_dual = std::abs(md.mean_p - mean_p_derivative(js));
    rep.check(e_mean < 1e-8 && e_par < 1e-10 && e_dual < 1e-6,
              "momentum readout",
              "mean " + num(e_mean) + ", parseval " + num(e_par) +
                  ", dual " + num(e_dual));
  }

  // Vector kernel agrees bit for bit with the scalar reference.
  {
    kernels::Backend best = kernels::resolve_backend(kernels::Backend::Auto);
    if (best == kernels::Backend::Scalar) {
      rep.check(true, "kernel equivalence", "scalar only on this host");
    } else {
      std::mt19937_64 rng(12345);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const std::size_t n = 37;
      std::vector<double> x(n);
      std::vector<double> a1(n), b1(n), c1(n), d1(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = 3.0 * u(rng);
        a1[i] = u(rng);
        b1[i] = u(rng);
        c1[i] = u(rng);
        d1[i] = u(rng);
      }
      auto a2 = a1, b2 = b1, c2 = c1, d2 = d1;
      kernels::StepFn ref = kernels::step_fn(kernels::Backend::Scalar);
      kernels::StepFn vec = kernels::step_fn(best);
      kernels::StepContext ctx;
      ctx.dt = 5e-4;
      for (int s = 0; s < 200; ++s) {
        ctx.s0 = {u(rng), u(rng), u(rng), u(rng)};
        ctx.s1 = {u(rng), u(rng), u(rng), u(rng)};
        ctx.s2 = {u(rng), u(rng), u(rng), u(rng)};
        ref(ctx, x.data(), n, a1.data(), b1.data(), c1.data(), d1.data());
        vec(ctx, x.data(), n, a2.data(), b2.data(), c2.data(), d2.data());
      }
      bool same = std::memcmp(a1.data(), a2.data(), n * sizeof(double)) == 0 &&
                  std::memcmp(b1.data(), b2.data(), n * sizeof(double)) == 0 &&
                  std::memcmp(c1.data(), c2.data(), n * sizeof(double)) == 0 &&
                  std::memcmp(d1.data(), d2.data(), n * sizeof(double)) == 0;
      rep.check(same, "kernel equivalence",
                std::string(kernels::backend_name(best)) +
                    " vs scalar, 200 steps");
    }
  }

  // Mirror shortcut against direct integration of the full grid.
  {
    Protocol p = Protocol::single(base_params());
    IntegratorConfig cfg;
    cfg.steps_per_tq = 4000;
    cfg.samples_per_tq = 100;
    MeterGrid g = make_grid(1.0, 256);
    GridEvolveRequest req;
    req.x = g.x;
    req.weight.assign(g.n, 1.0 / static_cast<double>(g.n));
    req.workers = 1;
    req.mirror_economy = true;
    GridEvolveResult fast = evolve_grid(p, req, cfg);
    req.mirror_economy = false;
    GridEvolveResult full = evolve_grid(p, req, cfg);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      worst = std::max(worst, std::abs(fast.ce_final[j] - full.ce_final[j]));
      worst = std::max(worst, std::abs(fast.cg_final[j] - full.cg_final[j]));
    }
    for (std::size_t k = 0; k < fast.sigma_y_weighted.size(); ++k) {
      worst = std::max(worst, std::abs(fast.sigma_y_weighted[k] -
                                       full.sigma_y_weighted[k]));
    }
    rep.check(fast.mirror_used && worst < 1e-10, "mirror shortcut",
              "max deviation " + num(worst));
  }

  // Norm drift of the default integrator on the base protocol.
  {
    Protocol p = Protocol::single(base_params());
    IntegratorConfig cfg;
    Trajectory tr = evolve(1.0, p, cfg);
    rep.check(tr.max_norm_drift < 1e-9, "norm drift",
              num(tr.max_norm_drift) + " after one quench");
  }

  // Worker count must not change a single bit of the result.
  {
    Protocol p = Protocol::single(base_params());
    IntegratorConfig cfg;
    cfg.steps_per_tq = 2000;
    cfg.samples_per_tq = 100;
    MeterGrid g = make_grid(0.5, 512);
    GridEvolveRequest req;
    req.x = g.x;
    req.weight.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      req.weight[j] = g.h * g.phi[j] * g.phi[j];
    }
    req.workers = 1;
    GridEvolveResult r1 = evolve_grid(p, req, cfg);
    req.workers = 3;
    GridEvolveResult r3 = evolve_grid(p, req, cfg);
    bool same =
        std::memcmp(r1.ce_final.data(), r3.ce_final.data(),
                    g.n * sizeof(std::complex<double>)) == 0 &&
        std::memcmp(r1.cg_final.data(), r3.cg_final.data(),
                    g.n * sizeof(std::complex<double>)) == 0 &&
        r1.sigma_y_weighted == r3.sigma_y_weighted;
    rep.check(same, "worker determinism", "1 vs 3 workers, bitwise");
  }

  os << (rep.failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
     << rep.failures << " failures)\n";
  return rep.failures;
}

}  // namespace qmeter
