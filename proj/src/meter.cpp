#include "qmeter/meter.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "qmeter/errors.hpp"
#include "qmeter/units.hpp"

namespace qmeter {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// One cached forward plan per grid size, executed on its own aligned
// buffers under a lock. Plans live for the whole process.
struct PlanSlot {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
};

std::mutex g_fft_mutex;

PlanSlot& plan_for(std::size_t n) {
  static std::map<std::size_t, PlanSlot> cache;
  PlanSlot& slot = cache[n];
  if (!slot.plan) {
    slot.in = fftw_alloc_complex(n);
    slot.out = fftw_alloc_complex(n);
    slot.plan = fftw_plan_dft_1d(static_cast<int>(n), slot.in, slot.out,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
  }
  return slot;
}

// Centered forward transform: out_k = (h / sqrt(2 pi)) (-1)^k
// sum_j (-1)^j in_j e^{-2 pi i j k / n}, so both grids are symmetric about
// zero. Requires n divisible by 4 (power of two >= 256 always is), which
// makes the (-1)^{j+k} checkerboard an exact shift of both origins.
void centered_dft(const std::vector<std::complex<double>>& in, double h,
                  std::vector<std::complex<double>>& out) {
  const std::size_t n = in.size();
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanSlot& slot = plan_for(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sign = (j & 1) ? -1.0 : 1.0;
    slot.in[j][0] = sign * in[j].real();
    slot.in[j][1] = sign * in[j].imag();
  }
  fftw_execute(slot.plan);
  out.resize(n);
  const double scale = h / std::sqrt(kTwoPi);
  for (std::size_t k = 0; k < n; ++k) {
    double sign = (k & 1) ? -scale : scale;
    out[k] = {sign * slot.out[k][0], sign * slot.out[k][1]};
  }
}

}  // namespace

std::size_t default_grid_n(double dx_param) {
  if (dx_param <= 0.02) return 16384;
  if (dx_param <= 0.12) return 4096;
  if (dx_param <= 1.2) return 1024;
  if (dx_param <= 2.2) return 2048;
  return 4096;
}

double default_half_width(double dx_param) {
  return std::max(8.0 * dx_param, 6.0);
}

MeterGrid make_grid(double dx_param, std::size_t n, double half_width) {
  if (!(dx_param > 0) || !std::isfinite(dx_param)) {
    throw GridError("grid dx parameter must be positive and finite");
  }
  if (n == 0) n = default_grid_n(dx_param);
  if (n < 256 || !is_pow2(n)) {
    std::ostringstream os;
    os << "grid size " << n << " is not a power of two >= 256";
    throw GridError(os.str());
  }
  double half = half_width > 0 ? half_width : default_half_width(dx_param);
  if (!std::isfinite(half) || half <= 0) {
    throw GridError("grid half width must be positive and finite");
  }

  MeterGrid g;
  g.dx_param = dx_param;
  g.half_width = half;
  g.n = n;
  g.h = 2.0 * half / static_cast<double>(n);
  g.x.resize(n);
  g.phi.resize(n);
  const double inv4 = 1.0 / (4.0 * dx_param * dx_param);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double xj = (static_cast<double>(j) - 0.5 * static_cast<double>(n)) * g.h;
    g.x[j] = xj;
    double v = std::exp(-xj * xj * inv4);
    g.phi[j] = v;
    sum += v * v;
  }
  double norm = g.h * sum;
  double inv_sqrt = 1.0 / std::sqrt(norm);
  for (double& v : g.phi) v *= inv_sqrt;

  // The wavepacket must fit: leaked edge density spread over the box has
  // to stay below 1e-12.
  double edge = g.phi[0] * g.phi[0] * 2.0 * half;
  if (edge > 1e-12) {
    std::ostringstream os;
    os << "half width " << half << " clips the Gaussian for dx = " << dx_param
       << " (edge leakage " << edge << ")";
    throw GridError(os.str());
  }
  return g;
}

JointState assemble(const MeterGrid& grid,
                    const std::vector<std::complex<double>>& ce,
                    const std::vector<std::complex<double>>& cg,
                    double time) {
  if (ce.size() != grid.n || cg.size() != grid.n) {
    throw GridError("assemble: amplitude lanes do not match the grid size");
  }
  JointState js;
  js.grid = grid;
  js.time = time;
  js.amp_e.resize(grid.n);
  js.amp_g.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    js.amp_e[j] = grid.phi[j] * ce[j];
    js.amp_g[j] = grid.phi[j] * cg[j];
  }
  return js;
}

MomentumDistribution momentum_transform(const JointState& js) {
  const std::size_t n = js.grid.n;
  std::vector<std::complex<double>> fe, fg;
  centered_dft(js.amp_e, js.grid.h, fe);
  centered_dft(js.amp_g, js.grid.h, fg);

  MomentumDistribution md;
  md.dp = kPi / js.grid.half_width;
  md.p.resize(n);
  md.density_e.resize(n);
  md.density_g.resize(n);
  double mass = 0.0, edge_mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double pk = (static_cast<double>(k) - 0.5 * static_cast<double>(n)) * md.dp;
    md.p[k] = pk;
    double de = std::norm(fe[k]);
    double dg = std::norm(fg[k]);
    md.density_e[k] = de;
    md.density_g[k] = dg;
    double dt = de + dg;
    mass += dt;
    if (k < 2 || k >= n - 2) edge_mass += dt;
    m1 += pk * dt;
    m2 += pk * pk * dt;
  }
  if (mass <= 0) throw AliasingError("momentum density has no mass");
  if (edge_mass / mass > 1e-8) {
    std::ostringstream os;
    os << "momentum density touches the grid edge (relative edge mass "
       << edge_mass / mass << "); the box is too wide or dx too small";
    throw AliasingError(os.str());
  }
  md.mean_p = m1 / mass;
  double var = m2 / mass - md.mean_p * md.mean_p;
  md.std_p = var > 0 ? std::sqrt(var) : 0.0;
  return md;
}

double mean_p_derivative(const JointState& js) {
  const std::size_t n = js.grid.n;
  const double h = js.grid.h;
  auto accumulate = [&](const std::vector<std::complex<double>>& f,
                        double& num) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::complex<double>& fm2 = f[(j + n - 2) % n];
      const std::complex<double>& fm1 = f[(j + n - 1) % n];
      const std::complex<double>& fp1 = f[(j + 1) % n];
      const std::complex<double>& fp2 = f[(j + 2) % n];
      std::complex<double> d =
          (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
      // <p> = Im int psi* dpsi/dx dx
      num += std::imag(std::conj(f[j]) * d);
    }
  };
  double num = 0.0, den = 0.0;
  accumulate(js.amp_e, num);
  accumulate(js.amp_g, num);
  for (std::size_t j = 0; j < n; ++j) {
    den += std::norm(js.amp_e[j]) + std::norm(js.amp_g[j]);
  }
  if (den <= 0) throw GridError("mean_p_derivative: state has no mass");
  return num / den;
}

double position_density_error(const JointState& js) {
  double worst = 0.0;
  for (std::size_t j = 0; j < js.grid.n; ++j) {
    double rho = std::norm(js.amp_e[j]) + std::norm(js.amp_g[j]);
    double ref = js.grid.phi[j] * js.grid.phi[j];
    worst = std::max(worst, std::abs(rho - ref));
  }
  return worst;
}

double parseval_error(const JointState& js, const MomentumDistribution& md) {
  double pos = 0.0, mom = 0.0;
  for (std::size_t j = 0; j < js.grid.n; ++j) {
    pos += std::norm(js.amp_e[j]) + std::norm(js.amp_g[j]);
  }
  for (std::size_t k = 0; k < md.density_e.size(); ++k) {
    mom += md.density_e[k] + md.density_g[k];
  }
  return std::abs(js.grid.h * pos - md.dp * mom);
}

}  // namespace qmeter
