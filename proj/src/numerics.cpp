#include "qmeter/numerics.hpp"

#include <cmath>
#include <stdexcept>

#include "qmeter/units.hpp"

namespace qmeter::num {

double simpson(const double* y, std::size_t n, double h) {
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  std::size_t intervals = n - 1;
  double total = 0.0;
  std::size_t m = intervals;
  // Odd interval count: close the last three intervals with Simpson 3/8.
  if (intervals % 2 != 0) {
    if (intervals == 3) {
      return 3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]);
    }
    m = intervals - 3;
    const double* t = y + m;
    total += 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]);
  }
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 <= m; i += 2) odd += y[i];
  for (std::size_t i = 2; i + 1 <= m; i += 2) even += y[i];
  total += h / 3.0 * (y[0] + 4.0 * odd + 2.0 * even + y[m]);
  return total;
}

double simpson(const std::vector<double>& y, double h) {
  return simpson(y.data(), y.size(), h);
}

std::vector<double> cumulative_integral(const std::vector<double>& y,
                                        double h) {
  std::vector<double> out(y.size(), 0.0);
  if (y.size() < 2) return out;
  // Advance two intervals at a time with a Simpson panel; odd indices get
  // the previous even value plus one trapezoid so the series stays dense.
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (k % 2 == 0) {
      out[k] = out[k - 2] + h / 3.0 * (y[k - 2] + 4.0 * y[k - 1] + y[k]);
    } else {
      out[k] = out[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
    }
  }
  // Re-anchor odd indices between their Simpson neighbours: replace the
  // trapezoid tail with the average of forward and backward panels where
  // both exist. Keeps even indices exact-Simpson and smooths the rest.
  for (std::size_t k = 1; k + 1 < y.size(); k += 2) {
    double back = out[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
    double fwd = out[k + 1] - 0.5 * h * (y[k] + y[k + 1]);
    out[k] = 0.5 * (back + fwd);
  }
  return out;
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double h = b - a;
  double left = h / 12.0 * (fa + 4.0 * flm + fm);
  double right = h / 12.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  double fa = f(a);
  double fb = f(b);
  double fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double erfcx(double z) {
  if (z < 0.0) throw std::domain_error("erfcx: negative argument");
  if (z <= 15.0) return std::exp(z * z) * std::erfc(z);
  // Asymptotic series 1/(z sqrt(pi)) sum (-1)^n (2n-1)!! / (2 z^2)^n.
  // At z > 15 eight terms reach ~1e-19 relative.
  double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 8; ++n) {
    term *= -(2.0 * n - 1.0) * inv2z2;
    sum += term;
  }
  return sum / (z * std::sqrt(kPi));
}

double principal(double delta) {
  double r = std::remainder(delta, kTwoPi);
  // std::remainder returns [-pi, pi]; fold the -pi edge onto +pi.
  if (r <= -kPi) r += kTwoPi;
  return r;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  return fnv1a(s.data(), s.size(), seed);
}

}  // namespace qmeter::num
