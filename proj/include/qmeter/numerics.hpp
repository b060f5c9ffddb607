#pragma once

#include <cstdint>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

namespace qmeter::num {

// Composite Simpson rule on n uniformly spaced samples. An odd interval
// count is closed with a Simpson-3/8 tail so the order stays (h^4); n == 2
// falls back to the trapezoid.
double simpson(const double* y, std::size_t n, double h);
double simpson(const std::vector<double>& y, double h);

// Running integral I[k] = int_0^{t_k} y dt on a uniform grid. Even indices
// carry composite-Simpson accuracy; odd indices append one trapezoid panel.
std::vector<double> cumulative_integral(const std::vector<double>& y, double h);

// Recursive adaptive Simpson with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

// Scaled complementary error function exp(z^2) erfc(z) for z >= 0. Stable
// for large z where the naive product overflows.
double erfcx(double z);

// Principal-value phase increment in (-pi, pi].
double principal(double delta);

// FNV-1a over raw bytes; used for run provenance hashes.
std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t seed = 14695981039346656037ull);
std::uint64_t fnv1a(std::string_view s,
                    std::uint64_t seed = 14695981039346656037ull);

}  // namespace qmeter::num
