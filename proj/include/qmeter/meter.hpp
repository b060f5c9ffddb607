#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qmeter {

// Uniform symmetric position grid for the meter plus the initial Gaussian
// profile phi(x), renormalized so h * sum phi^2 = 1 on the grid. x_j =
// (j - n/2) h, so 0 is a grid point and the span is [-L, L).
struct MeterGrid {
  double dx_param = 1;   // Gaussian width parameter
  double half_width = 0; // L
  double h = 0;
  std::size_t n = 0;
  std::vector<double> x;
  std::vector<double> phi;
};

// Default sizing policy used when n or half_width are passed as 0.
std::size_t default_grid_n(double dx_param);
double default_half_width(double dx_param);  // max(8 dx, 6)

// Builds the grid; n must be a power of two >= 256. Throws GridError when
// the requested span clips the Gaussian (|phi(+-L)|^2 * 2L > 1e-12).
MeterGrid make_grid(double dx_param, std::size_t n = 0, double half_width = 0);

// Entangled qubit-meter snapshot: amp_alpha(x_j) = phi(x_j) c_alpha(x_j, t).
struct JointState {
  MeterGrid grid;
  std::vector<std::complex<double>> amp_e, amp_g;
  double time = 0;
};

// Weighs per-lane amplitudes by the Gaussian profile. The amplitude vectors
// must match the grid size (one lane per grid point, all at one time).
JointState assemble(const MeterGrid& grid,
                    const std::vector<std::complex<double>>& ce,
                    const std::vector<std::complex<double>>& cg, double time);

struct MomentumDistribution {
  std::vector<double> p;          // p_k = (k - n/2) pi / L
  std::vector<double> density_e, density_g;
  double dp = 0;
  double mean_p = 0;              // over the total (e+g) density
  double std_p = 0;
};

// Discrete version of Phi_alpha(p) = (1/sqrt(2 pi)) int psi_alpha(x)
// e^{-i p x} dx on the centered conjugate grid. Throws AliasingError when
// density mass within two cells of the p-grid edge exceeds 1e-8.
MomentumDistribution momentum_transform(const JointState& js);

// <p> via p = -i d/dx with a 4th-order central difference (periodic wrap).
// Independent cross-check of the spectral route.
double mean_p_derivative(const JointState& js);

// max_j | |amp_e|^2 + |amp_g|^2 - phi^2 |: the position density must stay
// frozen because the interaction commutes with x.
double position_density_error(const JointState& js);

// | h sum |psi|^2 - dp sum |Phi|^2 | summed over both components.
double parseval_error(const JointState& js, const MomentumDistribution& md);

}  // namespace qmeter
