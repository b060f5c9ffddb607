#pragma once

#include "qmeter/model.hpp"
#include "qmeter/propagator.hpp"

namespace qmeter::oracles {

// Gaussian-weighted meter suppression integral, computed by fixed-panel
// Gauss-Legendre quadrature. Independent of both the closed form and the
// adaptive Simpson route in the library.
double beta_reference(double dx_param);

// Cycle average of the instantaneous gap, computed on a midpoint grid.
// Independent of the library's Simpson evaluation.
double quasienergy_reference(const DriveParams& params);

// Gaussian-weighted <sigma_y>(x) at the final time, assembled from
// individual evolve() lanes on a Simpson grid. Exercises neither
// evolve_grid's lane bookkeeping nor its mirror shortcut, so it can vouch
// for both.
double weighted_sigma_y_reference(const Protocol& protocol,
                                  const IntegratorConfig& cfg,
                                  double dx_param);

}  // namespace qmeter::oracles
