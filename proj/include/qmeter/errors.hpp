#pragma once

#include <stdexcept>
#include <string>

namespace qmeter {

// Configuration / input validation problems (bad units, unknown keys, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Position-grid construction problems (too narrow, wrong size, ...).
struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested adiabatic decomposition at a spectral degeneracy.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Step-resolution warning promoted to an error under strict mode.
struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Momentum density leaking into the edge of the conjugate grid.
struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Series handed to a quadrature that expects uniform sampling.
struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qmeter
