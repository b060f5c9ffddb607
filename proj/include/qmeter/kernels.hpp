#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace qmeter::kernels {

// Drive coefficients for one RK4 stage, shared by every lane:
//   p  = delta/2                    (sigma_z coefficient)
//   q  = (omega/2) cos(phi)         (sigma_x coefficient)
//   gy = (omega/2) sin(phi)         (x-independent sigma_y part)
//   g  = coupling strength          (sigma_y part multiplying the lane's x)
// The per-lane sigma_y coefficient is v = gy + g * x.
struct StageDrive {
  double p = 0;
  double q = 0;
  double gy = 0;
  double g = 0;
};

// One RK4 step: stage drives at t, t + dt/2, t + dt.
struct StepContext {
  StageDrive s0, s1, s2;
  double dt = 0;
};

// Advances all n lanes by one RK4 step in place. State is SoA: real and
// imaginary parts of c_e (ar, ai) and c_g (br, bi). Every backend performs
// the identical operation sequence so results match bit for bit.
using StepFn = void (*)(const StepContext&, const double* x, std::size_t n,
                        double* ar, double* ai, double* br, double* bi);

enum class Backend { Auto, Scalar, Avx2, Neon };

const char* backend_name(Backend b);
std::optional<Backend> parse_backend(std::string_view name);
bool backend_supported(Backend b);

// Resolves Auto to the best supported backend, honoring the QMETER_KERNEL
// environment variable (auto/scalar/avx2/neon) when set. An explicit
// request for an unsupported backend throws.
Backend resolve_backend(Backend requested);

// Step function for an already-resolved (concrete) backend.
StepFn step_fn(Backend resolved);

}  // namespace qmeter::kernels
