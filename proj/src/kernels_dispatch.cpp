#include "qmeter/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_detail.hpp"

namespace qmeter::kernels {

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Auto:
      return "auto";
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "auto") return Backend::Auto;
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  return std::nullopt;
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Auto:
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(QMETER_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::Neon:
#if defined(QMETER_HAVE_NEON)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

namespace {

Backend best_supported() {
#if defined(QMETER_HAVE_AVX2)
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
#endif
#if defined(QMETER_HAVE_NEON)
  if (backend_supported(Backend::Neon)) return Backend::Neon;
#endif
  return Backend::Scalar;
}

}  // namespace

Backend resolve_backend(Backend requested) {
  if (requested == Backend::Auto) {
    if (const char* env = std::getenv("QMETER_KERNEL")) {
      auto parsed = parse_backend(env);
      if (!parsed) {
        throw std::runtime_error(std::string("QMETER_KERNEL: unknown value '") +
                                 env + "' (use auto/scalar/avx2/neon)");
      }
      if (*parsed != Backend::Auto) {
        if (!backend_supported(*parsed)) {
          throw std::runtime_error(
              std::string("QMETER_KERNEL requests unsupported backend '") +
              env + "'");
        }
        return *parsed;
      }
    }
    return best_supported();
  }
  if (!backend_supported(requested)) {
    throw std::runtime_error(std::string("kernel backend '") +
                             backend_name(requested) +
                             "' is not supported on this machine");
  }
  return requested;
}

StepFn step_fn(Backend resolved) {
  switch (resolved) {
    case Backend::Scalar:
      return &detail::rk4_step_scalar;
#if defined(QMETER_HAVE_AVX2)
    case Backend::Avx2:
      return &detail::rk4_step_avx2;
#endif
#if defined(QMETER_HAVE_NEON)
    case Backend::Neon:
      return &detail::rk4_step_neon;
#endif
    default:
      break;
  }
  throw std::runtime_error(std::string("no step function for backend '") +
                           backend_name(resolved) + "'");
}

}  // namespace qmeter::kernels
