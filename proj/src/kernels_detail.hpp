#pragma once

#include "qmeter/kernels.hpp"

// Backend entry points. Each advances n lanes by one RK4 step with the
// exact same operation order (see kernels.hpp); the wide backends hand
// their remainder lanes to the scalar routine.
namespace qmeter::kernels::detail {

void rk4_step_scalar(const StepContext& c, const double* x, std::size_t n,
                     double* ar, double* ai, double* br, double* bi);

#if defined(QMETER_HAVE_AVX2)
void rk4_step_avx2(const StepContext& c, const double* x, std::size_t n,
                   double* ar, double* ai, double* br, double* bi);
#endif

#if defined(QMETER_HAVE_NEON)
void rk4_step_neon(const StepContext& c, const double* x, std::size_t n,
                   double* ar, double* ai, double* br, double* bi);
#endif

}  // namespace qmeter::kernels::detail
