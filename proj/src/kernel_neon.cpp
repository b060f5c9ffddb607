#include "kernels_detail.hpp"

#if defined(QMETER_HAVE_NEON)

#include <arm_neon.h>

// 2-lane NEON replay of the scalar sequence; see kernel_scalar.cpp for the
// derivative layout. Explicit mul/add/sub keep the op order identical to
// the reference (the TU is built with -ffp-contract=off).

namespace qmeter::kernels::detail {

namespace {

struct Deriv {
  float64x2_t ar, ai, br, bi;
};

inline Deriv deriv(float64x2_t p, float64x2_t q, float64x2_t v,
                   float64x2_t ar, float64x2_t ai, float64x2_t br,
                   float64x2_t bi) {
  Deriv d;
  d.ar = vsubq_f64(vaddq_f64(vmulq_f64(p, ai), vmulq_f64(q, bi)),
                   vmulq_f64(v, br));
  d.ai = vnegq_f64(vaddq_f64(
      vaddq_f64(vmulq_f64(p, ar), vmulq_f64(q, br)), vmulq_f64(v, bi)));
  d.br = vsubq_f64(vaddq_f64(vmulq_f64(q, ai), vmulq_f64(v, ar)),
                   vmulq_f64(p, bi));
  d.bi = vsubq_f64(vaddq_f64(vmulq_f64(v, ai), vmulq_f64(p, br)),
                   vmulq_f64(q, ar));
  return d;
}

}  // namespace

void rk4_step_neon(const StepContext& c, const double* x, std::size_t n,
                   double* ar, double* ai, double* br, double* bi) {
  const std::size_t wide = n - n % 2;
  const float64x2_t hh = vdupq_n_f64(0.5 * c.dt);
  const float64x2_t dt = vdupq_n_f64(c.dt);
  const float64x2_t h6 = vdupq_n_f64(c.dt / 6.0);
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t p0 = vdupq_n_f64(c.s0.p), q0 = vdupq_n_f64(c.s0.q);
  const float64x2_t p1 = vdupq_n_f64(c.s1.p), q1 = vdupq_n_f64(c.s1.q);
  const float64x2_t p2 = vdupq_n_f64(c.s2.p), q2 = vdupq_n_f64(c.s2.q);
  const float64x2_t gy0 = vdupq_n_f64(c.s0.gy), g0 = vdupq_n_f64(c.s0.g);
  const float64x2_t gy1 = vdupq_n_f64(c.s1.gy), g1 = vdupq_n_f64(c.s1.g);
  const float64x2_t gy2 = vdupq_n_f64(c.s2.gy), g2 = vdupq_n_f64(c.s2.g);

  for (std::size_t j = 0; j < wide; j += 2) {
    const float64x2_t xj = vld1q_f64(x + j);
    const float64x2_t v0 = vaddq_f64(gy0, vmulq_f64(g0, xj));
    const float64x2_t v1 = vaddq_f64(gy1, vmulq_f64(g1, xj));
    const float64x2_t v2 = vaddq_f64(gy2, vmulq_f64(g2, xj));
    const float64x2_t yar = vld1q_f64(ar + j);
    const float64x2_t yai = vld1q_f64(ai + j);
    const float64x2_t ybr = vld1q_f64(br + j);
    const float64x2_t ybi = vld1q_f64(bi + j);

    Deriv k1 = deriv(p0, q0, v0, yar, yai, ybr, ybi);

    float64x2_t uar = vaddq_f64(yar, vmulq_f64(hh, k1.ar));
    float64x2_t uai = vaddq_f64(yai, vmulq_f64(hh, k1.ai));
    float64x2_t ubr = vaddq_f64(ybr, vmulq_f64(hh, k1.br));
    float64x2_t ubi = vaddq_f64(ybi, vmulq_f64(hh, k1.bi));

    Deriv k2 = deriv(p1, q1, v1, uar, uai, ubr, ubi);

    uar = vaddq_f64(yar, vmulq_f64(hh, k2.ar));
    uai = vaddq_f64(yai, vmulq_f64(hh, k2.ai));
    ubr = vaddq_f64(ybr, vmulq_f64(hh, k2.br));
    ubi = vaddq_f64(ybi, vmulq_f64(hh, k2.bi));

    Deriv k3 = deriv(p1, q1, v1, uar, uai, ubr, ubi);

    uar = vaddq_f64(yar, vmulq_f64(dt, k3.ar));
    uai = vaddq_f64(yai, vmulq_f64(dt, k3.ai));
    ubr = vaddq_f64(ybr, vmulq_f64(dt, k3.br));
    ubi = vaddq_f64(ybi, vmulq_f64(dt, k3.bi));

    Deriv k4 = deriv(p2, q2, v2, uar, uai, ubr, ubi);

    float64x2_t sar = vaddq_f64(k1.ar, vmulq_f64(two, k2.ar));
    sar = vaddq_f64(sar, vmulq_f64(two, k3.ar));
    sar = vaddq_f64(sar, k4.ar);
    float64x2_t sai = vaddq_f64(k1.ai, vmulq_f64(two, k2.ai));
    sai = vaddq_f64(sai, vmulq_f64(two, k3.ai));
    sai = vaddq_f64(sai, k4.ai);
    float64x2_t sbr = vaddq_f64(k1.br, vmulq_f64(two, k2.br));
    sbr = vaddq_f64(sbr, vmulq_f64(two, k3.br));
    sbr = vaddq_f64(sbr, k4.br);
    float64x2_t sbi = vaddq_f64(k1.bi, vmulq_f64(two, k2.bi));
    sbi = vaddq_f64(sbi, vmulq_f64(two, k3.bi));
    sbi = vaddq_f64(sbi, k4.bi);

    vst1q_f64(ar + j, vaddq_f64(yar, vmulq_f64(h6, sar)));
    vst1q_f64(ai + j, vaddq_f64(yai, vmulq_f64(h6, sai)));
    vst1q_f64(br + j, vaddq_f64(ybr, vmulq_f64(h6, sbr)));
    vst1q_f64(bi + j, vaddq_f64(ybi, vmulq_f64(h6, sbi)));
  }

  if (wide < n) {
    rk4_step_scalar(c, x + wide, n - wide, ar + wide, ai + wide, br + wide,
                    bi + wide);
  }
}

}  // namespace qmeter::kernels::detail

#endif  // QMETER_HAVE_NEON
