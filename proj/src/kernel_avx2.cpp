#include "kernels_detail.hpp"

#if defined(QMETER_HAVE_AVX2)

#include <immintrin.h>

// 4-lane AVX2 replay of the scalar sequence. Plain mul/add/sub only (no
// FMA): combined with -ffp-contract=off in both translation units this
// keeps the two backends bit-identical. Negation flips the sign bit, same
// as the scalar unary minus.

namespace qmeter::kernels::detail {

namespace {

const __m256d kSignMask = _mm256_set1_pd(-0.0);

inline __m256d neg(__m256d v) { return _mm256_xor_pd(v, kSignMask); }

struct Deriv {
  __m256d ar, ai, br, bi;
};

inline Deriv deriv(__m256d p, __m256d q, __m256d v, __m256d ar, __m256d ai,
                   __m256d br, __m256d bi) {
  Deriv d;
  d.ar = _mm256_sub_pd(
      _mm256_add_pd(_mm256_mul_pd(p, ai), _mm256_mul_pd(q, bi)),
      _mm256_mul_pd(v, br));
  d.ai = neg(_mm256_add_pd(
      _mm256_add_pd(_mm256_mul_pd(p, ar), _mm256_mul_pd(q, br)),
      _mm256_mul_pd(v, bi)));
  d.br = _mm256_sub_pd(
      _mm256_add_pd(_mm256_mul_pd(q, ai), _mm256_mul_pd(v, ar)),
      _mm256_mul_pd(p, bi));
  d.bi = _mm256_sub_pd(
      _mm256_add_pd(_mm256_mul_pd(v, ai), _mm256_mul_pd(p, br)),
      _mm256_mul_pd(q, ar));
  return d;
}

}  // namespace

void rk4_step_avx2(const StepContext& c, const double* x, std::size_t n,
                   double* ar, double* ai, double* br, double* bi) {
  const std::size_t wide = n - n % 4;
  const __m256d hh = _mm256_set1_pd(0.5 * c.dt);
  const __m256d dt = _mm256_set1_pd(c.dt);
  const __m256d h6 = _mm256_set1_pd(c.dt / 6.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d p0 = _mm256_set1_pd(c.s0.p), q0 = _mm256_set1_pd(c.s0.q);
  const __m256d p1 = _mm256_set1_pd(c.s1.p), q1 = _mm256_set1_pd(c.s1.q);
  const __m256d p2 = _mm256_set1_pd(c.s2.p), q2 = _mm256_set1_pd(c.s2.q);
  const __m256d gy0 = _mm256_set1_pd(c.s0.gy), g0 = _mm256_set1_pd(c.s0.g);
  const __m256d gy1 = _mm256_set1_pd(c.s1.gy), g1 = _mm256_set1_pd(c.s1.g);
  const __m256d gy2 = _mm256_set1_pd(c.s2.gy), g2 = _mm256_set1_pd(c.s2.g);

  for (std::size_t j = 0; j < wide; j += 4) {
    const __m256d xj = _mm256_loadu_pd(x + j);
    const __m256d v0 = _mm256_add_pd(gy0, _mm256_mul_pd(g0, xj));
    const __m256d v1 = _mm256_add_pd(gy1, _mm256_mul_pd(g1, xj));
    const __m256d v2 = _mm256_add_pd(gy2, _mm256_mul_pd(g2, xj));
    const __m256d yar = _mm256_loadu_pd(ar + j);
    const __m256d yai = _mm256_loadu_pd(ai + j);
    const __m256d ybr = _mm256_loadu_pd(br + j);
    const __m256d ybi = _mm256_loadu_pd(bi + j);

    Deriv k1 = deriv(p0, q0, v0, yar, yai, ybr, ybi);

    __m256d uar = _mm256_add_pd(yar, _mm256_mul_pd(hh, k1.ar));
    __m256d uai = _mm256_add_pd(yai, _mm256_mul_pd(hh, k1.ai));
    __m256d ubr = _mm256_add_pd(ybr, _mm256_mul_pd(hh, k1.br));
    __m256d ubi = _mm256_add_pd(ybi, _mm256_mul_pd(hh, k1.bi));

    Deriv k2 = deriv(p1, q1, v1, uar, uai, ubr, ubi);

    uar = _mm256_add_pd(yar, _mm256_mul_pd(hh, k2.ar));
    uai = _mm256_add_pd(yai, _mm256_mul_pd(hh, k2.ai));
    ubr = _mm256_add_pd(ybr, _mm256_mul_pd(hh, k2.br));
    ubi = _mm256_add_pd(ybi, _mm256_mul_pd(hh, k2.bi));

    Deriv k3 = deriv(p1, q1, v1, uar, uai, ubr, ubi);

    uar = _mm256_add_pd(yar, _mm256_mul_pd(dt, k3.ar));
    uai = _mm256_add_pd(yai, _mm256_mul_pd(dt, k3.ai));
    ubr = _mm256_add_pd(ybr, _mm256_mul_pd(dt, k3.br));
    ubi = _mm256_add_pd(ybi, _mm256_mul_pd(dt, k3.bi));

    Deriv k4 = deriv(p2, q2, v2, uar, uai, ubr, ubi);

    __m256d sar = _mm256_add_pd(k1.ar, _mm256_mul_pd(two, k2.ar));
    sar = _mm256_add_pd(sar, _mm256_mul_pd(two, k3.ar));
    sar = _mm256_add_pd(sar, k4.ar);
    __m256d sai = _mm256_add_pd(k1.ai, _mm256_mul_pd(two, k2.ai));
    sai = _mm256_add_pd(sai, _mm256_mul_pd(two, k3.ai));
    sai = _mm256_add_pd(sai, k4.ai);
    __m256d sbr = _mm256_add_pd(k1.br, _mm256_mul_pd(two, k2.br));
    sbr = _mm256_add_pd(sbr, _mm256_mul_pd(two, k3.br));
    sbr = _mm256_add_pd(sbr, k4.br);
    __m256d sbi = _mm256_add_pd(k1.bi, _mm256_mul_pd(two, k2.bi));
    sbi = _mm256_add_pd(sbi, _mm256_mul_pd(two, k3.bi));
    sbi = _mm256_add_pd(sbi, k4.bi);

    _mm256_storeu_pd(ar + j, _mm256_add_pd(yar, _mm256_mul_pd(h6, sar)));
    _mm256_storeu_pd(ai + j, _mm256_add_pd(yai, _mm256_mul_pd(h6, sai)));
    _mm256_storeu_pd(br + j, _mm256_add_pd(ybr, _mm256_mul_pd(h6, sbr)));
    _mm256_storeu_pd(bi + j, _mm256_add_pd(ybi, _mm256_mul_pd(h6, sbi)));
  }

  if (wide < n) {
    rk4_step_scalar(c, x + wide, n - wide, ar + wide, ai + wide, br + wide,
                    bi + wide);
  }
}

}  // namespace qmeter::kernels::detail

#endif  // QMETER_HAVE_AVX2
