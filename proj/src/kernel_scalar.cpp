#include "kernels_detail.hpp"

// Reference backend. The derivative of (ce, cg) = (ar + i ai, br + i bi)
// under i dc/dt = H c with H = [[p, q - iv], [q + iv, -p]], v = gy + g x:
//   dar = (p ai + q bi) - v br
//   dai = -((p ar + q br) + v bi)
//   dbr = (q ai + v ar) - p bi
//   dbi = (v ai + p br) - q ar
// Keep the grouping exactly as written: the wide backends replay the same
// sequence and the equivalence tests compare results bit for bit.

namespace qmeter::kernels::detail {

void rk4_step_scalar(const StepContext& c, const double* x, std::size_t n,
                     double* ar, double* ai, double* br, double* bi) {
  const double hh = 0.5 * c.dt;
  const double h6 = c.dt / 6.0;
  const double p0 = c.s0.p, q0 = c.s0.q;
  const double p1 = c.s1.p, q1 = c.s1.q;
  const double p2 = c.s2.p, q2 = c.s2.q;
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = x[j];
    const double v0 = c.s0.gy + c.s0.g * xj;
    const double v1 = c.s1.gy + c.s1.g * xj;
    const double v2 = c.s2.gy + c.s2.g * xj;
    const double yar = ar[j], yai = ai[j], ybr = br[j], ybi = bi[j];

    double k1ar = (p0 * yai + q0 * ybi) - v0 * ybr;
    double k1ai = -((p0 * yar + q0 * ybr) + v0 * ybi);
    double k1br = (q0 * yai + v0 * yar) - p0 * ybi;
    double k1bi = (v0 * yai + p0 * ybr) - q0 * yar;

    double uar = yar + hh * k1ar;
    double uai = yai + hh * k1ai;
    double ubr = ybr + hh * k1br;
    double ubi = ybi + hh * k1bi;

    double k2ar = (p1 * uai + q1 * ubi) - v1 * ubr;
    double k2ai = -((p1 * uar + q1 * ubr) + v1 * ubi);
    double k2br = (q1 * uai + v1 * uar) - p1 * ubi;
    double k2bi = (v1 * uai + p1 * ubr) - q1 * uar;

    uar = yar + hh * k2ar;
    uai = yai + hh * k2ai;
    ubr = ybr + hh * k2br;
    ubi = ybi + hh * k2bi;

    double k3ar = (p1 * uai + q1 * ubi) - v1 * ubr;
    double k3ai = -((p1 * uar + q1 * ubr) + v1 * ubi);
    double k3br = (q1 * uai + v1 * uar) - p1 * ubi;
    double k3bi = (v1 * uai + p1 * ubr) - q1 * uar;

    uar = yar + c.dt * k3ar;
    uai = yai + c.dt * k3ai;
    ubr = ybr + c.dt * k3br;
    ubi = ybi + c.dt * k3bi;

    double k4ar = (p2 * uai + q2 * ubi) - v2 * ubr;
    double k4ai = -((p2 * uar + q2 * ubr) + v2 * ubi);
    double k4br = (q2 * uai + v2 * uar) - p2 * ubi;
    double k4bi = (v2 * uai + p2 * ubr) - q2 * uar;

    double sar = k1ar + 2.0 * k2ar;
    sar = sar + 2.0 * k3ar;
    sar = sar + k4ar;
    double sai = k1ai + 2.0 * k2ai;
    sai = sai + 2.0 * k3ai;
    sai = sai + k4ai;
    double sbr = k1br + 2.0 * k2br;
    sbr = sbr + 2.0 * k3br;
    sbr = sbr + k4br;
    double sbi = k1bi + 2.0 * k2bi;
    sbi = sbi + 2.0 * k3bi;
    sbi = sbi + k4bi;

    ar[j] = yar + h6 * sar;
    ai[j] = yai + h6 * sai;
    br[j] = ybr + h6 * sbr;
    bi[j] = ybi + h6 * sbi;
  }
}

}  // namespace qmeter::kernels::detail
