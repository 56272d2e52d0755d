#pragma once

#include <array>
#include <cmath>

#include "curvlab/core_algebra.hpp"

namespace curvlab::oracles {

// Direct transcriptions of the explicit two- and three-site formulas, used as
// independent oracles. They call std::sinh directly and never touch the
// series branch or the prefix-sum exponent bookkeeping.
inline double s_direct(double z, double x) { return std::sinh(z * x) / (z * x); }

inline GeneratorTriple two_site_oracle(const PhaseState& x, double z, double b1, double b2) {
  const double q1 = x.q[0], q2 = x.q[1], p1 = x.p[0], p2 = x.p[1];
  const double e1 = std::exp(z * q2 * q2), e2 = std::exp(-z * q1 * q1);
  GeneratorTriple t;
  t.jm = q1 * q1 + q2 * q2;
  t.j3 = s_direct(z, q1 * q1) * e1 * q1 * p1 + s_direct(z, q2 * q2) * e2 * q2 * p2;
  t.jp = s_direct(z, q1 * q1) * e1 * p1 * p1 + s_direct(z, q2 * q2) * e2 * p2 * p2 +
         z * b1 / std::sinh(z * q1 * q1) * e1 + z * b2 / std::sinh(z * q2 * q2) * e2;
  return t;
}

inline double casimir_two_site_oracle(const PhaseState& x, double z, double b1, double b2) {
  const double q1s = x.q[0] * x.q[0], q2s = x.q[1] * x.q[1];
  const double l = x.q[0] * x.p[1] - x.q[1] * x.p[0];
  const double sh1 = std::sinh(z * q1s), sh2 = std::sinh(z * q2s);
  return s_direct(z, q1s) * s_direct(z, q2s) * l * l * std::exp(z * (q2s - q1s)) +
         b1 * std::exp(2 * z * q2s) + b2 * std::exp(-2 * z * q1s) +
         (b1 * sh2 / sh1 + b2 * sh1 / sh2) * std::exp(z * (q2s - q1s));
}

// Three-site integrals with b = 0 in explicit form.
inline std::array<double, 3> three_site_oracle(const PhaseState& x, double z) {
  const auto& q = x.q;
  const auto& p = x.p;
  const double a = q[0] * q[0], b = q[1] * q[1], c = q[2] * q[2];
  const double sa = s_direct(z, a), sb = s_direct(z, b), sc = s_direct(z, c);
  const double l12 = q[0] * p[1] - q[1] * p[0];
  const double l13 = q[0] * p[2] - q[2] * p[0];
  const double l23 = q[1] * p[2] - q[2] * p[1];
  const double c2 = sa * sb * l12 * l12 * std::exp(-z * a) * std::exp(z * b);
  const double c2r = sb * sc * l23 * l23 * std::exp(-z * b) * std::exp(z * c);
  const double c3 = sa * sb * l12 * l12 * std::exp(-z * a) * std::exp(z * b) * std::exp(2 * z * c) +
                    sa * sc * l13 * l13 * std::exp(-z * a) * std::exp(z * c) +
                    sb * sc * l23 * l23 * std::exp(-2 * z * a) * std::exp(-z * b) * std::exp(z * c);
  return {c2, c2r, c3};
}

}  // namespace curvlab::oracles
