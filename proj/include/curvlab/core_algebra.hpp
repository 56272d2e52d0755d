#pragma once

// Closed-form N-site realization of the non-standard deformation sl_z(2,R):
// generators, Casimir, exponent bookkeeping and the left/right chains of
// universal integrals. z = 0 reproduces the undeformed sl(2,R) formulas
// bit for bit.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curvlab/dual.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

/// |z x| below which sinh(zx)/(zx) switches to its Taylor series.
inline constexpr double kSincSeriesThreshold = 1e-4;

/// sinh(w)/w, smooth through w = 0 and exactly 1 there.
template <typename T>
T sinhc(const T& w) {
  if (std::abs(value_of(w)) < kSincSeriesThreshold) {
    const T w2 = w * w;
    return 1.0 + w2 * (1.0 / 6.0 + w2 * (1.0 / 120.0 + w2 * (1.0 / 5040.0)));
  }
  return sinh(w) / w;
}

/// sinh(z x)/(z x). x is usually q_i^2.
template <typename T>
T sinc_hyp(double z, const T& x) {
  return sinhc(T(z * x));
}

inline double sinc_hyp(double z, double x) { return sinhc(z * x); }

// Exponent functions with 1-based indices as in the formulas:
//   K_i^(h)  = -sum_{k<i} q_k^2 + sum_{i<l<=h} q_l^2
//   K~_i^(h) = -sum_{h<=k<i} q_k^2 + sum_{i<l<=N} q_l^2
// Out-of-range indices throw std::out_of_range.
double exponent_K(std::size_t i, std::size_t h, std::span<const double> q);
double exponent_K_pair(std::size_t i, std::size_t j, std::size_t h, std::span<const double> q);
double exponent_Ktilde(std::size_t i, std::size_t h, std::span<const double> q);
double exponent_Ktilde_pair(std::size_t i, std::size_t j, std::size_t h, std::span<const double> q);

struct GeneratorTriple {
  double jm = 0.0;  // J_-
  double jp = 0.0;  // J_+
  double j3 = 0.0;  // J_3
};

/// Left and right chains C_z^(m), C_{z,(m)} for m = 2..N; index 0 holds m = 2.
struct IntegralSet {
  std::vector<double> left;
  std::vector<double> right;

  double left_at(std::size_t m) const { return left.at(m - 2); }
  double right_at(std::size_t m) const { return right.at(m - 2); }
};

namespace detail {

template <typename T>
struct Triple {
  T jm;
  T jp;
  T j3;
};

inline void check_site(double qi, double bi, std::size_t i) {
  if (bi != 0.0 && qi == 0.0) {
    throw SingularConfiguration("centrifugal term b_" + std::to_string(i + 1) +
                                " != 0 at q_" + std::to_string(i + 1) + " = 0");
  }
}

/// Generators of the sub-chain of sites [lo, hi). The full realization is
/// lo = 0, hi = N; the left m-th coproduct is [0, m) and the right m-th is
/// [N - m, N).
template <typename T>
Triple<T> chain_generators(std::span<const T> q, std::span<const T> p, std::span<const double> b,
                           double z, std::size_t lo, std::size_t hi) {
  // Suffix sums of q^2 over the chain; the prefix part is accumulated on the fly.
  std::vector<T> q2(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    check_site(value_of(q[i]), b[i], i);
    q2[i - lo] = q[i] * q[i];
  }
  std::vector<T> after(hi - lo + 1, T(0.0));
  for (std::size_t i = hi - lo; i-- > 0;) after[i] = after[i + 1] + q2[i];

  T jm(0.0), jp(0.0), j3(0.0);
  T before(0.0);
  for (std::size_t i = lo; i < hi; ++i) {
    const std::size_t r = i - lo;
    const T s = sinc_hyp(z, q2[r]);
    const T e = exp(z * (after[r + 1] - before));
    jm += q2[r];
    T site = s * p[i] * p[i];
    if (b[i] != 0.0) site += b[i] / (q2[r] * s);
    jp += site * e;
    j3 += s * q[i] * p[i] * e;
    before += q2[r];
  }
  return {jm, jp, j3};
}

/// sinh(z J_-)/z J_+ - J_3^2, written as J_- sinhc(z J_-) J_+ so z = 0 is regular.
template <typename T>
T casimir(const Triple<T>& t, double z) {
  return t.jm * sinhc(T(z * t.jm)) * t.jp - t.j3 * t.j3;
}

/// Explicit Q_ij form of the Casimir of the sub-chain [lo, hi).
template <typename T>
T chain_integral(std::span<const T> q, std::span<const T> p, std::span<const double> b, double z,
                 std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  std::vector<T> q2(n), s(n), kexp(n);
  for (std::size_t i = lo; i < hi; ++i) {
    check_site(value_of(q[i]), b[i], i);
    q2[i - lo] = q[i] * q[i];
    s[i - lo] = sinc_hyp(z, q2[i - lo]);
  }
  // K_i relative to the chain.
  T total(0.0);
  for (std::size_t r = 0; r < n; ++r) total += q2[r];
  T before(0.0);
  for (std::size_t r = 0; r < n; ++r) {
    kexp[r] = total - before - q2[r] - before;  // sum after r minus sum before r
    before += q2[r];
  }

  T c(0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = lo + r;
    for (std::size_t t = r + 1; t < n; ++t) {
      const std::size_t j = lo + t;
      const T ang = q[i] * p[j] - q[j] * p[i];
      T qij = s[r] * s[t] * ang * ang;
      if (b[i] != 0.0) qij += b[i] * ((q2[t] * s[t]) / (q2[r] * s[r]));
      if (b[j] != 0.0) qij += b[j] * ((q2[r] * s[r]) / (q2[t] * s[t]));
      c += qij * exp(z * (kexp[r] + kexp[t]));
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = lo + r;
    if (b[i] != 0.0) c += b[i] * exp(2.0 * z * kexp[r]);
  }
  return c;
}

}  // namespace detail

/// Full N-site generators (J_-, J_+, J_3). Throws SingularConfiguration when
/// some b_i != 0 sits at q_i = 0.
GeneratorTriple generators(const PhaseState& state, const ModelParams& params);

/// Generators of the left m-th coproduct (sites 1..m).
GeneratorTriple left_generators(const PhaseState& state, const ModelParams& params, std::size_t m);

/// Generators of the right m-th coproduct (sites N-m+1..N).
GeneratorTriple right_generators(const PhaseState& state, const ModelParams& params, std::size_t m);

double casimir(const GeneratorTriple& t, double z);

IntegralSet universal_integrals(const PhaseState& state, const ModelParams& params);

}  // namespace curvlab
