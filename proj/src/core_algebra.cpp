#include "curvlab/core_algebra.hpp"

#include <stdexcept>

namespace curvlab {

namespace {

void check_index(std::size_t i, std::size_t h, std::size_t n) {
  if (i < 1 || i > h || h > n) {
    throw std::out_of_range("exponent index out of range: need 1 <= i <= h <= N (i=" +
                            std::to_string(i) + ", h=" + std::to_string(h) +
                            ", N=" + std::to_string(n) + ")");
  }
}

double sum_sq(std::span<const double> q, std::size_t from, std::size_t to) {
  // 1-based inclusive range [from, to]; empty when from > to.
  double s = 0.0;
  for (std::size_t k = from; k <= to; ++k) s += q[k - 1] * q[k - 1];
  return s;
}

void check_state(const PhaseState& state, const ModelParams& params) {
  if (state.q.size() != state.p.size() || state.q.empty()) {
    throw std::invalid_argument("PhaseState: q and p must have equal nonzero length");
  }
  params.validate(state.dim());
}

GeneratorTriple to_triple(const detail::Triple<double>& t) { return {t.jm, t.jp, t.j3}; }

}  // namespace

double exponent_K(std::size_t i, std::size_t h, std::span<const double> q) {
  check_index(i, h, q.size());
  return -sum_sq(q, 1, i - 1) + sum_sq(q, i + 1, h);
}

double exponent_K_pair(std::size_t i, std::size_t j, std::size_t h, std::span<const double> q) {
  check_index(j, h, q.size());
  if (i >= j) throw std::out_of_range("exponent_K_pair: need i < j");
  return exponent_K(i, h, q) + exponent_K(j, h, q);
}

double exponent_Ktilde(std::size_t i, std::size_t h, std::span<const double> q) {
  const std::size_t n = q.size();
  if (h < 1 || i < h || i > n) {
    throw std::out_of_range("exponent_Ktilde index out of range: need 1 <= h <= i <= N");
  }
  return -sum_sq(q, h, i - 1) + sum_sq(q, i + 1, n);
}

double exponent_Ktilde_pair(std::size_t i, std::size_t j, std::size_t h, std::span<const double> q) {
  if (i >= j) throw std::out_of_range("exponent_Ktilde_pair: need i < j");
  return exponent_Ktilde(i, h, q) + exponent_Ktilde(j, h, q);
}

GeneratorTriple generators(const PhaseState& state, const ModelParams& params) {
  check_state(state, params);
  return to_triple(detail::chain_generators<double>(state.q, state.p, params.b, params.z, 0,
                                                    state.dim()));
}

GeneratorTriple left_generators(const PhaseState& state, const ModelParams& params,
                                std::size_t m) {
  check_state(state, params);
  if (m < 1 || m > state.dim()) throw std::out_of_range("left_generators: m out of range");
  return to_triple(detail::chain_generators<double>(state.q, state.p, params.b, params.z, 0, m));
}

GeneratorTriple right_generators(const PhaseState& state, const ModelParams& params,
                                 std::size_t m) {
  check_state(state, params);
  const std::size_t n = state.dim();
  if (m < 1 || m > n) throw std::out_of_range("right_generators: m out of range");
  return to_triple(
      detail::chain_generators<double>(state.q, state.p, params.b, params.z, n - m, n));
}

double casimir(const GeneratorTriple& t, double z) {
  return detail::casimir(detail::Triple<double>{t.jm, t.jp, t.j3}, z);
}

IntegralSet universal_integrals(const PhaseState& state, const ModelParams& params) {
  check_state(state, params);
  const std::size_t n = state.dim();
  IntegralSet out;
  for (std::size_t m = 2; m <= n; ++m) {
    out.left.push_back(
        detail::chain_integral<double>(state.q, state.p, params.b, params.z, 0, m));
  }
  for (std::size_t m = 2; m <= n; ++m) {
    if (m == n) {
      out.right.push_back(out.left.back());
    } else {
      out.right.push_back(
          detail::chain_integral<double>(state.q, state.p, params.b, params.z, n - m, n));
    }
  }
  return out;
}

}  // namespace curvlab
