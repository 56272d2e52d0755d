#include "curvlab/types.hpp"

#include <cmath>

namespace curvlab {

PhaseState::PhaseState(std::vector<double> q_in, std::vector<double> p_in)
    : q(std::move(q_in)), p(std::move(p_in)) {
  if (q.size() != p.size()) {
    throw std::invalid_argument("PhaseState: q and p must have equal length");
  }
  if (q.empty()) {
    throw std::invalid_argument("PhaseState: dimension must be at least 1");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i]) || !std::isfinite(p[i])) {
      throw std::invalid_argument("PhaseState: non-finite entry");
    }
  }
}

std::vector<double> PhaseState::packed() const {
  std::vector<double> x(q);
  x.insert(x.end(), p.begin(), p.end());
  return x;
}

PhaseState PhaseState::unpack(std::span<const double> x) {
  if (x.size() % 2 != 0) {
    throw std::invalid_argument("PhaseState::unpack: odd length");
  }
  const std::size_t n = x.size() / 2;
  return PhaseState({x.begin(), x.begin() + n}, {x.begin() + n, x.end()});
}

void ModelParams::validate(std::size_t n) const {
  if (b.size() != n) {
    throw std::invalid_argument("ModelParams: b has length " + std::to_string(b.size()) +
                                ", expected " + std::to_string(n));
  }
  if (kappa2 == 0.0) {
    throw std::invalid_argument("ModelParams: kappa2 must be nonzero");
  }
  if (!std::isfinite(z) || !std::isfinite(kappa2)) {
    throw std::invalid_argument("ModelParams: non-finite z or kappa2");
  }
  if (!(omega >= 0.0)) {
    throw std::invalid_argument("ModelParams: omega must be >= 0");
  }
}

}  // namespace curvlab
