#include "curvlab/observable.hpp"

#include <cmath>
#include <stdexcept>

namespace curvlab {

namespace {

std::size_t half(std::size_t n) {
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("packed state must have even length");
  return n / 2;
}

}  // namespace

Observable Observable::renamed(std::string name) const {
  Observable o = *this;
  o.name_ = std::move(name);
  return o;
}

double Observable::operator()(const PhaseState& x) const {
  return impl_->f0(std::span<const double>(x.q), std::span<const double>(x.p));
}

double Observable::value(std::span<const double> packed) const {
  const std::size_t n = half(packed.size());
  return impl_->f0(packed.first(n), packed.subspan(n));
}

std::vector<double> Observable::gradient(const PhaseState& x) const {
  return gradient(x.packed());
}

std::vector<double> Observable::gradient(std::span<const double> packed) const {
  const std::size_t dim = packed.size();
  const std::size_t n = half(dim);
  std::vector<D1> x(dim);
  for (std::size_t k = 0; k < dim; ++k) x[k] = D1(packed[k], 0.0);
  std::vector<double> g(dim);
  const std::span<const D1> xs(x);
  for (std::size_t k = 0; k < dim; ++k) {
    x[k].eps = 1.0;
    g[k] = impl_->f1(xs.first(n), xs.subspan(n)).eps;
    x[k].eps = 0.0;
  }
  return g;
}

double Observable::directional(std::span<const double> packed, std::span<const double> v) const {
  const std::size_t dim = packed.size();
  const std::size_t n = half(dim);
  std::vector<D1> x(dim);
  for (std::size_t k = 0; k < dim; ++k) x[k] = D1(packed[k], v[k]);
  const std::span<const D1> xs(x);
  return impl_->f1(xs.first(n), xs.subspan(n)).eps;
}

Eigen::MatrixXd Observable::hessian(std::span<const double> packed) const {
  const std::size_t dim = packed.size();
  const std::size_t n = half(dim);
  std::vector<D2> x(dim);
  for (std::size_t k = 0; k < dim; ++k) x[k] = D2(D1(packed[k], 0.0), D1(0.0, 0.0));
  const std::span<const D2> xs(x);
  Eigen::MatrixXd h(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    x[i].eps.val = 1.0;
    for (std::size_t j = i; j < dim; ++j) {
      x[j].val.eps = 1.0;
      const double hij = impl_->f2(xs.first(n), xs.subspan(n)).eps.eps;
      x[j].val.eps = 0.0;
      h(i, j) = hij;
      h(j, i) = hij;
    }
    x[i].eps.val = 0.0;
  }
  return h;
}

Observable operator+(const Observable& a, const Observable& b) {
  return Observable("(" + a.name() + "+" + b.name() + ")", [a, b](auto q, auto p) {
    return a.eval(q, p) + b.eval(q, p);
  });
}

Observable operator-(const Observable& a, const Observable& b) {
  return Observable("(" + a.name() + "-" + b.name() + ")", [a, b](auto q, auto p) {
    return a.eval(q, p) - b.eval(q, p);
  });
}

Observable operator*(const Observable& a, const Observable& b) {
  return Observable("(" + a.name() + "*" + b.name() + ")", [a, b](auto q, auto p) {
    return a.eval(q, p) * b.eval(q, p);
  });
}

Observable operator*(double c, const Observable& a) {
  return Observable(a.name(), [c, a](auto q, auto p) { return c * a.eval(q, p); });
}

double poisson_bracket(std::span<const double> ga, std::span<const double> gb) {
  const std::size_t n = half(ga.size());
  if (gb.size() != ga.size()) throw std::invalid_argument("gradient length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += ga[i] * gb[n + i] - gb[i] * ga[n + i];
  }
  return s;
}

double bracket_scale(std::span<const double> ga, std::span<const double> gb) {
  const std::size_t n = half(ga.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += std::abs(ga[i] * gb[n + i]) + std::abs(gb[i] * ga[n + i]);
  }
  return s;
}

double poisson_bracket(const Observable& a, const Observable& b, const PhaseState& x) {
  const auto packed = x.packed();
  return poisson_bracket(a.gradient(packed), b.gradient(packed));
}

}  // namespace curvlab
