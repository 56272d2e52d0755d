#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/dual.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

template <typename T>
using PhaseFn = std::function<T(std::span<const T>, std::span<const T>)>;

/// A smooth scalar function of phase space with exact derivatives.
///
/// Built from a generic callable f(q, p) taking std::span<const T> for
/// T in {double, D1, D2}; gradients and Hessians come from forward-mode
/// dual numbers. Immutable and cheap to copy.
class Observable {
 public:
  Observable() = default;

  template <typename F>
  Observable(std::string name, F f)
      : name_(std::move(name)),
        impl_(std::make_shared<const Impl>(Impl{PhaseFn<double>(f), PhaseFn<D1>(f),
                                                PhaseFn<D2>(f)})) {}

  const std::string& name() const { return name_; }
  Observable renamed(std::string name) const;
  bool valid() const { return impl_ != nullptr; }

  double operator()(const PhaseState& x) const;
  double value(std::span<const double> packed) const;

  template <typename T>
  T eval(std::span<const T> q, std::span<const T> p) const {
    if constexpr (std::is_same_v<T, double>) {
      return impl_->f0(q, p);
    } else if constexpr (std::is_same_v<T, D1>) {
      return impl_->f1(q, p);
    } else {
      static_assert(std::is_same_v<T, D2>, "unsupported scalar type");
      return impl_->f2(q, p);
    }
  }

  /// (dq_1..dq_N, dp_1..dp_N).
  std::vector<double> gradient(const PhaseState& x) const;
  std::vector<double> gradient(std::span<const double> packed) const;

  /// Derivative along a packed direction v.
  double directional(std::span<const double> packed, std::span<const double> v) const;

  /// Full 2N x 2N Hessian in packed ordering.
  Eigen::MatrixXd hessian(std::span<const double> packed) const;

 private:
  struct Impl {
    PhaseFn<double> f0;
    PhaseFn<D1> f1;
    PhaseFn<D2> f2;
  };
  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

Observable operator+(const Observable& a, const Observable& b);
Observable operator-(const Observable& a, const Observable& b);
Observable operator*(const Observable& a, const Observable& b);
Observable operator*(double c, const Observable& a);

/// Canonical bracket sum_i (da/dq_i db/dp_i - db/dq_i da/dp_i).
double poisson_bracket(const Observable& a, const Observable& b, const PhaseState& x);

/// Bracket from precomputed packed gradients.
double poisson_bracket(std::span<const double> grad_a, std::span<const double> grad_b);

/// Sum of |terms| of the bracket: the natural roundoff scale of its value.
double bracket_scale(std::span<const double> grad_a, std::span<const double> grad_b);

}  // namespace curvlab
