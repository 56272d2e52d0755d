#pragma once

// Forward-mode dual numbers with a single tangent direction.
//
// Dual<double> carries first derivatives; Dual<Dual<double>> carries the
// mixed second derivative along two seeded directions. All the phase-space
// formulas in this library are templates over the scalar type, so the same
// source evaluates values, gradients and Hessians.

#include <cmath>
#include <type_traits>

namespace curvlab {

template <typename T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), eps(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T v, T e) : val(v), eps(e) {}

  constexpr Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  constexpr Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  constexpr Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  constexpr Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend constexpr Dual operator-(const Dual& a) { return {-a.val, -a.eps}; }
  friend constexpr Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.eps + b.eps}; }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.eps - b.eps}; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.eps * b.val + a.val * b.eps};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T inv = T(1.0) / b.val;
    T v = a.val * inv;
    return {v, (a.eps - v * b.eps) * inv};
  }
  friend constexpr Dual operator+(const Dual& a, double b) { return {a.val + b, a.eps}; }
  friend constexpr Dual operator+(double a, const Dual& b) { return {a + b.val, b.eps}; }
  friend constexpr Dual operator-(const Dual& a, double b) { return {a.val - b, a.eps}; }
  friend constexpr Dual operator-(double a, const Dual& b) { return {a - b.val, -b.eps}; }
  friend constexpr Dual operator*(const Dual& a, double b) { return {a.val * b, a.eps * b}; }
  friend constexpr Dual operator*(double a, const Dual& b) { return {a * b.val, a * b.eps}; }
  friend constexpr Dual operator/(const Dual& a, double b) { return {a.val / b, a.eps / b}; }
  friend constexpr Dual operator/(double a, const Dual& b) {
    T v = a / b.val;
    return {v, -v * b.eps / b.val};
  }
};

using D1 = Dual<double>;
using D2 = Dual<Dual<double>>;

template <typename T>
struct is_dual : std::false_type {};
template <typename T>
struct is_dual<Dual<T>> : std::true_type {};

/// Innermost double value, for branching on magnitudes.
constexpr double value_of(double x) { return x; }
template <typename T>
constexpr double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

// Plain-double overloads so templated formulas can call exp(x) etc. uniformly.
inline double exp(double x) { return std::exp(x); }
inline double expm1(double x) { return std::expm1(x); }
inline double log(double x) { return std::log(x); }
inline double log1p(double x) { return std::log1p(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double sinh(double x) { return std::sinh(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double asinh(double x) { return std::asinh(x); }
inline double asin(double x) { return std::asin(x); }
inline double atan(double x) { return std::atan(x); }
inline double atan2(double y, double x) { return std::atan2(y, x); }
inline double pow(double x, double e) { return std::pow(x, e); }

// Elementary functions. Each rule is f(a) + f'(a) a.eps, recursing through
// the nested tangent type.

template <typename T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.val);
  return {e, e * a.eps};
}

template <typename T>
Dual<T> expm1(const Dual<T>& a) {
  return {expm1(a.val), exp(a.val) * a.eps};
}

template <typename T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.val), a.eps / a.val};
}

template <typename T>
Dual<T> log1p(const Dual<T>& a) {
  return {log1p(a.val), a.eps / (1.0 + a.val)};
}

template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.val);
  return {s, a.eps / (2.0 * s)};
}

template <typename T>
Dual<T> sinh(const Dual<T>& a) {
  return {sinh(a.val), cosh(a.val) * a.eps};
}

template <typename T>
Dual<T> cosh(const Dual<T>& a) {
  return {cosh(a.val), sinh(a.val) * a.eps};
}

template <typename T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.val), cos(a.val) * a.eps};
}

template <typename T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.val), -sin(a.val) * a.eps};
}

template <typename T>
Dual<T> tan(const Dual<T>& a) {
  T c = cos(a.val);
  return {tan(a.val), a.eps / (c * c)};
}

template <typename T>
Dual<T> asinh(const Dual<T>& a) {
  return {asinh(a.val), a.eps / sqrt(a.val * a.val + 1.0)};
}

template <typename T>
Dual<T> asin(const Dual<T>& a) {
  return {asin(a.val), a.eps / sqrt(1.0 - a.val * a.val)};
}

template <typename T>
Dual<T> atan(const Dual<T>& a) {
  return {atan(a.val), a.eps / (1.0 + a.val * a.val)};
}

template <typename T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  T r2 = x.val * x.val + y.val * y.val;
  return {atan2(y.val, x.val), (x.val * y.eps - y.val * x.eps) / r2};
}

template <typename T>
Dual<T> pow(const Dual<T>& a, double e) {
  return {pow(a.val, e), e * pow(a.val, e - 1.0) * a.eps};
}

}  // namespace curvlab
