#pragma once

// Metrics induced by kinetic Hamiltonians, their curvatures, geodesic polar
// coordinates with the canonical momentum lift, collective variables and
// radial reduction.
//
// Metric normalization: MetricField::coefficients() are the g_ii of
// ds^2 = sum g_ii dq_i^2 with g_ii = 2/a_i for H = 1/2 sum a_i p_i^2.
// All curvatures use this normalization. MetricField::kinetic() = 1/a_i.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/dual.hpp"
#include "curvlab/hamiltonians.hpp"
#include "curvlab/observable.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// kappa-trigonometric functions: one code path for circular (kappa > 0),
// parabolic (kappa = 0) and hyperbolic (kappa < 0) regimes.

template <typename T>
T cos_k(double kappa, const T& x) {
  if (kappa > 0.0) return cos(std::sqrt(kappa) * x);
  if (kappa < 0.0) return cosh(std::sqrt(-kappa) * x);
  return T(1.0);
}

template <typename T>
T sin_k(double kappa, const T& x) {
  if (kappa > 0.0) {
    const double s = std::sqrt(kappa);
    return sin(s * x) / s;
  }
  if (kappa < 0.0) {
    const double s = std::sqrt(-kappa);
    return sinh(s * x) / s;
  }
  return x;
}

template <typename T>
T tan_k(double kappa, const T& x) {
  return sin_k(kappa, x) / cos_k(kappa, x);
}

// ---------------------------------------------------------------------------
// Metrics

/// Value, first and second derivatives of the diagonal metric entries:
/// dg[i][k] = d_k g_ii, d2g[i][k][l] = d_k d_l g_ii.
struct MetricJet {
  std::vector<double> g;
  std::vector<std::vector<double>> dg;
  std::vector<std::vector<std::vector<double>>> d2g;
};

template <typename T>
using MetricFn = std::function<std::vector<T>(std::span<const T>)>;

/// Diagonal metric field q -> (g_11, ..., g_NN) in the ds^2 normalization.
class MetricField {
 public:
  MetricField() = default;

  template <typename F>
  MetricField(std::string provenance, std::size_t dim, F f)
      : provenance_(std::move(provenance)),
        dim_(dim),
        impl_(std::make_shared<const Impl>(Impl{MetricFn<double>(f), MetricFn<D1>(f),
                                                MetricFn<D2>(f)})) {}

  std::size_t dim() const { return dim_; }
  const std::string& provenance() const { return provenance_; }

  /// ds^2 coefficients.
  std::vector<double> coefficients(std::span<const double> q) const;
  /// g with H = 1/2 sum p_i^2 / g_ii: half the ds^2 coefficients.
  std::vector<double> kinetic(std::span<const double> q) const;

  /// Exact derivatives by nested dual numbers.
  MetricJet jet(std::span<const double> q) const;
  /// Central differences with one Richardson step (h and h/2); test oracle.
  MetricJet jet_fd(std::span<const double> q, double h = 2e-3) const;

  template <typename T>
  std::vector<T> eval(std::span<const T> q) const {
    if constexpr (std::is_same_v<T, double>) {
      return impl_->f0(q);
    } else if constexpr (std::is_same_v<T, D1>) {
      return impl_->f1(q);
    } else {
      static_assert(std::is_same_v<T, D2>, "unsupported scalar type");
      return impl_->f2(q);
    }
  }

 private:
  struct Impl {
    MetricFn<double> f0;
    MetricFn<D1> f1;
    MetricFn<D2> f2;
  };
  std::string provenance_;
  std::size_t dim_ = 0;
  std::shared_ptr<const Impl> impl_;
};

/// Inverts a purely kinetic, diagonal Hamiltonian H = 1/2 sum a_i(q) p_i^2:
/// g_ii = 2/a_i = 1/H(q, e_i). The form is checked at seeded sample points;
/// throws std::invalid_argument for potentials, cross terms or non-quadratic
/// momentum dependence.
MetricField metric_from_kinetic(const Observable& h, std::size_t dim);

/// Metrics of 1/2 J+ (type I), 1/2 J+ e^{z J-} (MS) and 1/2 J+ f(z J-).
MetricField type_one_metric(std::size_t dim, double z);
MetricField ms_metric(std::size_t dim, double z);
MetricField family_metric(std::size_t dim, double z, ProfileKind kind,
                          const std::optional<ScalarFunction>& f = std::nullopt);

// ---------------------------------------------------------------------------
// Curvature

enum class DerivativeMode { automatic, finite_difference };

/// Sectional curvatures K_ij of the coordinate planes (symmetric, zero
/// diagonal) and scalar curvature sum_{i != j} K_ij. Valid for any
/// signature.
struct CurvatureTensor {
  Eigen::MatrixXd sectional;
  double scalar = 0.0;
};

CurvatureTensor curvature_from_jet(const MetricJet& jet);
CurvatureTensor sectional_curvatures(const MetricField& m, std::span<const double> q,
                                     DerivativeMode mode = DerivativeMode::automatic);

/// Gaussian curvature of a 2D Riemannian diagonal metric by the
/// -1/sqrt(g11 g22) {d1(d1 sqrt(g22)/sqrt(g11)) + d2(d2 sqrt(g11)/sqrt(g22))}
/// formula. Throws SingularConfiguration if g11 g22 <= 0.
double gaussian_curvature_2d(const MetricField& m, std::span<const double> q,
                             DerivativeMode mode = DerivativeMode::automatic);

/// -z sinh(z q^2): the type-I 2D curvature.
double type_one_curvature_2d(double z, std::span<const double> q);

/// Curvature of the 2D metric of 1/2 J+ f(z J-) at x = z J-.
/// The ProfileKind form evaluates through h = log f and is exact for the
/// exponential profiles; user profiles use f, f', f''.
double curvature_of_family(ProfileKind kind, double z, double x,
                           const std::optional<ScalarFunction>& f = std::nullopt);
/// z (f' cosh x + (f'' - f - f'^2/f) sinh x). Throws std::domain_error at f = 0.
double curvature_of_family(const ScalarFunction& f, double z, double x);

enum class Geometry3d { type_one, ms };

struct Sectional3d {
  double k12 = 0.0;
  double k13 = 0.0;
  double k23 = 0.0;
  double scalar = 0.0;
};

/// Closed-form sectional curvatures of the 3D type-I and MS metrics.
Sectional3d sectional_curvatures_3d(Geometry3d kind, double z, std::span<const double> q);

// ---------------------------------------------------------------------------
// Geodesic polar coordinates (rho, theta_2, ..., theta_N). theta_2 carries the
// signature parameter lambda_2 = sqrt(kappa2); N = 2 is (rho, theta), N = 3 is
// (rho, theta, phi). Principal domain: all q_i >= 0.

/// Polar coordinates of q. Requires z != 0, kappa2 > 0, q_i >= 0.
template <typename T>
std::vector<T> polar_coordinates(std::span<const T> q, double z, double kappa2);

/// Inverse of polar_coordinates on the principal domain.
template <typename T>
std::vector<T> cartesian_from_polar(std::span<const T> coords, double z, double kappa2);

/// Jacobian dq/dQ at polar coordinates Q.
Eigen::MatrixXd polar_jacobian(std::span<const double> coords, double z, double kappa2);

/// Polar point with canonical momenta P = (dq/dQ)^T p.
struct PolarState {
  double z = 0.0;
  double kappa2 = 1.0;
  double rho = 0.0;
  std::vector<double> theta;    // theta_2..theta_N
  double p_rho = 0.0;
  std::vector<double> p_theta;  // conjugate to theta_2..theta_N

  std::size_t dim() const { return theta.size() + 1; }
  std::vector<double> coords() const;
  std::vector<double> momenta() const;
};

PolarState to_polar(const PhaseState& x, double z, double kappa2);
PhaseState from_polar(const PolarState& s);

/// The 2N polar canonical variables (rho, theta.., P_rho, P_theta..) as
/// observables of (q, p), for bracket checks of the lift.
std::vector<Observable> polar_observables(std::size_t dim, double z, double kappa2);

// Polar observables. The relations H~ = 2H, C~ = 4C, ... hold with the
// rescaled momenta Pi = 2P; these functions take a PolarState with canonical
// P and apply that rescaling internally.

/// C~^(m) = sum_{i=N-m+2}^N (prod_{j=N-m+2}^{i-1} w_j) Pi_{theta_i}^2 with
/// w_2 = 1/S_{kappa2}(theta_2)^2 and w_j = 1/sin^2 theta_j for j >= 3.
double polar_left_integral(const PolarState& s, std::size_t m);
/// Recursion C~^(2) = Pi_{theta_N}^2, C~^(m) = Pi_{theta_{N-m+2}}^2 + w C~^(m-1).
std::vector<double> polar_integral_chain(const PolarState& s);
/// 3D right integral (cos phi Pi_theta - sin phi C_{kappa2}(theta)/S_{kappa2}(theta) Pi_phi)^2.
double polar_right_integral_3d(const PolarState& s);
/// H~ = 1/2 C_{-z}(rho) (Pi_rho^2 + C~^(N) / (kappa2 S_{-z}(rho)^2)) for 1/2 J+.
double polar_hamiltonian_type_one(const PolarState& s);

/// MS radial chart: S_z(r) = T_{-z}(rho), P_r = C_{-z}(rho) P_rho.
struct MsRadial {
  double r = 0.0;
  double p_r = 0.0;
};
MsRadial ms_radial(const PolarState& s);
/// H~^MS = 1/2 Pi_r^2 + C~^(N) / (2 kappa2 S_z(r)^2) for 1/2 J+ e^{z J-}.
double polar_hamiltonian_ms(const PolarState& s);
/// 3D MS extra integral in the (r, theta, phi) chart; equals 4 kappa2 I_z.
double polar_ms_extra_integral_3d(const PolarState& s);

enum class RadialKind { type_one, ms };

/// One-degree-of-freedom reduction at fixed C~^(N); momenta are the rescaled
/// Pi. Evaluating at rho = 0 throws SingularConfiguration.
struct RadialSystem {
  RadialKind kind = RadialKind::type_one;
  double z = 0.0;
  double kappa2 = 1.0;
  double ctilde = 0.0;
  double operator()(double radius, double momentum) const;
};

RadialSystem radial_reduction(RadialKind kind, double z, double kappa2, double ctilde);

/// 2D polar metric (g_rho_rho, g_theta_theta) of the type-I space:
/// (dr^2 + kappa2 S_{-z}(rho)^2 dtheta^2) / C_{-z}(rho). kappa2 < 0 gives the
/// Lorentzian rows.
std::vector<double> type_one_polar_metric_2d(double z, double kappa2, double rho);
/// K(rho) = -1/2 z^2 S_{-z}(rho)^2 / C_{-z}(rho).
double type_one_polar_curvature(double z, double rho);
/// Metric fields in polar coordinates.
MetricField type_one_polar_metric(std::size_t dim, double z, double kappa2);
/// dr^2 + kappa2 S_z(r)^2 dtheta^2 (2D MS space in its radial chart).
MetricField ms_polar_metric_2d(double z, double kappa2);

// ---------------------------------------------------------------------------
// Collective variables

/// Signed squares xi_k^2, k = 0..N (negative for k >= 1 when z < 0).
struct CollectiveVars {
  std::vector<double> xi2;
  /// xi_0^2 - sum_{k>=1} xi_k^2, equal to 1.
  double pseudosphere() const;
  /// xi_k for z > 0 (all squares nonnegative); throws std::domain_error otherwise.
  std::vector<double> xi() const;
};

/// Requires z != 0.
CollectiveVars collective_vars(std::span<const double> q, double z);

// ---------------------------------------------------------------------------
// Curvature scans

enum class CurvatureFamily { type_one, ms };

struct CurvatureRow {
  std::vector<double> coords;
  std::string component;  // "K" in 2D; "Kij" and "scalar" from 3D on
  double closed_form = 0.0;  // NaN where no closed form exists (type I, N > 3)
  double numeric = 0.0;
};

/// Grid of `points` per axis over [lo, hi]^N, N >= 2.
std::vector<CurvatureRow> curvature_scan(CurvatureFamily family, std::size_t dim, double z,
                                         double lo, double hi, std::size_t points,
                                         DerivativeMode mode);
/// Columns q1..qN, [component,] closed_form, numeric, abs_err; %.17g.
std::string curvature_csv(const std::vector<CurvatureRow>& rows);

// ---------------------------------------------------------------------------
// Template definitions

template <typename T>
std::vector<T> polar_coordinates(std::span<const T> q, double z, double kappa2) {
  const std::size_t n = q.size();
  // s[m] = 2z sum_{i<=m} q_i^2 (1-based m), a[i] = 2z q_i^2.
  std::vector<T> a(n), s(n + 1, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = 2.0 * z * q[i] * q[i];
    s[i + 1] = s[i] + a[i];
  }
  std::vector<T> out(n);
  // S_{-z}(rho)^2 = expm1(2 z q^2)/z, C_{-z}(rho) = e^{z q^2}.
  const T s2 = expm1(s[n]) / z;
  const double rz = std::sqrt(std::abs(z));
  if (z > 0.0) {
    out[0] = asinh(rz * sqrt(s2)) / rz;
  } else {
    out[0] = atan2(rz * sqrt(s2), exp(0.5 * s[n])) / rz;
  }
  // tan^2 theta_{k+1} = (sum_{m>k} xi_m^2) / xi_k^2 = expm1(s_{N-k}) / (e^{s_{N-k}} expm1(a_{N-k+1})).
  for (std::size_t k = 1; k < n; ++k) {
    const T tail = expm1(s[n - k]) / z;
    const T head = exp(s[n - k]) * expm1(a[n - k]) / z;
    T angle = atan2(sqrt(tail), sqrt(head));
    if (k == 1) angle = angle / std::sqrt(kappa2);
    out[k] = angle;
  }
  return out;
}

template <typename T>
std::vector<T> cartesian_from_polar(std::span<const T> coords, double z, double kappa2) {
  const std::size_t n = coords.size();
  const T sr = sin_k(-z, coords[0]);
  const T s2 = sr * sr;
  // u_k = prod_{j<=k} sin^2 * cos^2 of the next angle; v_k = xi_k^2 / z = S^2 u_k.
  std::vector<T> v(n + 1);
  T prod(1.0);
  for (std::size_t k = 1; k < n; ++k) {
    const T angle = k == 1 ? std::sqrt(kappa2) * coords[1] : coords[k];
    const T c = cos(angle), sn = sin(angle);
    v[k] = s2 * prod * c * c;
    prod = prod * sn * sn;
  }
  v[n] = s2 * prod;
  // P_m = 1 + z sum_{k=N-m+1}^N v_k and q_m^2 = log1p(z v_{N-m+1} / P_{m-1}) / (2z).
  std::vector<T> q(n);
  T p_prev(1.0);
  for (std::size_t m = 1; m <= n; ++m) {
    const T r = z * v[n - m + 1] / p_prev;
    const T q2 = log1p(r) / (2.0 * z);
    q[m - 1] = value_of(q2) > 0.0 ? sqrt(q2) : T(0.0);
    p_prev = p_prev * (1.0 + r);
  }
  return q;
}

}  // namespace curvlab
