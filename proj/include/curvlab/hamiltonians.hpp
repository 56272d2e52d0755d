#pragma once

// Concrete Hamiltonians: the deformed family 1/2 J+ f(z J-) + U(z J-), the
// extra integral of the maximally superintegrable cases, and the classical
// curved systems on S^N / H^N in Poincare and Beltrami charts.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvlab/dual.hpp"
#include "curvlab/observable.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

/// A smooth user function of one variable with its first two derivatives.
/// Applying it to dual numbers composes derivatives by the chain rule.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  template <typename T>
  T operator()(const T& x) const {
    return apply(0, x);
  }

 private:
  double derivative(int order, double x) const;

  double apply(int order, double x) const { return derivative(order, x); }

  template <typename T>
  Dual<T> apply(int order, const Dual<T>& x) const {
    return {apply(order, x.val), apply(order + 1, x.val) * x.eps};
  }
};

enum class ProfileKind { identity, exp_plus, exp_minus, user };
enum class PotentialKind { none, sw, kc, user };

/// H = 1/2 J+ f(z J-) + U, with U a function of J- (or of z J- for user U).
/// With potential_scaled_by_profile the potential is multiplied by f too,
/// H = (1/2 J+ + U) f, which is the MS-SW system for f = exp_plus.
struct DeformedFamily {
  ProfileKind f_kind = ProfileKind::identity;
  PotentialKind u_kind = PotentialKind::none;
  ModelParams params;
  std::optional<ScalarFunction> f_user;
  std::optional<ScalarFunction> u_user;
  bool potential_scaled_by_profile = false;

  /// Throws std::invalid_argument on missing user functions, f(0) != 1 or
  /// invalid params for n sites.
  void validate(std::size_t n) const;
};

inline constexpr double kProfileNormTolerance = 1e-12;

DeformedFamily type_one_family(const ModelParams& params);
DeformedFamily ms_family(const ModelParams& params);
DeformedFamily ms_sw_family(const ModelParams& params);

Observable build_deformed(const DeformedFamily& spec);

/// Deformed potentials evaluated at J- (the built-in U choices).
double sw_deformed_potential(double jm, double z, double omega);
double kc_deformed_potential(double jm, double z, double k);

/// Extra integral I_z of the MS Hamiltonian 1/2 J+ e^{z J-} (sw = false) or of
/// the MS-SW Hamiltonian (sw = true, requires z != 0). Depends on site 1 only.
Observable extra_integral_ms(std::size_t dim, const ModelParams& params, bool sw = false);

enum class Chart { poincare, beltrami };
enum class ClassicalPotential { free, evans, sw, kc };

struct ClassicalSystem {
  Chart chart = Chart::beltrami;
  double kappa = 0.0;
  ClassicalPotential potential = ClassicalPotential::free;
  double omega = 0.0;
  double k = 0.0;
  std::vector<double> b;
  /// Central potential V for the Evans system, a function of the squared
  /// radial variable of the chart.
  std::optional<ScalarFunction> evans_v;
};

struct ClassicalBuild {
  Observable hamiltonian;
  /// SW: I_1..I_N. KC: L_i for every i with b_i = 0.
  std::vector<Observable> integrals;
  std::vector<std::string> diagnostics;
};

ClassicalBuild build_classical(const ClassicalSystem& spec);

/// Ambient coordinates x_i of the chart. Throws std::domain_error when the
/// Beltrami radicand 1 + kappa q^2 is not positive or the Poincare
/// denominator vanishes.
std::vector<double> ambient_coordinates(Chart chart, double kappa, std::span<const double> q);

/// A dynamical system: Hamiltonian plus the quantities to monitor along
/// trajectories.
struct SystemSpec {
  enum class Kind { deformed, classical } kind = Kind::deformed;
  DeformedFamily deformed;
  ClassicalSystem classical;
};

struct BuiltSystem {
  Observable hamiltonian;
  std::vector<Observable> monitors;
  std::size_t n = 0;
};

/// Deformed systems monitor the universal integrals, plus I_z for the MS and
/// MS-SW cases; classical systems monitor the z = 0 universal integrals and
/// their documented extra integrals.
BuiltSystem build_system(const SystemSpec& spec);

std::string to_string(ProfileKind k);
std::string to_string(PotentialKind k);
std::string to_string(Chart c);
std::string to_string(ClassicalPotential p);

}  // namespace curvlab
