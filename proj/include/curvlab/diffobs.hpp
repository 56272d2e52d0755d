#pragma once

// Observables of the sl_z(2,R) realization, bracket verification and
// functional-independence testing.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlab/observable.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

// Sampling box for random regular states, away from the q_i = 0 walls.
inline constexpr double kSampleQMin = 0.2;
inline constexpr double kSampleQMax = 1.2;
inline constexpr double kSamplePMax = 1.0;

/// splitmix64 stream; bit-identical across platforms, unlike
/// std::uniform_real_distribution.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed);
  double uniform(double lo, double hi);
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

PhaseState sample_state(std::size_t n, SampleRng& rng);

// Generator observables of the full N-site realization.
Observable obs_jminus(const ModelParams& params);
Observable obs_jplus(const ModelParams& params);
Observable obs_j3(const ModelParams& params);
Observable obs_casimir(const ModelParams& params);

/// Left integral C_z^(m), built from the explicit Q_ij form.
Observable obs_left_integral(const ModelParams& params, std::size_t m);
/// Right integral C_{z,(m)}.
Observable obs_right_integral(const ModelParams& params, std::size_t m);

/// The 2N-3 distinct universal integrals: C^(2..N) then C_(2..N-1).
std::vector<Observable> universal_integral_observables(const ModelParams& params);

struct BracketCheck {
  std::string a;
  std::string b;
  std::string expected;  // description of the right-hand side
  double max_deviation = 0.0;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RankCheck {
  std::string label;
  int rank = 0;
  int expected = 0;
  bool pass = false;
};

struct BracketReport {
  std::vector<BracketCheck> pairs;
  std::vector<RankCheck> ranks;
  bool all_pass() const;
};

void to_json(nlohmann::json& j, const BracketCheck& c);
void to_json(nlohmann::json& j, const RankCheck& c);
void to_json(nlohmann::json& j, const BracketReport& r);

/// Deviation of a bracket value from its expected value, normalised by
/// max(1, |expected|, scale), where scale is the sum of the absolute terms of
/// the bracket (its roundoff scale). Brackets of O(1) quantities are compared
/// absolutely.
double bracket_deviation(double value, double expected, double scale = 0.0);

struct VerifyOptions {
  std::size_t n_samples = 200;
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
  /// Hamiltonian checked against all integrals; defaults to (1/2) J_+.
  std::optional<Observable> hamiltonian;
  /// Extra observables that must commute with the Hamiltonian (e.g. I_z).
  std::vector<Observable> extra_integrals;
};

/// Deformed commutation rules, Casimir centrality, coalgebra integrals
/// commuting with the generators, involution within each chain and
/// {H, C} = 0, over seeded random states.
BracketReport verify_algebra(const ModelParams& params, const VerifyOptions& options);

/// Numerical rank of the Jacobian of the observables at a state: singular
/// values above kRankTolerance times the largest.
inline constexpr double kRankTolerance = 1e-8;
int independence_rank(const std::vector<Observable>& observables, const PhaseState& state);

}  // namespace curvlab
