#pragma once

// Integration of Hamilton's equations q' = dH/dp, p' = -dH/dq for any
// Observable Hamiltonian, with invariant monitoring, drift summaries,
// trajectory export and parallel parameter sweeps.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlab/hamiltonians.hpp"
#include "curvlab/observable.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

enum class Method {
  implicit_midpoint,
  rk_adaptive,
  /// Non-symplectic first-order reference; for comparisons only.
  explicit_euler,
};

struct IntegratorSpec {
  Method method = Method::implicit_midpoint;
  double dt = 1e-3;       // fixed step (midpoint, Euler); initial step (rk_adaptive)
  double rtol = 1e-10;    // rk_adaptive
  double atol = 1e-12;    // rk_adaptive
  double t_end = 1.0;
  std::size_t max_steps = 100'000'000;
  double newton_tol = 1e-12;
  int max_newton_iters = 25;

  /// Throws std::invalid_argument unless dt, tolerances and t_end are positive.
  void validate() const;
};

inline constexpr double kSingularityGuard = 1e-8;

enum class FlowStatus { completed, singular, newton_failure, step_limit, non_finite };

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t newton_iterations = 0;
  int max_newton_iterations = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
};

/// Recorded states at every accepted step. values[k][i] is monitor k at
/// times[i]; monitor 0 is the Hamiltonian.
struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<std::vector<double>> values;
  FlowStatus status = FlowStatus::completed;
  std::string message;
  StepStats stats;

  const PhaseState& last() const { return states.back(); }
};

/// Integrates from x0 to spec.t_end. b gives the centrifugal couplings for the
/// singularity guard (|q_i| < 1e-8 with b_i != 0 stops the run). Runtime
/// failures end the run early with the status set and the last good state
/// kept; a singular or non-finite x0 throws.
Trajectory hamilton_flow(const Observable& h, const PhaseState& x0, const IntegratorSpec& spec,
                         const std::vector<Observable>& monitors = {},
                         const std::vector<double>& b = {});

/// Flow of a built system with its monitors and guard.
Trajectory simulate(const SystemSpec& system, const PhaseState& x0, const IntegratorSpec& spec);

struct InvariantDrift {
  std::string name;
  double initial = 0.0;
  double max_drift = 0.0;  // max |v(t) - v(0)| / max(1, |v(0)|)
};

struct DriftReport {
  std::vector<InvariantDrift> invariants;
  FlowStatus status = FlowStatus::completed;
  std::string message;
  double t_final = 0.0;
  StepStats stats;

  double max_drift() const;
};

DriftReport drift_report(const Trajectory& traj);

/// Columns t, q1..qN, p1..pN, then one per monitor (H first); %.17g.
std::string trajectory_csv(const Trajectory& traj);

void to_json(nlohmann::json& j, const StepStats& s);
void to_json(nlohmann::json& j, const InvariantDrift& d);
void to_json(nlohmann::json& j, const DriftReport& r);

std::string to_string(Method m);
std::string to_string(FlowStatus s);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCell {
  SystemSpec system;
  PhaseState x0;
  nlohmann::json label;
};

/// Cartesian product of parameter axes over a base system. Empty axes keep
/// the base value. z, kappa2, omega and k act on deformed systems; kappa,
/// omega and k on classical ones; b and x0 on both.
struct SweepGrid {
  SystemSpec base;
  PhaseState x0;
  std::vector<double> z;
  std::vector<double> kappa2;
  std::vector<double> kappa;
  std::vector<double> omega;
  std::vector<double> k;
  std::vector<std::vector<double>> b;
  std::vector<PhaseState> initial_states;

  std::vector<SweepCell> cells() const;
};

struct SweepResult {
  std::size_t index = 0;
  nlohmann::json label;
  bool ok = false;
  std::string error;
  DriftReport report;
};

/// Worker count from CURVLAB_THREADS, else hardware concurrency (at least 1).
std::size_t default_workers();

/// Runs every cell; results are ordered by cell index regardless of the
/// worker count. Exceptions in a cell are recorded in that cell only.
std::vector<SweepResult> sweep(const std::vector<SweepCell>& cells, const IntegratorSpec& spec,
                               std::size_t workers = 0);

void to_json(nlohmann::json& j, const SweepResult& r);

}  // namespace curvlab
