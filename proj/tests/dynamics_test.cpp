#include "curvlab/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "curvlab/hamiltonians.hpp"

using namespace curvlab;

namespace {

ModelParams params(std::size_t n, double z, double omega = 0.0) {
  ModelParams p;
  p.z = z;
  p.b.assign(n, 0.0);
  p.omega = omega;
  return p;
}

SystemSpec type_one_sw(std::size_t n, double z) {
  SystemSpec s;
  s.deformed = type_one_family(params(n, z, 1.0));
  s.deformed.u_kind = PotentialKind::sw;
  return s;
}

SystemSpec ms_sw(std::size_t n, double z) {
  ModelParams p = params(n, z, 1.0);
  p.b[0] = 0.4;
  SystemSpec s;
  s.deformed = ms_sw_family(p);
  return s;
}

PhaseState round_state(std::size_t n) {
  const std::vector<double> q{0.6, 0.5, 0.4}, p{0.0, -0.1, 0.1};
  return PhaseState(std::vector<double>(q.begin(), q.begin() + static_cast<long>(n)),
                    std::vector<double>(p.begin(), p.begin() + static_cast<long>(n)));
}

IntegratorSpec midpoint(double dt, double t_end) {
  IntegratorSpec s;
  s.dt = dt;
  s.t_end = t_end;
  return s;
}

}  // namespace

TEST(Integrator, SpecValidation) {
  IntegratorSpec s;
  EXPECT_NO_THROW(s.validate());
  s.dt = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = IntegratorSpec{};
  s.t_end = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = IntegratorSpec{};
  s.rtol = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = IntegratorSpec{};
  s.max_newton_iters = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Flow, FlatFreeMotionIsStraight) {
  const Observable h = build_deformed(type_one_family(params(2, 0.0)));
  const PhaseState x0({0.1, 0.2}, {0.3, -0.1});
  for (Method m : {Method::implicit_midpoint, Method::rk_adaptive}) {
    IntegratorSpec spec = midpoint(1e-2, 5.0);
    spec.method = m;
    const Trajectory tr = hamilton_flow(h, x0, spec);
    ASSERT_EQ(tr.status, FlowStatus::completed) << to_string(m);
    EXPECT_DOUBLE_EQ(tr.times.back(), 5.0);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(tr.last().q[i], x0.q[i] + 5.0 * x0.p[i], 1e-9);
      EXPECT_NEAR(tr.last().p[i], x0.p[i], 1e-12);
    }
  }
}

TEST(Flow, RecordsEveryStepAndMonitor) {
  const SystemSpec sys = ms_sw(2, 0.3);
  const Trajectory tr = simulate(sys, round_state(2), midpoint(0.01, 0.5));
  ASSERT_EQ(tr.status, FlowStatus::completed);
  EXPECT_EQ(tr.times.size(), 51u);
  EXPECT_EQ(tr.states.size(), tr.times.size());
  ASSERT_EQ(tr.values.size(), tr.names.size());
  for (const auto& v : tr.values) EXPECT_EQ(v.size(), tr.times.size());
  EXPECT_EQ(tr.names.size(), 1 + build_system(sys).monitors.size());

  const std::string csv = trajectory_csv(tr);
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header.rfind("t,q1,q2,p1,p2,H,", 0), 0u) << header;
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), tr.times.size() + 1);
}

TEST(Flow, PartialFinalStepLandsOnEndTime) {
  const Observable h = build_deformed(type_one_family(params(2, 0.0)));
  const Trajectory tr = hamilton_flow(h, PhaseState({0.1, 0.2}, {0.3, -0.1}), midpoint(0.3, 1.0));
  EXPECT_EQ(tr.times.size(), 5u);
  EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
}

TEST(Drift, ConstantMonitorHasZeroDrift) {
  const Observable h = build_deformed(type_one_family(params(2, 0.2)));
  const Observable one("one", [](auto q, auto) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    return T(1.0);
  });
  const auto r = drift_report(hamilton_flow(h, PhaseState({0.5, 0.4}, {0.1, 0.2}), midpoint(0.01, 1.0), {one}));
  ASSERT_EQ(r.invariants.size(), 2u);
  EXPECT_EQ(r.invariants[1].name, "one");
  EXPECT_EQ(r.invariants[1].max_drift, 0.0);
  EXPECT_THROW(drift_report(Trajectory{}), std::invalid_argument);
}

TEST(Conservation, TypeOneWithOscillator) {
  for (std::size_t n : {2u, 3u}) {
    const auto r = drift_report(simulate(type_one_sw(n, 0.5), round_state(n), midpoint(1e-3, 20.0)));
    ASSERT_EQ(r.status, FlowStatus::completed);
    for (const auto& d : r.invariants) EXPECT_LT(d.max_drift, 1e-6) << d.name;
    EXPECT_LE(r.stats.max_newton_iterations, 25);
  }
}

TEST(Conservation, MaximallySuperintegrableOscillatorWithCentrifugalTerm) {
  const auto r = drift_report(simulate(ms_sw(2, 0.3), round_state(2), midpoint(1e-3, 20.0)));
  ASSERT_EQ(r.status, FlowStatus::completed);
  ASSERT_EQ(r.invariants.size(), 3u);
  EXPECT_EQ(r.invariants.back().name, "I_z[SW]");
  for (const auto& d : r.invariants) EXPECT_LT(d.max_drift, 1e-6) << d.name;
}

TEST(Conservation, MidpointDriftIsSecondOrder) {
  const SystemSpec sys = ms_sw(2, 0.3);
  const auto coarse = drift_report(simulate(sys, round_state(2), midpoint(2e-3, 10.0)));
  const auto fine = drift_report(simulate(sys, round_state(2), midpoint(1e-3, 10.0)));
  for (std::size_t k = 0; k < coarse.invariants.size(); ++k) {
    if (coarse.invariants[k].max_drift < 1e-11) continue;
    const double order = std::log2(coarse.invariants[k].max_drift / fine.invariants[k].max_drift);
    EXPECT_NEAR(order, 2.0, 0.4) << coarse.invariants[k].name;
  }
}

TEST(Conservation, MidpointIsBoundedWhileEulerDrifts) {
  const SystemSpec sys = type_one_sw(2, 0.5);
  const PhaseState x0 = round_state(2);
  auto energy_drift = [&](Method m, double t_end) {
    IntegratorSpec spec = midpoint(1e-2, t_end);
    spec.method = m;
    const BuiltSystem b = build_system(sys);
    return drift_report(hamilton_flow(b.hamiltonian, x0, spec)).invariants[0].max_drift;
  };
  const double mid_short = energy_drift(Method::implicit_midpoint, 20.0);
  const double mid_long = energy_drift(Method::implicit_midpoint, 200.0);
  EXPECT_LT(mid_long, 2.0 * mid_short);
  const double eul_short = energy_drift(Method::explicit_euler, 20.0);
  const double eul_long = energy_drift(Method::explicit_euler, 200.0);
  EXPECT_GT(eul_long, 5.0 * eul_short);
  EXPECT_GT(eul_short, 100.0 * mid_short);
}

TEST(Flow, AdaptiveOracleAgreesWithMidpoint) {
  const SystemSpec sys = ms_sw(2, 0.3);
  const auto mid = simulate(sys, round_state(2), midpoint(1e-4, 5.0));
  IntegratorSpec rk = midpoint(1e-3, 5.0);
  rk.method = Method::rk_adaptive;
  const auto ref = simulate(sys, round_state(2), rk);
  ASSERT_EQ(ref.status, FlowStatus::completed);
  EXPECT_GT(ref.stats.accepted, 10u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(mid.last().q[i], ref.last().q[i], 1e-6);
    EXPECT_NEAR(mid.last().p[i], ref.last().p[i], 1e-6);
  }
  const auto r = drift_report(ref);
  for (const auto& d : r.invariants) EXPECT_LT(d.max_drift, 1e-8) << d.name;
}

TEST(Flow, TimeReversal) {
  const SystemSpec sys = ms_sw(3, 0.3);
  const PhaseState x0 = round_state(3);
  const auto fwd = simulate(sys, x0, midpoint(1e-3, 5.0));
  PhaseState back = fwd.last();
  for (auto& p : back.p) p = -p;
  const auto rev = simulate(sys, back, midpoint(1e-3, 5.0));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(rev.last().q[i], x0.q[i], 1e-8);
    EXPECT_NEAR(-rev.last().p[i], x0.p[i], 1e-8);
  }
}

TEST(Flow, SingularityGuard) {
  ModelParams p = params(2, 0.0);
  p.b = {0.3, 0.0};
  SystemSpec s;
  s.deformed = type_one_family(p);
  EXPECT_THROW(simulate(s, PhaseState({0.0, 0.5}, {0.1, 0.1}), midpoint(1e-3, 1.0)),
               SingularConfiguration);

  // An attractive centrifugal term pulls q_1 into the origin.
  p.b = {-0.5, 0.0};
  s.deformed = type_one_family(p);
  const auto tr = simulate(s, PhaseState({0.3, 0.5}, {-0.2, 0.1}), midpoint(1e-3, 5.0));
  EXPECT_NE(tr.status, FlowStatus::completed);
  EXPECT_LT(tr.times.back(), 5.0);
  EXPECT_FALSE(tr.message.empty());
  for (double v : tr.last().q) EXPECT_TRUE(std::isfinite(v));
}

TEST(Flow, NewtonFailureIsReported) {
  IntegratorSpec spec = midpoint(0.5, 5.0);
  spec.max_newton_iters = 1;
  const auto tr = simulate(ms_sw(2, 0.3), round_state(2), spec);
  EXPECT_EQ(tr.status, FlowStatus::newton_failure);
  EXPECT_EQ(tr.times.size(), 1u);
}

TEST(Sweep, SingleCellMatchesDirectRun) {
  SweepGrid g;
  g.base = ms_sw(2, 0.3);
  g.x0 = round_state(2);
  const auto cells = g.cells();
  ASSERT_EQ(cells.size(), 1u);
  const IntegratorSpec spec = midpoint(1e-2, 2.0);
  const auto res = sweep(cells, spec, 1);
  ASSERT_TRUE(res[0].ok);
  const nlohmann::json direct = drift_report(simulate(g.base, g.x0, spec));
  EXPECT_EQ(nlohmann::json(res[0].report).dump(), direct.dump());
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  SweepGrid g;
  g.base = ms_sw(2, 0.3);
  g.x0 = round_state(2);
  g.z = {0.2, 0.4};
  g.omega = {0.5, 1.0};
  g.b = {{0.4, 0.0}, {0.2, 0.1}};
  const auto cells = g.cells();
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells[1].label["b"], nlohmann::json({0.2, 0.1}));
  const IntegratorSpec spec = midpoint(1e-2, 1.0);
  const nlohmann::json one = sweep(cells, spec, 1);
  const nlohmann::json four = sweep(cells, spec, 4);
  const nlohmann::json eight = sweep(cells, spec, 8);
  EXPECT_EQ(one.dump(), four.dump());
  EXPECT_EQ(one.dump(), eight.dump());
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(one[i]["index"], i);
}

TEST(Sweep, FailingCellIsIsolated) {
  SweepGrid g;
  g.base = ms_sw(2, 0.3);
  g.initial_states = {round_state(2), PhaseState({0.0, 0.5}, {0.1, 0.1}), round_state(2)};
  const auto res = sweep(g.cells(), midpoint(1e-2, 0.5), 2);
  ASSERT_EQ(res.size(), 3u);
  EXPECT_TRUE(res[0].ok);
  EXPECT_FALSE(res[1].ok);
  EXPECT_FALSE(res[1].error.empty());
  EXPECT_TRUE(res[2].ok);
  const nlohmann::json j = res[1];
  EXPECT_TRUE(j.contains("error"));
}

TEST(Sweep, WorkerCountFromEnvironment) {
  setenv("CURVLAB_THREADS", "3", 1);
  EXPECT_EQ(default_workers(), 3u);
  setenv("CURVLAB_THREADS", "junk", 1);
  EXPECT_GE(default_workers(), 1u);
  unsetenv("CURVLAB_THREADS");
  EXPECT_GE(default_workers(), 1u);
}
