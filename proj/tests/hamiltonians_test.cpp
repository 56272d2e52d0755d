#include "curvlab/hamiltonians.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "curvlab/core_algebra.hpp"
#include "curvlab/diffobs.hpp"

namespace curvlab {
namespace {

ModelParams params_with(double z, std::vector<double> b, double omega = 0.0, double k = 0.0) {
  ModelParams m;
  m.z = z;
  m.b = std::move(b);
  m.omega = omega;
  m.k = k;
  return m;
}

double max_bracket(const Observable& a, const Observable& b, std::size_t n, std::uint64_t seed,
                   int samples = 100) {
  SampleRng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto x = sample_state(n, rng).packed();
    const auto ga = a.gradient(x), gb = b.gradient(x);
    worst = std::max(worst, bracket_deviation(poisson_bracket(ga, gb), 0.0, bracket_scale(ga, gb)));
  }
  return worst;
}

std::vector<DeformedFamily> builtin_families(const ModelParams& mp) {
  std::vector<DeformedFamily> out = {type_one_family(mp), ms_family(mp), ms_sw_family(mp)};
  DeformedFamily minus = type_one_family(mp);
  minus.f_kind = ProfileKind::exp_minus;
  out.push_back(minus);
  DeformedFamily sw = type_one_family(mp);
  sw.u_kind = PotentialKind::sw;
  out.push_back(sw);
  DeformedFamily kc = type_one_family(mp);
  kc.u_kind = PotentialKind::kc;
  out.push_back(kc);
  return out;
}

ScalarFunction cosh_profile() {
  return {"cosh", [](double x) { return std::cosh(x); }, [](double x) { return std::sinh(x); },
          [](double x) { return std::cosh(x); }};
}

TEST(ScalarFunction, ChainRuleThroughDuals) {
  const ScalarFunction f = cosh_profile();
  const D1 d = f(D1(0.3, 2.0));
  EXPECT_DOUBLE_EQ(d.val, std::cosh(0.3));
  EXPECT_DOUBLE_EQ(d.eps, 2.0 * std::sinh(0.3));
  const D2 x(D1(0.3, 1.0), D1(1.0, 0.0));
  EXPECT_DOUBLE_EQ(f(x).eps.eps, std::cosh(0.3));
  const ScalarFunction missing{"bad", [](double x) { return x; }, {}, {}};
  EXPECT_THROW(missing(D1(0.1, 1.0)), std::invalid_argument);
}

TEST(Deformed, FlatFreeParticle) {
  const auto h = build_deformed(type_one_family(params_with(0.0, {0, 0})));
  EXPECT_EQ(h(PhaseState({1, 1}, {1, 0})), 0.5);
}

TEST(Deformed, ClassicalLimitOfFamily) {
  // At z = 0 every member is 1/2|p|^2 + V(q^2) + sum b_i/(2 q_i^2).
  const std::vector<double> b{0.3, 0.0, 1.2};
  const auto mp = params_with(0.0, b, 2.0, 1.5);
  SampleRng rng(3);
  for (const auto& fam : builtin_families(mp)) {
    const auto h = build_deformed(fam);
    for (int s = 0; s < 10; ++s) {
      const auto x = sample_state(3, rng);
      double q2 = 0.0, v = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        q2 += x.q[i] * x.q[i];
        v += 0.5 * x.p[i] * x.p[i] + (b[i] != 0.0 ? b[i] / (2 * x.q[i] * x.q[i]) : 0.0);
      }
      if (fam.u_kind == PotentialKind::sw) v += 2.0 * q2;
      if (fam.u_kind == PotentialKind::kc) v -= 1.5 / std::sqrt(q2);
      EXPECT_NEAR(h(x), v, 1e-14 * std::max(1.0, std::abs(v))) << h.name();
    }
  }
}

TEST(Deformed, PotentialLimits) {
  EXPECT_EQ(sw_deformed_potential(1.5, 0.0, 2.0), 3.0);
  const double d1 = std::abs(sw_deformed_potential(1.5, 1e-3, 2.0) - 3.0);
  const double d2 = std::abs(sw_deformed_potential(1.5, 1e-4, 2.0) - 3.0);
  // sinh(zJ)/z - J is O(z^2); the deformation of U is even in z.
  EXPECT_GT(d1, d2);
  EXPECT_LT(d2, 1e-7);
  EXPECT_NEAR(kc_deformed_potential(4.0, 0.0, 1.0), -0.5, 1e-15);
  EXPECT_NEAR(kc_deformed_potential(4.0, 1e-7, 1.0), -0.5, 1e-6);
  // Explicit closed form.
  for (double z : {-0.7, 0.2, 0.4}) {
    const double jm = 1.3, e = std::exp(2 * z * jm);
    EXPECT_NEAR(kc_deformed_potential(jm, z, 1.1), -1.1 * std::sqrt(2 * z / (e - 1)) * e, 1e-14);
    EXPECT_NEAR(sw_deformed_potential(jm, z, 0.8), 0.8 * std::sinh(z * jm) / z, 1e-14);
  }
  EXPECT_THROW(kc_deformed_potential(0.0, 0.3, 1.0), SingularConfiguration);
}

TEST(Deformed, SwPotentialConvergesLinearlyInZ) {
  // U(z) - U(0) at fixed state, with the z-dependence of J+ removed:
  // convergence of the full Hamiltonian is first order in z.
  const auto x = PhaseState({0.7, 0.9}, {0.2, -0.4});
  auto h = [&](double z) {
    DeformedFamily sw = type_one_family(params_with(z, {0.1, 0.2}, 2.0));
    sw.u_kind = PotentialKind::sw;
    return build_deformed(sw)(x);
  };
  const double h0 = h(0.0);
  const double slope = std::log(std::abs(h(1e-4) - h0) / std::abs(h(1e-6) - h0)) / std::log(100.0);
  EXPECT_NEAR(slope, 1.0, 0.1);
}

TEST(Deformed, UserFunctions) {
  DeformedFamily fam = type_one_family(params_with(0.4, {0.2, 0.5}));
  fam.f_kind = ProfileKind::user;
  fam.f_user = cosh_profile();
  fam.u_kind = PotentialKind::user;
  fam.u_user = ScalarFunction{"x^2", [](double x) { return x * x; }, [](double x) { return 2 * x; },
                              [](double) { return 2.0; }};
  const auto h = build_deformed(fam);
  const auto x = PhaseState({0.5, 0.8}, {0.3, 0.1});
  const auto t = generators(x, fam.params);
  const double w = 0.4 * t.jm;
  EXPECT_NEAR(h(x), 0.5 * t.jp * std::cosh(w) + w * w, 1e-14);
  EXPECT_LT(max_bracket(h, obs_left_integral(fam.params, 2), 2, 5), 1e-10);

  DeformedFamily bad = fam;
  bad.f_user = ScalarFunction{"e^x+1", [](double x) { return std::exp(x) + 1; },
                              [](double x) { return std::exp(x); },
                              [](double x) { return std::exp(x); }};
  EXPECT_THROW(build_deformed(bad), std::invalid_argument);
  DeformedFamily none = fam;
  none.u_user.reset();
  EXPECT_THROW(build_deformed(none), std::invalid_argument);
}

TEST(Deformed, UniversalCommutationForEveryBuiltin) {
  for (std::size_t n : {2u, 3u, 5u}) {
    for (double z : {-1.0, 0.3, 1.0}) {
      std::vector<double> b(n);
      for (std::size_t i = 0; i < n; ++i) b[i] = 0.2 * static_cast<double>((i + 1) % 3);
      const auto mp = params_with(z, b, 0.7, 1.3);
      for (const auto& fam : builtin_families(mp)) {
        VerifyOptions opt;
        opt.n_samples = 30;
        opt.seed = 100 + n;
        opt.hamiltonian = build_deformed(fam);
        const auto report = verify_algebra(mp, opt);
        for (const auto& c : report.pairs) {
          if (c.a != opt.hamiltonian->name()) continue;
          EXPECT_TRUE(c.pass) << "N=" << n << " z=" << z << " {" << c.a << "," << c.b
                              << "} dev=" << c.max_deviation;
        }
      }
    }
  }
}

TEST(Deformed, KcSingularAtOrigin) {
  DeformedFamily kc = type_one_family(params_with(0.3, {0.0, 0.0}, 0.0, 1.0));
  kc.u_kind = PotentialKind::kc;
  EXPECT_THROW(build_deformed(kc)(PhaseState({0.0, 0.0}, {1.0, 1.0})), SingularConfiguration);
}

TEST(ExtraIntegral, CommutesWithMsHamiltonians) {
  const auto mp = params_with(0.6, {0.0, 0.0});
  EXPECT_LT(max_bracket(build_deformed(ms_family(mp)), extra_integral_ms(2, mp), 2, 7), 1e-10);
  const auto sw = params_with(0.3, {0.5, 0.0}, 1.0);
  EXPECT_LT(max_bracket(build_deformed(ms_sw_family(sw)), extra_integral_ms(2, sw, true), 2, 8),
            1e-10);
  for (std::size_t n : {3u, 4u}) {
    const auto m3 = params_with(-0.45, std::vector<double>(n, 0.35), 0.6);
    EXPECT_LT(max_bracket(build_deformed(ms_family(m3)), extra_integral_ms(n, m3), n, 9), 1e-10);
    EXPECT_LT(max_bracket(build_deformed(ms_sw_family(m3)), extra_integral_ms(n, m3, true), n, 9),
              1e-10);
  }
  // I_z is not an integral of the type-I system.
  EXPECT_GT(max_bracket(build_deformed(type_one_family(mp)), extra_integral_ms(2, mp), 2, 7), 1e-6);
}

TEST(ExtraIntegral, ValuesAndDomain) {
  const auto mp = params_with(0.6, {0.0, 0.0});
  EXPECT_EQ(extra_integral_ms(2, mp)(PhaseState({0.8, 0.3}, {0.0, 0.7})), 0.0);
  const double q2 = 0.64, p1 = 0.5;
  EXPECT_NEAR(extra_integral_ms(2, mp)(PhaseState({0.8, 0.3}, {p1, 0.7})),
              std::sinh(0.6 * q2) / (2 * 0.6 * q2) * std::exp(0.6 * q2) * p1 * p1, 1e-15);
  const auto sw = params_with(0.3, {0.5, 0.0}, 1.0);
  EXPECT_NEAR(extra_integral_ms(2, sw, true)(PhaseState({0.8, 0.3}, {p1, 0.7})),
              std::sinh(0.3 * q2) / (2 * 0.3 * q2) * std::exp(0.3 * q2) * p1 * p1 +
                  0.3 * 0.5 / (2 * std::sinh(0.3 * q2)) * std::exp(0.3 * q2) +
                  1.0 / (2 * 0.3) * std::exp(2 * 0.3 * q2),
              1e-13);
  EXPECT_THROW(extra_integral_ms(2, params_with(0.0, {0, 0}, 1.0), true), std::invalid_argument);
  EXPECT_THROW(extra_integral_ms(1, params_with(0.3, {0})), std::invalid_argument);
  EXPECT_NO_THROW(extra_integral_ms(2, params_with(0.0, {0, 0})));
}

TEST(ExtraIntegral, MaximalSuperintegrabilityRank) {
  SampleRng rng(21);
  for (std::size_t n : {2u, 3u, 4u}) {
    for (bool sw : {false, true}) {
      const auto mp = params_with(0.5, std::vector<double>(n, 0.2), 0.8);
      auto obs = universal_integral_observables(mp);
      obs.push_back(build_deformed(sw ? ms_sw_family(mp) : ms_family(mp)));
      obs.push_back(extra_integral_ms(n, mp, sw));
      EXPECT_EQ(independence_rank(obs, sample_state(n, rng)), static_cast<int>(2 * n - 1));
    }
  }
}

TEST(Classical, AmbientCoordinates) {
  const std::vector<double> q{3, 4};
  EXPECT_EQ(ambient_coordinates(Chart::poincare, 0.0, q), (std::vector<double>{6, 8}));
  EXPECT_EQ(ambient_coordinates(Chart::beltrami, 0.0, q), (std::vector<double>{3, 4}));
  const auto b = ambient_coordinates(Chart::beltrami, 1.0, std::vector<double>{1, 0});
  EXPECT_NEAR(b[0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(b[1], 0.0);
  EXPECT_EQ(ambient_coordinates(Chart::poincare, -0.25, std::vector<double>{1, 1}),
            (std::vector<double>{4, 4}));
  EXPECT_THROW(ambient_coordinates(Chart::beltrami, -1.0, std::vector<double>{1, 1}),
               std::domain_error);
}

TEST(Classical, FlatLimitOfBothCharts) {
  SampleRng rng(4);
  for (auto pot : {ClassicalPotential::free, ClassicalPotential::sw, ClassicalPotential::kc}) {
    // Poincare potentials are written in the ambient radius |x| = 2|q|.
    ClassicalSystem p{Chart::poincare, 0.0, pot, 0.9, 1.1, {0.3, 0.0, 0.5}, {}};
    ClassicalSystem b = p;
    b.chart = Chart::beltrami;
    b.omega = 2 * p.omega;
    b.k = p.k / 2;
    const auto hp = build_classical(p).hamiltonian, hb = build_classical(b).hamiltonian;
    for (int s = 0; s < 10; ++s) {
      const auto x = sample_state(3, rng);
      EXPECT_NEAR(hp(x), hb(x), 1e-13);
    }
  }
  ClassicalSystem free{Chart::beltrami, 0.0, ClassicalPotential::free, 0, 0, {0.0, 0.0}, {}};
  EXPECT_EQ(build_classical(free).hamiltonian(PhaseState({0.4, 1.0}, {3.0, 4.0})), 12.5);
}

TEST(Classical, ChartExpressions) {
  // Direct transcription of the explicit Hamiltonians.
  const PhaseState x({0.5, 0.7, 0.3}, {0.2, -0.6, 0.9});
  const std::vector<double> b{0.4, 0.0, 0.8};
  const double kappa = 0.35, w = 0.6, k = 1.7;
  double q2 = 0, p2 = 0, qp = 0, cp = 0, cb = 0;
  const auto xp = ambient_coordinates(Chart::poincare, kappa, x.q);
  const auto xb = ambient_coordinates(Chart::beltrami, kappa, x.q);
  for (std::size_t i = 0; i < 3; ++i) {
    q2 += x.q[i] * x.q[i];
    p2 += x.p[i] * x.p[i];
    qp += x.q[i] * x.p[i];
    cp += 2 * b[i] / (xp[i] * xp[i]);
    cb += b[i] / (2 * xb[i] * xb[i]);
  }
  const double tp = 0.5 * std::pow(1 + kappa * q2, 2) * p2;
  const double tb = 0.5 * (1 + kappa * q2) * (p2 + kappa * qp * qp);
  const double om = 1 - kappa * q2;
  ClassicalSystem s{Chart::poincare, kappa, ClassicalPotential::sw, w, k, b, {}};
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tp + 4 * w * w * q2 / (om * om) + cp, 1e-13);
  s.potential = ClassicalPotential::kc;
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tp - k * om / (2 * std::sqrt(q2)) + cp, 1e-13);
  s.chart = Chart::beltrami;
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tb - k / std::sqrt(q2) + cb, 1e-13);
  s.potential = ClassicalPotential::sw;
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tb + w * w * q2 + cb, 1e-13);
  s.potential = ClassicalPotential::evans;
  s.evans_v = ScalarFunction{"sin", [](double r) { return std::sin(r); },
                             [](double r) { return std::cos(r); },
                             [](double r) { return -std::sin(r); }};
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tb + std::sin(q2) + cb, 1e-13);
  s.chart = Chart::poincare;
  EXPECT_NEAR(build_classical(s).hamiltonian(x), tp + std::sin(4 * q2 / (om * om)) + cp, 1e-13);
}

TEST(Classical, SwIntegralsCommute) {
  for (Chart chart : {Chart::beltrami, Chart::poincare}) {
    for (double kappa : {0.5, -0.3}) {
      ClassicalSystem s{chart, kappa, ClassicalPotential::sw, 1.0, 0.0, {0.2, 0.3}, {}};
      const auto built = build_classical(s);
      ASSERT_EQ(built.integrals.size(), 2u);
      for (const auto& i : built.integrals) {
        EXPECT_LT(max_bracket(built.hamiltonian, i, 2, 31), 1e-10) << i.name() << " k=" << kappa;
      }
    }
  }
}

TEST(Classical, KcRungeLenzComponents) {
  for (Chart chart : {Chart::beltrami, Chart::poincare}) {
    ClassicalSystem s{chart, -0.4, ClassicalPotential::kc, 0.0, 1.0, {0.0, 0.7, 0.9}, {}};
    const auto built = build_classical(s);
    ASSERT_EQ(built.integrals.size(), 1u);
    EXPECT_EQ(built.integrals[0].name().substr(0, 3), "L_1");
    EXPECT_LT(max_bracket(built.hamiltonian, built.integrals[0], 3, 33), 1e-10);
    EXPECT_TRUE(built.diagnostics.empty());

    // All b_i = 0: every component is conserved.
    s.b = {0.0, 0.0, 0.0};
    const auto lrl = build_classical(s);
    ASSERT_EQ(lrl.integrals.size(), 3u);
    for (const auto& l : lrl.integrals) EXPECT_LT(max_bracket(lrl.hamiltonian, l, 3, 34), 1e-10);

    s.b = {0.5, 0.7, 0.9};
    const auto none = build_classical(s);
    EXPECT_TRUE(none.integrals.empty());
    ASSERT_EQ(none.diagnostics.size(), 1u);
  }
}

TEST(Classical, UniversalCommutation) {
  for (Chart chart : {Chart::beltrami, Chart::poincare}) {
    for (auto pot : {ClassicalPotential::free, ClassicalPotential::sw, ClassicalPotential::kc,
                     ClassicalPotential::evans}) {
      ClassicalSystem s{chart, 0.45, pot, 0.8, 1.2, {0.0, 0.3, 0.6, 0.1}, {}};
      s.evans_v = ScalarFunction{"exp", [](double r) { return std::exp(-r); },
                                 [](double r) { return -std::exp(-r); },
                                 [](double r) { return std::exp(-r); }};
      VerifyOptions opt;
      opt.n_samples = 40;
      opt.hamiltonian = build_classical(s).hamiltonian;
      const auto report = verify_algebra(params_with(0.0, s.b), opt);
      for (const auto& c : report.pairs) {
        if (c.a != opt.hamiltonian->name()) continue;
        EXPECT_TRUE(c.pass) << c.a << " " << c.b << " " << c.max_deviation;
      }
    }
  }
}

TEST(Bridge, SmallDeformationMatchesFlatClassicalSystems) {
  // The deformed SW potential omega J- corresponds to the classical omega_c^2 J-.
  const std::vector<double> b{0.25, 0.0, 0.6};
  SampleRng rng(55);
  const auto mp = params_with(1e-6, b, 0.81, 1.4);
  DeformedFamily sw = type_one_family(mp), kc = type_one_family(mp);
  sw.u_kind = PotentialKind::sw;
  kc.u_kind = PotentialKind::kc;
  const ClassicalSystem csw{Chart::beltrami, 0.0, ClassicalPotential::sw, 0.9, 0.0, b, {}};
  const ClassicalSystem ckc{Chart::beltrami, 0.0, ClassicalPotential::kc, 0.0, 1.4, b, {}};
  // Poincare couplings act on the ambient radius 2|q|.
  const ClassicalSystem psw{Chart::poincare, 0.0, ClassicalPotential::sw, 0.45, 0.0, b, {}};
  const ClassicalSystem pkc{Chart::poincare, 0.0, ClassicalPotential::kc, 0.0, 2.8, b, {}};
  const ClassicalSystem cfree{Chart::beltrami, 0.0, ClassicalPotential::free, 0.0, 0.0, b, {}};
  const std::vector<std::pair<Observable, Observable>> pairs = {
      {build_deformed(type_one_family(mp)), build_classical(cfree).hamiltonian},
      {build_deformed(ms_family(mp)), build_classical(cfree).hamiltonian},
      {build_deformed(sw), build_classical(csw).hamiltonian},
      {build_deformed(kc), build_classical(ckc).hamiltonian},
      {build_deformed(sw), build_classical(psw).hamiltonian},
      {build_deformed(kc), build_classical(pkc).hamiltonian}};
  for (int s = 0; s < 20; ++s) {
    const auto x = sample_state(3, rng);
    for (const auto& [d, c] : pairs) {
      EXPECT_NEAR(d(x), c(x), 1e-5 * std::max(1.0, std::abs(c(x)))) << d.name();
    }
  }
}

TEST(BuildSystem, MonitorsMatchFamily) {
  SystemSpec spec;
  spec.deformed = ms_family(params_with(0.4, {0.1, 0.2, 0.3}));
  auto sys = build_system(spec);
  EXPECT_EQ(sys.n, 3u);
  EXPECT_EQ(sys.monitors.size(), 4u);  // C^(2), C^(3), C_(2), I_z
  EXPECT_EQ(sys.monitors.back().name(), "I_z");
  spec.deformed = type_one_family(params_with(0.4, {0.1, 0.2, 0.3}));
  EXPECT_EQ(build_system(spec).monitors.size(), 3u);
  spec.kind = SystemSpec::Kind::classical;
  spec.classical = ClassicalSystem{Chart::beltrami, 0.3, ClassicalPotential::sw, 1.0, 0.0,
                                   {0.1, 0.2}, {}};
  EXPECT_EQ(build_system(spec).monitors.size(), 3u);  // C^(2), I_1, I_2
}

}  // namespace
}  // namespace curvlab
