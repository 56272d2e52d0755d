#include "curvlab/diffobs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "curvlab/core_algebra.hpp"

namespace curvlab {

SampleRng::SampleRng(std::uint64_t seed) : state_(seed) {}

std::uint64_t SampleRng::next() {
  // splitmix64
  std::uint64_t x = (state_ += 0x9E3779B97F4A7C15ULL);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double SampleRng::uniform(double lo, double hi) {
  const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

PhaseState sample_state(std::size_t n, SampleRng& rng) {
  std::vector<double> q(n), p(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = rng.uniform(kSampleQMin, kSampleQMax);
  for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(-kSamplePMax, kSamplePMax);
  return {std::move(q), std::move(p)};
}

namespace {

template <typename Pick>
Observable generator_observable(std::string name, const ModelParams& params, Pick pick) {
  const std::vector<double> b = params.b;
  const double z = params.z;
  return Observable(std::move(name), [b, z, pick](auto q, auto p) {
    using T = typename decltype(q)::value_type;
    return pick(detail::chain_generators<std::remove_const_t<T>>(q, p, b, z, 0, q.size()));
  });
}

}  // namespace

Observable obs_jminus(const ModelParams& params) {
  return generator_observable("J-", params, [](const auto& t) { return t.jm; });
}

Observable obs_jplus(const ModelParams& params) {
  return generator_observable("J+", params, [](const auto& t) { return t.jp; });
}

Observable obs_j3(const ModelParams& params) {
  return generator_observable("J3", params, [](const auto& t) { return t.j3; });
}

Observable obs_casimir(const ModelParams& params) {
  const double z = params.z;
  return generator_observable("Casimir", params,
                              [z](const auto& t) { return detail::casimir(t, z); });
}

Observable obs_left_integral(const ModelParams& params, std::size_t m) {
  const std::vector<double> b = params.b;
  const double z = params.z;
  if (m < 2 || m > b.size()) throw std::out_of_range("obs_left_integral: m out of range");
  return Observable("C^(" + std::to_string(m) + ")", [b, z, m](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    return detail::chain_integral<T>(q, p, b, z, 0, m);
  });
}

Observable obs_right_integral(const ModelParams& params, std::size_t m) {
  const std::vector<double> b = params.b;
  const double z = params.z;
  const std::size_t n = b.size();
  if (m < 2 || m > n) throw std::out_of_range("obs_right_integral: m out of range");
  return Observable("C_(" + std::to_string(m) + ")", [b, z, m, n](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    return detail::chain_integral<T>(q, p, b, z, n - m, n);
  });
}

std::vector<Observable> universal_integral_observables(const ModelParams& params) {
  const std::size_t n = params.b.size();
  std::vector<Observable> out;
  for (std::size_t m = 2; m <= n; ++m) out.push_back(obs_left_integral(params, m));
  for (std::size_t m = 2; m + 1 <= n; ++m) out.push_back(obs_right_integral(params, m));
  return out;
}

bool BracketReport::all_pass() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& c) { return c.pass; }) &&
         std::all_of(ranks.begin(), ranks.end(), [](const auto& c) { return c.pass; });
}

void to_json(nlohmann::json& j, const BracketCheck& c) {
  j = nlohmann::json{{"a", c.a},
                     {"b", c.b},
                     {"expected", c.expected},
                     {"max_deviation", c.max_deviation},
                     {"max_abs_deviation", c.max_abs_deviation},
                     {"tolerance", c.tolerance},
                     {"verdict", c.pass ? "pass" : "fail"}};
}

void to_json(nlohmann::json& j, const RankCheck& c) {
  j = nlohmann::json{{"label", c.label},
                     {"rank", c.rank},
                     {"expected", c.expected},
                     {"verdict", c.pass ? "pass" : "fail"}};
}

void to_json(nlohmann::json& j, const BracketReport& r) {
  j = nlohmann::json{{"pairs", r.pairs}, {"ranks", r.ranks}, {"all_pass", r.all_pass()}};
}

double bracket_deviation(double value, double expected, double scale) {
  return std::abs(value - expected) / std::max({1.0, std::abs(expected), scale});
}

namespace {

struct PendingCheck {
  std::size_t a;
  std::size_t b;
  std::string expected;
  // Expected bracket value from the generator triple at the state.
  std::function<double(const GeneratorTriple&)> rhs;
  double max_dev = 0.0;
  double max_abs = 0.0;
};

}  // namespace

BracketReport verify_algebra(const ModelParams& params, const VerifyOptions& options) {
  const std::size_t n = params.b.size();
  const double z = params.z;
  params.validate(n);

  std::vector<Observable> obs = {obs_jminus(params), obs_jplus(params), obs_j3(params),
                                 obs_casimir(params)};
  constexpr std::size_t kJm = 0, kJp = 1, kJ3 = 2, kCas = 3;
  const Observable h = options.hamiltonian ? *options.hamiltonian
                                           : (0.5 * obs_jplus(params)).renamed("H=J+/2");
  const std::size_t kH = obs.size();
  obs.push_back(h);

  std::vector<std::size_t> left, right;
  for (std::size_t m = 2; m <= n; ++m) {
    left.push_back(obs.size());
    obs.push_back(obs_left_integral(params, m));
  }
  for (std::size_t m = 2; m <= n; ++m) {
    right.push_back(obs.size());
    obs.push_back(obs_right_integral(params, m));
  }
  std::vector<std::size_t> extra;
  for (const auto& e : options.extra_integrals) {
    extra.push_back(obs.size());
    obs.push_back(e);
  }

  const auto zero = [](const GeneratorTriple&) { return 0.0; };
  std::vector<PendingCheck> checks;
  checks.push_back({kJ3, kJp, "2 J+ cosh(z J-)",
                    [z](const GeneratorTriple& t) { return 2.0 * t.jp * std::cosh(z * t.jm); }});
  checks.push_back({kJ3, kJm, "-2 sinh(z J-)/z", [z](const GeneratorTriple& t) {
                      return -2.0 * t.jm * sinhc(z * t.jm);
                    }});
  checks.push_back({kJm, kJp, "4 J3", [](const GeneratorTriple& t) { return 4.0 * t.j3; }});
  for (std::size_t g : {kJm, kJp, kJ3}) checks.push_back({kCas, g, "0", zero});
  for (const auto* chain : {&left, &right}) {
    for (std::size_t c : *chain) {
      for (std::size_t g : {kJm, kJp, kJ3}) checks.push_back({c, g, "0", zero});
      checks.push_back({kH, c, "0", zero});
    }
    for (std::size_t i = 0; i < chain->size(); ++i) {
      for (std::size_t j = i + 1; j < chain->size(); ++j) {
        checks.push_back({(*chain)[i], (*chain)[j], "0", zero});
      }
    }
  }
  for (std::size_t e : extra) checks.push_back({kH, e, "0", zero});

  SampleRng rng(options.seed);
  std::vector<std::vector<double>> grads(obs.size());
  for (std::size_t s = 0; s < options.n_samples; ++s) {
    const PhaseState x = sample_state(n, rng);
    const auto packed = x.packed();
    for (std::size_t k = 0; k < obs.size(); ++k) grads[k] = obs[k].gradient(packed);
    const GeneratorTriple t = generators(x, params);
    for (auto& c : checks) {
      const double v = poisson_bracket(grads[c.a], grads[c.b]);
      const double e = c.rhs(t);
      const double dev = bracket_deviation(v, e, bracket_scale(grads[c.a], grads[c.b]));
      c.max_dev = std::isfinite(dev) ? std::max(c.max_dev, dev) : INFINITY;
      c.max_abs = std::isfinite(v) ? std::max(c.max_abs, std::abs(v - e)) : INFINITY;
    }
  }

  BracketReport report;
  for (const auto& c : checks) {
    report.pairs.push_back({obs[c.a].name(), obs[c.b].name(), c.expected, c.max_dev, c.max_abs,
                            options.tolerance, c.max_dev < options.tolerance});
  }
  return report;
}

int independence_rank(const std::vector<Observable>& observables, const PhaseState& state) {
  if (observables.empty()) throw std::invalid_argument("independence_rank: empty list");
  const auto packed = state.packed();
  Eigen::MatrixXd jac(observables.size(), packed.size());
  for (std::size_t r = 0; r < observables.size(); ++r) {
    const auto g = observables[r].gradient(packed);
    for (std::size_t c = 0; c < g.size(); ++c) jac(r, c) = g[c];
  }
  if (!jac.allFinite()) throw SingularConfiguration("independence_rank: non-finite Jacobian");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankTolerance * sv(0)) ++rank;
  }
  return rank;
}

}  // namespace curvlab
