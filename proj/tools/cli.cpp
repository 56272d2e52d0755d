#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "curvlab/core_algebra.hpp"
#include "curvlab/diffobs.hpp"
#include "curvlab/dynamics.hpp"
#include "curvlab/geometry.hpp"
#include "curvlab/hamiltonians.hpp"

namespace curvlab::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  json config;
  std::uint64_t seed = 1;
  fs::path out_dir = ".";
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::ostream& log() const { return *out; }
};

// ---------------------------------------------------------------------------
// Config access

void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown key '" + key_path + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key_path);
    } else {
      slot = it.value();
    }
  }
}

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path + ": must be finite");
  return d;
}

double positive(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (!(d > 0.0)) throw ConfigError(path + ": must be positive");
  return d;
}

std::uint64_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(path + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

bool flag(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename E>
E choice(const json& v, const std::string& path, std::initializer_list<std::pair<const char*, E>> opts) {
  const std::string s = text(v, path);
  std::string names;
  for (const auto& [name, value] : opts) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(path + ": '" + s + "' is not one of " + names);
}

PhaseState state_from(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path + ": expected an object with q and p");
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it.key() != "q" && it.key() != "p") throw ConfigError("unknown key '" + path + "." + it.key() + "'");
  }
  if (!v.contains("q") || !v.contains("p")) throw ConfigError(path + ": requires q and p");
  auto q = numbers(v.at("q"), path + ".q");
  auto p = numbers(v.at("p"), path + ".p");
  if (q.size() != n || p.size() != n) {
    throw ConfigError(path + ": q and p must have length " + std::to_string(n));
  }
  return PhaseState(std::move(q), std::move(p));
}

json state_json(const PhaseState& x) { return {{"q", x.q}, {"p", x.p}}; }

// ---------------------------------------------------------------------------
// Typed sections

struct SystemConfig {
  SystemSpec spec;
  std::size_t n = 0;
  double z = 0.0;
  double kappa2 = 1.0;
  bool classical = false;
};

SystemConfig read_system(const json& cfg) {
  const json& s = cfg.at("system");
  const std::string sec = "system";
  SystemConfig out;
  out.n = count(s.at("n"), where(sec, "n"));
  if (out.n == 0) throw ConfigError("system.n: must be at least 1");
  std::vector<double> b(out.n, 0.0);
  if (!s.at("b").is_null()) {
    b = numbers(s.at("b"), where(sec, "b"));
    if (b.size() != out.n) throw ConfigError("system.b: must have length system.n");
  }
  out.z = number(s.at("z"), where(sec, "z"));
  out.kappa2 = number(s.at("kappa2"), where(sec, "kappa2"));
  const std::string kind = text(s.at("kind"), where(sec, "kind"));
  if (kind == "deformed") {
    auto& d = out.spec.deformed;
    out.spec.kind = SystemSpec::Kind::deformed;
    d.f_kind = choice<ProfileKind>(s.at("profile"), where(sec, "profile"),
                                   {{"identity", ProfileKind::identity},
                                    {"exp_plus", ProfileKind::exp_plus},
                                    {"exp_minus", ProfileKind::exp_minus}});
    d.u_kind = choice<PotentialKind>(
        s.at("potential"), where(sec, "potential"),
        {{"none", PotentialKind::none}, {"sw", PotentialKind::sw}, {"kc", PotentialKind::kc}});
    d.potential_scaled_by_profile = flag(s.at("scaled_potential"), where(sec, "scaled_potential"));
    d.params.z = out.z;
    d.params.b = b;
    d.params.kappa2 = out.kappa2;
    d.params.omega = number(s.at("omega"), where(sec, "omega"));
    d.params.k = number(s.at("k"), where(sec, "k"));
  } else if (kind == "classical") {
    auto& c = out.spec.classical;
    out.spec.kind = SystemSpec::Kind::classical;
    out.classical = true;
    c.chart = choice<Chart>(s.at("chart"), where(sec, "chart"),
                            {{"beltrami", Chart::beltrami}, {"poincare", Chart::poincare}});
    c.kappa = number(s.at("kappa"), where(sec, "kappa"));
    c.potential = choice<ClassicalPotential>(s.at("potential"), where(sec, "potential"),
                                             {{"none", ClassicalPotential::free},
                                              {"sw", ClassicalPotential::sw},
                                              {"kc", ClassicalPotential::kc}});
    c.omega = number(s.at("omega"), where(sec, "omega"));
    c.k = number(s.at("k"), where(sec, "k"));
    c.b = b;
  } else {
    throw ConfigError("system.kind: '" + kind + "' is not one of deformed, classical");
  }
  try {
    if (!out.classical) {
      out.spec.deformed.validate(out.n);
      out.spec.deformed.params.validate(out.n);
    }
    (void)build_system(out.spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  return out;
}

json describe(const SystemConfig& s) {
  json j;
  j["n"] = s.n;
  if (s.classical) {
    const auto& c = s.spec.classical;
    j["kind"] = "classical";
    j["chart"] = to_string(c.chart);
    j["kappa"] = c.kappa;
    j["potential"] = to_string(c.potential);
    j["omega"] = c.omega;
    j["k"] = c.k;
    j["b"] = c.b;
  } else {
    const auto& d = s.spec.deformed;
    j["kind"] = "deformed";
    j["profile"] = to_string(d.f_kind);
    j["potential"] = to_string(d.u_kind);
    j["scaled_potential"] = d.potential_scaled_by_profile;
    j["z"] = d.params.z;
    j["kappa2"] = d.params.kappa2;
    j["omega"] = d.params.omega;
    j["k"] = d.params.k;
    j["b"] = d.params.b;
  }
  return j;
}

IntegratorSpec read_integrator(const json& cfg) {
  const json& s = cfg.at("integrator");
  const std::string sec = "integrator";
  IntegratorSpec spec;
  spec.method = choice<Method>(s.at("method"), where(sec, "method"),
                               {{"implicit_midpoint", Method::implicit_midpoint},
                                {"rk_adaptive", Method::rk_adaptive},
                                {"explicit_euler", Method::explicit_euler}});
  spec.dt = positive(s.at("dt"), where(sec, "dt"));
  spec.t_end = positive(s.at("t_end"), where(sec, "t_end"));
  spec.rtol = positive(s.at("rtol"), where(sec, "rtol"));
  spec.atol = positive(s.at("atol"), where(sec, "atol"));
  spec.max_steps = count(s.at("max_steps"), where(sec, "max_steps"));
  spec.newton_tol = positive(s.at("newton_tol"), where(sec, "newton_tol"));
  spec.max_newton_iters = static_cast<int>(count(s.at("max_newton_iters"), where(sec, "max_newton_iters")));
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  return spec;
}

json describe(const IntegratorSpec& s) {
  return {{"method", to_string(s.method)}, {"dt", s.dt},     {"t_end", s.t_end},
          {"rtol", s.rtol},                {"atol", s.atol}, {"newton_tol", s.newton_tol}};
}

PhaseState initial_state(const Context& ctx, std::size_t n) {
  const json& v = ctx.config.at("initial_state");
  if (!v.is_null()) return state_from(v, n, "initial_state");
  SampleRng rng(ctx.seed);
  return sample_state(n, rng);
}

// ---------------------------------------------------------------------------
// Output

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path output_path(const Context& ctx, const std::string& key) {
  const std::string name = text(ctx.config.at("outputs").at(key), "outputs." + key);
  if (name.empty()) throw ConfigError("outputs." + key + ": must not be empty");
  return ctx.out_dir / name;
}

void write_atomic(const fs::path& target, const std::string& data) {
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Commands

int expected_rank(std::size_t n, bool has_extra) {
  if (n == 1) return 1;
  return static_cast<int>(2 * n - 2) + (has_extra ? 1 : 0);
}

int cmd_verify(const Context& ctx) {
  const SystemConfig sys = read_system(ctx.config);
  const json& v = ctx.config.at("verify");
  const std::size_t samples = count(v.at("samples"), "verify.samples");
  const double tol = positive(v.at("tolerance"), "verify.tolerance");
  const std::size_t rank_states = count(v.at("rank_states"), "verify.rank_states");
  if (samples == 0) throw ConfigError("verify.samples: must be at least 1");

  const BuiltSystem built = build_system(sys.spec);
  ModelParams params;
  if (sys.classical) {
    params.b = sys.spec.classical.b;
  } else {
    params = sys.spec.deformed.params;
  }
  const std::vector<Observable> universal = universal_integral_observables(params);
  const std::vector<Observable> extra(built.monitors.begin() + static_cast<std::ptrdiff_t>(universal.size()),
                                      built.monitors.end());

  VerifyOptions opts;
  opts.n_samples = samples;
  opts.seed = ctx.seed;
  opts.tolerance = tol;
  opts.hamiltonian = built.hamiltonian;
  opts.extra_integrals = extra;
  BracketReport report = verify_algebra(params, opts);

  std::vector<Observable> set = universal;
  set.push_back(built.hamiltonian);
  set.insert(set.end(), extra.begin(), extra.end());
  const int expected = expected_rank(sys.n, !extra.empty());
  SampleRng rng(ctx.seed ^ 0x72616e6bULL);
  for (std::size_t s = 0; s < rank_states; ++s) {
    const PhaseState x = sample_state(sys.n, rng);
    RankCheck rc;
    rc.label = "rank at state " + std::to_string(s);
    rc.rank = independence_rank(set, x);
    rc.expected = expected;
    rc.pass = rc.rank == expected;
    report.ranks.push_back(rc);
  }

  const bool pass = report.all_pass();
  json j = report;
  j["suite"] = sys.classical || sys.z == 0.0 ? "classical" : "deformed";
  j["system"] = describe(sys);
  j["samples"] = samples;
  j["seed"] = ctx.seed;
  j["pass"] = pass;
  write_atomic(output_path(ctx, "verify"), dump(j));
  if (!ctx.quiet) {
    std::size_t failed = 0;
    for (const auto& c : report.pairs) failed += c.pass ? 0 : 1;
    for (const auto& r : report.ranks) failed += r.pass ? 0 : 1;
    ctx.log() << "verify: " << report.pairs.size() << " bracket checks, " << report.ranks.size()
              << " rank checks, " << failed << " failed\n";
  }
  return pass ? kExitOk : kExitCheckFailed;
}

Trajectory thinned(const Trajectory& t, std::size_t stride) {
  if (stride <= 1 || t.times.empty()) return t;
  Trajectory out = t;
  out.times.clear();
  out.states.clear();
  for (auto& v : out.values) v.clear();
  const std::size_t last = t.times.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    if (i % stride != 0 && i != last) continue;
    out.times.push_back(t.times[i]);
    out.states.push_back(t.states[i]);
    for (std::size_t k = 0; k < t.values.size(); ++k) out.values[k].push_back(t.values[k][i]);
  }
  return out;
}

int cmd_simulate(const Context& ctx) {
  const SystemConfig sys = read_system(ctx.config);
  const IntegratorSpec spec = read_integrator(ctx.config);
  const json& s = ctx.config.at("simulate");
  const std::size_t stride = count(s.at("stride"), "simulate.stride");
  if (stride == 0) throw ConfigError("simulate.stride: must be at least 1");
  std::optional<double> threshold;
  if (!s.at("drift_threshold").is_null()) threshold = positive(s.at("drift_threshold"), "simulate.drift_threshold");
  const PhaseState x0 = initial_state(ctx, sys.n);

  Trajectory traj;
  try {
    traj = simulate(sys.spec, x0, spec);
  } catch (const SingularConfiguration& e) {
    json j;
    j["report"] = {{"status", to_string(FlowStatus::singular)}, {"message", e.what()}};
    j["system"] = describe(sys);
    j["integrator"] = describe(spec);
    j["initial_state"] = state_json(x0);
    j["last_state"] = nullptr;
    write_atomic(output_path(ctx, "drift"), dump(j));
    throw;
  }
  const DriftReport report = drift_report(traj);
  write_atomic(output_path(ctx, "trajectory"), trajectory_csv(thinned(traj, stride)));

  const bool completed = traj.status == FlowStatus::completed;
  const bool within = !threshold || report.max_drift() < *threshold;
  json j;
  j["report"] = report;
  j["system"] = describe(sys);
  j["integrator"] = describe(spec);
  j["initial_state"] = state_json(x0);
  j["last_state"] = state_json(traj.last());
  j["last_state"]["t"] = traj.times.back();
  j["drift_threshold"] = threshold ? json(*threshold) : json(nullptr);
  j["within_threshold"] = within;
  write_atomic(output_path(ctx, "drift"), dump(j));
  if (!ctx.quiet) {
    ctx.log() << "simulate: status " << to_string(traj.status) << ", t = " << fmt17(traj.times.back())
              << ", max drift " << fmt17(report.max_drift()) << "\n";
  }
  if (!completed) {
    *ctx.err << "simulate: run aborted (" << to_string(traj.status) << "): " << traj.message << "\n";
    return kExitRuntime;
  }
  return within ? kExitOk : kExitCheckFailed;
}

int cmd_curvature(const Context& ctx) {
  const SystemConfig sys = read_system(ctx.config);
  const json& c = ctx.config.at("curvature");
  if (sys.classical) throw ConfigError("curvature: requires system.kind = deformed");
  CurvatureFamily family;
  switch (sys.spec.deformed.f_kind) {
    case ProfileKind::identity: family = CurvatureFamily::type_one; break;
    case ProfileKind::exp_plus: family = CurvatureFamily::ms; break;
    default: throw ConfigError("curvature: system.profile must be identity or exp_plus");
  }
  if (sys.n < 2) throw ConfigError("curvature: requires system.n >= 2");
  const double lo = number(c.at("lo"), "curvature.lo");
  const double hi = number(c.at("hi"), "curvature.hi");
  const std::size_t points = count(c.at("points"), "curvature.points");
  const DerivativeMode mode = choice<DerivativeMode>(
      c.at("mode"), "curvature.mode",
      {{"automatic", DerivativeMode::automatic}, {"finite_difference", DerivativeMode::finite_difference}});
  if (points == 0) throw ConfigError("curvature.points: must be at least 1");
  if (!(lo <= hi)) throw ConfigError("curvature: requires lo <= hi");
  if (std::pow(static_cast<double>(points), static_cast<double>(sys.n)) > 1e6) {
    throw ConfigError("curvature: grid exceeds 1e6 points");
  }
  const auto rows = curvature_scan(family, sys.n, sys.z, lo, hi, points, mode);
  write_atomic(output_path(ctx, "curvature"), curvature_csv(rows));
  if (!ctx.quiet) {
    double worst = 0.0;
    for (const auto& r : rows) {
      if (std::isfinite(r.closed_form)) worst = std::max(worst, std::abs(r.numeric - r.closed_form));
    }
    ctx.log() << "curvature: " << rows.size() << " rows, max |numeric - closed form| " << fmt17(worst) << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const Context& ctx) {
  const SystemConfig sys = read_system(ctx.config);
  const IntegratorSpec spec = read_integrator(ctx.config);
  const json& s = ctx.config.at("sweep");
  SweepGrid grid;
  grid.base = sys.spec;
  grid.x0 = initial_state(ctx, sys.n);
  grid.z = numbers(s.at("z"), "sweep.z");
  grid.kappa2 = numbers(s.at("kappa2"), "sweep.kappa2");
  grid.kappa = numbers(s.at("kappa"), "sweep.kappa");
  grid.omega = numbers(s.at("omega"), "sweep.omega");
  grid.k = numbers(s.at("k"), "sweep.k");
  if (!s.at("b").is_array()) throw ConfigError("sweep.b: expected an array of arrays");
  for (std::size_t i = 0; i < s.at("b").size(); ++i) {
    auto b = numbers(s.at("b")[i], "sweep.b[" + std::to_string(i) + "]");
    if (b.size() != sys.n) throw ConfigError("sweep.b[" + std::to_string(i) + "]: must have length system.n");
    grid.b.push_back(std::move(b));
  }
  if (!s.at("initial_states").is_array()) throw ConfigError("sweep.initial_states: expected an array");
  for (std::size_t i = 0; i < s.at("initial_states").size(); ++i) {
    grid.initial_states.push_back(
        state_from(s.at("initial_states")[i], sys.n, "sweep.initial_states[" + std::to_string(i) + "]"));
  }
  std::size_t workers = default_workers();
  if (!s.at("workers").is_null()) {
    const std::size_t requested = count(s.at("workers"), "sweep.workers");
    if (requested == 0) throw ConfigError("sweep.workers: must be at least 1");
    workers = std::getenv("CURVLAB_THREADS") ? std::min(requested, workers) : requested;
  }
  const auto cells = grid.cells();
  const auto results = sweep(cells, spec, workers);
  std::size_t failed = 0;
  json cell_json = json::array();
  for (const auto& r : results) {
    failed += r.ok ? 0 : 1;
    cell_json.push_back(r);
  }
  json j;
  j["system"] = describe(sys);
  j["integrator"] = describe(spec);
  j["n_cells"] = results.size();
  j["n_failed"] = failed;
  j["cells"] = std::move(cell_json);
  write_atomic(output_path(ctx, "sweep"), dump(j));
  if (!ctx.quiet) ctx.log() << "sweep: " << results.size() << " cells, " << failed << " failed\n";
  return kExitOk;
}

int cmd_transform(const Context& ctx) {
  const SystemConfig sys = read_system(ctx.config);
  const json& t = ctx.config.at("transform");
  const std::size_t samples = count(t.at("samples"), "transform.samples");
  const double tol = positive(t.at("tolerance"), "transform.tolerance");
  if (sys.classical) throw ConfigError("transform: requires system.kind = deformed");
  if (sys.z == 0.0) throw ConfigError("transform: requires system.z != 0");
  if (!(sys.kappa2 > 0.0)) throw ConfigError("transform: requires system.kappa2 > 0");
  if (sys.n < 2) throw ConfigError("transform: requires system.n >= 2");

  const auto& d = sys.spec.deformed;
  const bool free = d.u_kind == PotentialKind::none &&
                    std::all_of(d.params.b.begin(), d.params.b.end(), [](double b) { return b == 0.0; });
  const bool type_one = free && d.f_kind == ProfileKind::identity;
  const bool ms = free && d.f_kind == ProfileKind::exp_plus;
  const Observable h = build_deformed(d);

  std::vector<PhaseState> states;
  if (!ctx.config.at("initial_state").is_null()) states.push_back(state_from(ctx.config.at("initial_state"), sys.n, "initial_state"));
  SampleRng rng(ctx.seed);
  for (std::size_t i = 0; i < samples; ++i) states.push_back(sample_state(sys.n, rng));

  double worst_roundtrip = 0.0, worst_identity = 0.0;
  json rows = json::array();
  for (const PhaseState& x : states) {
    const PolarState ps = to_polar(x, sys.z, sys.kappa2);
    const PhaseState back = from_polar(ps);
    double rt = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) {
      rt = std::max({rt, std::abs(back.q[i] - x.q[i]), std::abs(back.p[i] - x.p[i])});
    }
    worst_roundtrip = std::max(worst_roundtrip, rt);
    json row;
    row["state"] = state_json(x);
    row["polar"] = {{"coords", ps.coords()}, {"momenta", ps.momenta()}};
    row["roundtrip_error"] = rt;
    json identities = json::object();
    auto record = [&](const std::string& name, double polar, double cart) {
      const double dev = std::abs(polar - cart) / std::max(1.0, std::abs(cart));
      identities[name] = dev;
      worst_identity = std::max(worst_identity, dev);
    };
    if (type_one || ms) {
      const double hv = h(x);
      record("hamiltonian", type_one ? polar_hamiltonian_type_one(ps) : polar_hamiltonian_ms(ps), 2.0 * hv);
      const IntegralSet ints = universal_integrals(x, d.params);
      for (std::size_t m = 2; m <= sys.n; ++m) {
        const double factor = m == sys.n ? 4.0 * sys.kappa2 : 4.0;
        record("left_integral_" + std::to_string(m), polar_left_integral(ps, m), factor * ints.left_at(m));
      }
    }
    row["identities"] = identities;
    rows.push_back(row);
  }
  const bool pass = worst_roundtrip <= tol && worst_identity <= tol;
  json j;
  j["system"] = describe(sys);
  j["tolerance"] = tol;
  j["max_roundtrip_error"] = worst_roundtrip;
  j["max_identity_deviation"] = worst_identity;
  j["identities_checked"] = type_one || ms;
  j["samples"] = rows;
  j["pass"] = pass;
  write_atomic(output_path(ctx, "transform"), dump(j));
  if (!ctx.quiet) {
    ctx.log() << "transform: " << states.size() << " states, max roundtrip error " << fmt17(worst_roundtrip)
              << ", max identity deviation " << fmt17(worst_identity) << "\n";
  }
  return pass ? kExitOk : kExitCheckFailed;
}

json load_config(const std::string& path) {
  json cfg = default_config();
  if (path.empty()) return cfg;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  json user;
  try {
    user = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  overlay(cfg, user, "");
  return cfg;
}

}  // namespace

json default_config() {
  return json{
      {"seed", 1},
      {"system",
       {{"kind", "deformed"},
        {"n", 3},
        {"profile", "identity"},
        {"potential", "none"},
        {"scaled_potential", false},
        {"z", 0.2},
        {"b", nullptr},
        {"kappa2", 1.0},
        {"omega", 0.0},
        {"k", 0.0},
        {"chart", "beltrami"},
        {"kappa", 0.0}}},
      {"initial_state", nullptr},
      {"integrator",
       {{"method", "implicit_midpoint"},
        {"dt", 1e-3},
        {"t_end", 1.0},
        {"rtol", 1e-10},
        {"atol", 1e-12},
        {"max_steps", 100000000},
        {"newton_tol", 1e-12},
        {"max_newton_iters", 25}}},
      {"verify", {{"samples", 200}, {"tolerance", 1e-10}, {"rank_states", 10}}},
      {"simulate", {{"stride", 1}, {"drift_threshold", nullptr}}},
      {"curvature", {{"lo", 0.2}, {"hi", 1.2}, {"points", 20}, {"mode", "automatic"}}},
      {"sweep",
       {{"z", json::array()},
        {"kappa2", json::array()},
        {"kappa", json::array()},
        {"omega", json::array()},
        {"k", json::array()},
        {"b", json::array()},
        {"initial_states", json::array()},
        {"workers", nullptr}}},
      {"transform", {{"samples", 20}, {"tolerance", 1e-10}}},
      {"outputs",
       {{"verify", "verify.json"},
        {"trajectory", "trajectory.csv"},
        {"drift", "drift.json"},
        {"curvature", "curvature.csv"},
        {"sweep", "sweep.json"},
        {"transform", "transform.json"}}},
  };
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"curvlab: deformed coalgebra Hamiltonians, curvature and dynamics"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Seed for sampled states (overrides the config)");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  using Command = int (*)(const Context&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"verify", "Bracket, integral and rank checks", cmd_verify},
      {"simulate", "Integrate a trajectory and report invariant drift", cmd_simulate},
      {"curvature", "Curvature scan over a coordinate grid", cmd_curvature},
      {"sweep", "Parameter sweep of simulations", cmd_sweep},
      {"transform", "Polar coordinate roundtrip diagnostics", cmd_transform},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.quiet = quiet;
  ctx.out_dir = out_dir;
  try {
    ctx.config = load_config(config_path);
    ctx.seed = seed ? *seed : count(ctx.config.at("seed"), "seed");
    const std::string name = app.get_subcommands().front()->get_name();
    for (const auto& [cname, help, fn] : commands) {
      if (name == cname) return fn(ctx);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace curvlab::cli
