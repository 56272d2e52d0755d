#include "curvlab/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace curvlab {

namespace {

using Vec = std::vector<double>;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Hamiltonian vector field J grad H in packed ordering.
Vec vector_field(const Observable& h, const Vec& x) {
  const std::size_t n = x.size() / 2;
  const Vec g = h.gradient(x);
  Vec f(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = g[n + i];
    f[n + i] = -g[i];
  }
  return f;
}

bool all_finite(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool near_singular(const Vec& x, const std::vector<double>& b) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] != 0.0 && std::abs(x[i]) < kSingularityGuard) return true;
  }
  return false;
}

struct StepFailure {
  FlowStatus status;
  std::string message;
};

class Stepper {
 public:
  Stepper(const Observable& h, const IntegratorSpec& spec) : h_(h), spec_(spec) {}

  // Midpoint y solves y = x + (dt/2) J grad H(y); the new state is 2y - x.
  Vec midpoint(const Vec& x, double dt, StepStats& stats) {
    const std::size_t m = x.size(), n = m / 2;
    Vec y = x;
    const Vec f0 = vector_field(h_, x);
    for (std::size_t i = 0; i < m; ++i) y[i] += 0.5 * dt * f0[i];
    Eigen::VectorXd r(m);
    for (int it = 1; it <= spec_.max_newton_iters; ++it) {
      const Vec f = vector_field(h_, y);
      for (std::size_t i = 0; i < m; ++i) r(static_cast<Eigen::Index>(i)) = y[i] - x[i] - 0.5 * dt * f[i];
      const Eigen::MatrixXd hess = h_.hessian(y);
      Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      // J Hess: rows 0..n-1 take the p-rows of Hess, rows n.. take minus the q-rows.
      jac.topRows(static_cast<Eigen::Index>(n)) -= 0.5 * dt * hess.bottomRows(static_cast<Eigen::Index>(n));
      jac.bottomRows(static_cast<Eigen::Index>(n)) += 0.5 * dt * hess.topRows(static_cast<Eigen::Index>(n));
      const Eigen::VectorXd delta = jac.partialPivLu().solve(r);
      double scale = 1.0, step = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        y[i] -= delta(static_cast<Eigen::Index>(i));
        scale = std::max(scale, std::abs(y[i]));
        step = std::max(step, std::abs(delta(static_cast<Eigen::Index>(i))));
      }
      if (!all_finite(y)) throw StepFailure{FlowStatus::non_finite, "non-finite Newton iterate"};
      if (step <= spec_.newton_tol * scale) {
        stats.newton_iterations += static_cast<std::size_t>(it);
        stats.max_newton_iterations = std::max(stats.max_newton_iterations, it);
        Vec out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = 2.0 * y[i] - x[i];
        return out;
      }
    }
    throw StepFailure{FlowStatus::newton_failure,
                      "Newton iteration did not converge in " + std::to_string(spec_.max_newton_iters) +
                          " iterations"};
  }

  Vec euler(const Vec& x, double dt) {
    const Vec f = vector_field(h_, x);
    Vec out = x;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += dt * f[i];
    return out;
  }

  // Dormand-Prince 5(4). Returns the 5th-order solution and the error norm.
  std::pair<Vec, double> dopri(const Vec& x, double dt) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    const std::size_t m = x.size();
    auto comb = [&](std::initializer_list<std::pair<double, const Vec*>> terms) {
      Vec y = x;
      for (const auto& [c, k] : terms) {
        for (std::size_t i = 0; i < m; ++i) y[i] += dt * c * (*k)[i];
      }
      return y;
    };
    const Vec k1 = vector_field(h_, x);
    const Vec k2 = vector_field(h_, comb({{a21, &k1}}));
    const Vec k3 = vector_field(h_, comb({{a31, &k1}, {a32, &k2}}));
    const Vec k4 = vector_field(h_, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec k5 = vector_field(h_, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec k6 = vector_field(h_, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec y = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec k7 = vector_field(h_, y);
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = spec_.atol + spec_.rtol * std::max(std::abs(x[i]), std::abs(y[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    return {y, err};
  }

 private:
  const Observable& h_;
  const IntegratorSpec& spec_;
};

}  // namespace

void IntegratorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrator: dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("integrator: t_end must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("integrator: tolerances must be positive");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("integrator: newton_tol must be positive");
  if (max_newton_iters < 1) throw std::invalid_argument("integrator: max_newton_iters must be >= 1");
  if (max_steps == 0) throw std::invalid_argument("integrator: max_steps must be positive");
}

Trajectory hamilton_flow(const Observable& h, const PhaseState& x0, const IntegratorSpec& spec,
                         const std::vector<Observable>& monitors, const std::vector<double>& b) {
  spec.validate();
  if (x0.q.size() != x0.p.size() || x0.q.empty()) {
    throw std::invalid_argument("hamilton_flow: inconsistent initial state");
  }
  if (!b.empty() && b.size() != x0.dim()) throw std::invalid_argument("hamilton_flow: b has wrong length");
  Vec x = x0.packed();
  if (!all_finite(x)) throw std::invalid_argument("hamilton_flow: non-finite initial state");
  if (near_singular(x, b)) {
    throw SingularConfiguration("hamilton_flow: initial q_i within 1e-8 of 0 with b_i != 0");
  }

  Trajectory traj;
  std::vector<const Observable*> obs{&h};
  for (const auto& m : monitors) obs.push_back(&m);
  for (const auto* o : obs) traj.names.push_back(o->name());
  traj.values.resize(obs.size());

  auto record = [&](double t, const Vec& state) {
    Vec vals(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) vals[k] = obs[k]->value(state);
    if (!all_finite(vals)) return false;
    traj.times.push_back(t);
    traj.states.push_back(PhaseState::unpack(state));
    for (std::size_t k = 0; k < obs.size(); ++k) traj.values[k].push_back(vals[k]);
    return true;
  };
  if (!record(0.0, x)) throw SingularConfiguration("hamilton_flow: monitors not finite at x0");

  Stepper stepper(h, spec);
  double t = 0.0;
  double dt = spec.dt;
  double err_prev = 1.0;
  const double eps_t = 1e-12 * spec.t_end;
  StepStats& st = traj.stats;
  st.min_dt = INFINITY;
  try {
    while (t < spec.t_end - eps_t) {
      if (st.accepted >= spec.max_steps) {
        throw StepFailure{FlowStatus::step_limit, "max_steps reached at t = " + fmt17(t)};
      }
      const double h_step = std::min(dt, spec.t_end - t);
      Vec next;
      try {
        switch (spec.method) {
          case Method::implicit_midpoint:
            next = stepper.midpoint(x, h_step, st);
            break;
          case Method::explicit_euler:
            next = stepper.euler(x, h_step);
            break;
          case Method::rk_adaptive: {
            auto [y, err] = stepper.dopri(x, h_step);
            if (!std::isfinite(err)) err = 1e10;
            // PI controller, exponents 0.7/5 and 0.4/5.
            double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.14) * std::pow(err_prev, 0.08);
            fac = std::clamp(fac, 0.2, 5.0);
            if (err > 1.0) {
              ++st.rejected;
              dt = h_step * std::min(1.0, fac);
              if (dt < 1e-14 * std::max(1.0, spec.t_end)) {
                throw StepFailure{FlowStatus::step_limit, "step size underflow at t = " + fmt17(t)};
              }
              continue;
            }
            err_prev = std::max(err, 1e-4);
            next = std::move(y);
            dt = h_step * fac;
            break;
          }
        }
      } catch (const SingularConfiguration& e) {
        throw StepFailure{FlowStatus::singular, e.what()};
      } catch (const std::domain_error& e) {
        throw StepFailure{FlowStatus::singular, e.what()};
      }
      if (!all_finite(next)) throw StepFailure{FlowStatus::non_finite, "non-finite state at t = " + fmt17(t)};
      if (near_singular(next, b)) {
        throw StepFailure{FlowStatus::singular,
                          "q_i within 1e-8 of 0 with b_i != 0 after t = " + fmt17(t)};
      }
      const double t_next = (spec.t_end - (t + h_step) <= eps_t) ? spec.t_end : t + h_step;
      if (!record(t_next, next)) {
        throw StepFailure{FlowStatus::non_finite, "non-finite monitor after t = " + fmt17(t)};
      }
      ++st.accepted;
      st.min_dt = std::min(st.min_dt, h_step);
      st.max_dt = std::max(st.max_dt, h_step);
      x = std::move(next);
      t = t_next;
    }
  } catch (const StepFailure& f) {
    traj.status = f.status;
    traj.message = f.message;
  } catch (const std::domain_error& e) {
    traj.status = FlowStatus::singular;
    traj.message = e.what();
  }
  if (st.accepted == 0) st.min_dt = 0.0;
  return traj;
}

Trajectory simulate(const SystemSpec& system, const PhaseState& x0, const IntegratorSpec& spec) {
  const BuiltSystem built = build_system(system);
  if (x0.dim() != built.n) throw std::invalid_argument("simulate: initial state has wrong dimension");
  const std::vector<double>& b =
      system.kind == SystemSpec::Kind::deformed ? system.deformed.params.b : system.classical.b;
  return hamilton_flow(built.hamiltonian, x0, spec, built.monitors, b);
}

double DriftReport::max_drift() const {
  double m = 0.0;
  for (const auto& d : invariants) m = std::max(m, d.max_drift);
  return m;
}

DriftReport drift_report(const Trajectory& traj) {
  if (traj.times.empty()) throw std::invalid_argument("drift_report: empty trajectory");
  DriftReport r;
  r.status = traj.status;
  r.message = traj.message;
  r.t_final = traj.times.back();
  r.stats = traj.stats;
  for (std::size_t k = 0; k < traj.values.size(); ++k) {
    InvariantDrift d;
    d.name = traj.names[k];
    d.initial = traj.values[k].front();
    const double scale = std::max(1.0, std::abs(d.initial));
    for (double v : traj.values[k]) d.max_drift = std::max(d.max_drift, std::abs(v - d.initial) / scale);
    r.invariants.push_back(std::move(d));
  }
  return r;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().dim();
  os << 't';
  for (std::size_t i = 0; i < n; ++i) os << ",q" << i + 1;
  for (std::size_t i = 0; i < n; ++i) os << ",p" << i + 1;
  for (std::size_t k = 0; k < traj.names.size(); ++k) os << ',' << (k == 0 ? std::string("H") : traj.names[k]);
  os << '\n';
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    os << fmt17(traj.times[s]);
    for (double v : traj.states[s].q) os << ',' << fmt17(v);
    for (double v : traj.states[s].p) os << ',' << fmt17(v);
    for (const auto& series : traj.values) os << ',' << fmt17(series[s]);
    os << '\n';
  }
  return os.str();
}

void to_json(nlohmann::json& j, const StepStats& s) {
  j = nlohmann::json{{"accepted", s.accepted},
                     {"rejected", s.rejected},
                     {"newton_iterations", s.newton_iterations},
                     {"max_newton_iterations", s.max_newton_iterations},
                     {"min_dt", s.min_dt},
                     {"max_dt", s.max_dt}};
}

void to_json(nlohmann::json& j, const InvariantDrift& d) {
  j = nlohmann::json{{"name", d.name}, {"initial", d.initial}, {"max_drift", d.max_drift}};
}

void to_json(nlohmann::json& j, const DriftReport& r) {
  j = nlohmann::json{{"status", to_string(r.status)},
                     {"message", r.message},
                     {"t_final", r.t_final},
                     {"max_drift", r.max_drift()},
                     {"invariants", r.invariants},
                     {"steps", r.stats}};
}

std::string to_string(Method m) {
  switch (m) {
    case Method::implicit_midpoint: return "implicit_midpoint";
    case Method::rk_adaptive: return "rk_adaptive";
    case Method::explicit_euler: return "explicit_euler";
  }
  return "?";
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::singular: return "singular";
    case FlowStatus::newton_failure: return "newton_failure";
    case FlowStatus::step_limit: return "step_limit";
    case FlowStatus::non_finite: return "non_finite";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<SweepCell> SweepGrid::cells() const {
  auto axis = [](const auto& v) { return std::max<std::size_t>(1, v.size()); };
  const std::size_t sizes[] = {axis(z), axis(kappa2), axis(kappa), axis(omega), axis(k), axis(b),
                               axis(initial_states)};
  std::size_t total = 1;
  for (std::size_t s : sizes) total *= s;
  std::vector<SweepCell> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t pick[7];
    std::size_t r = idx;
    for (int a = 6; a >= 0; --a) {
      pick[a] = r % sizes[a];
      r /= sizes[a];
    }
    SweepCell c{base, x0, nlohmann::json::object()};
    auto& d = c.system.deformed.params;
    auto& cl = c.system.classical;
    const bool deformed = c.system.kind == SystemSpec::Kind::deformed;
    if (!z.empty()) {
      d.z = z[pick[0]];
      c.label["z"] = d.z;
    }
    if (!kappa2.empty()) {
      d.kappa2 = kappa2[pick[1]];
      c.label["kappa2"] = d.kappa2;
    }
    if (!kappa.empty()) {
      cl.kappa = kappa[pick[2]];
      c.label["kappa"] = cl.kappa;
    }
    if (!omega.empty()) {
      (deformed ? d.omega : cl.omega) = omega[pick[3]];
      c.label["omega"] = omega[pick[3]];
    }
    if (!k.empty()) {
      (deformed ? d.k : cl.k) = k[pick[4]];
      c.label["k"] = k[pick[4]];
    }
    if (!b.empty()) {
      (deformed ? d.b : cl.b) = b[pick[5]];
      c.label["b"] = b[pick[5]];
    }
    if (!initial_states.empty()) {
      c.x0 = initial_states[pick[6]];
      c.label["x0"] = pick[6];
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("CURVLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepResult> sweep(const std::vector<SweepCell>& cells, const IntegratorSpec& spec,
                               std::size_t workers) {
  spec.validate();
  std::vector<SweepResult> results(cells.size());
  if (workers == 0) workers = default_workers();
  workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepResult& r = results[i];
      r.index = i;
      r.label = cells[i].label;
      try {
        r.report = drift_report(simulate(cells[i].system, cells[i].x0, spec));
        r.ok = r.report.status == FlowStatus::completed;
        if (!r.ok) r.error = to_string(r.report.status) + ": " + r.report.message;
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = nlohmann::json{{"index", r.index}, {"label", r.label}, {"ok", r.ok}};
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.report.invariants.empty() || r.ok) j["drift"] = r.report;
}

}  // namespace curvlab
