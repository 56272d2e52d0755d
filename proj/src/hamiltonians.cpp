#include "curvlab/hamiltonians.hpp"

#include <cmath>
#include <stdexcept>

#include "curvlab/core_algebra.hpp"
#include "curvlab/diffobs.hpp"

namespace curvlab {

double ScalarFunction::derivative(int order, double x) const {
  const std::function<double(double)>* fn = nullptr;
  switch (order) {
    case 0: fn = &f; break;
    case 1: fn = &df; break;
    case 2: fn = &d2f; break;
    default: throw std::logic_error("ScalarFunction: derivative order > 2 requested");
  }
  if (!*fn) throw std::invalid_argument("ScalarFunction '" + name + "': missing derivative");
  return (*fn)(x);
}

void DeformedFamily::validate(std::size_t n) const {
  params.validate(n);
  if (f_kind == ProfileKind::user) {
    if (!f_user || !f_user->f || !f_user->df || !f_user->d2f) {
      throw std::invalid_argument("user profile f requires f, f' and f''");
    }
    if (std::abs(f_user->f(0.0) - 1.0) > kProfileNormTolerance) {
      throw std::invalid_argument("user profile must satisfy f(0) = 1");
    }
  }
  if (u_kind == PotentialKind::user && (!u_user || !u_user->f || !u_user->df || !u_user->d2f)) {
    throw std::invalid_argument("user potential U requires U, U' and U''");
  }
}

DeformedFamily type_one_family(const ModelParams& params) {
  DeformedFamily d;
  d.params = params;
  return d;
}

DeformedFamily ms_family(const ModelParams& params) {
  DeformedFamily d;
  d.params = params;
  d.f_kind = ProfileKind::exp_plus;
  return d;
}

DeformedFamily ms_sw_family(const ModelParams& params) {
  DeformedFamily d = ms_family(params);
  d.u_kind = PotentialKind::sw;
  d.potential_scaled_by_profile = true;
  return d;
}

namespace {

template <typename T>
T sw_potential(const T& jm, double z, double omega) {
  return omega * jm * sinhc(T(z * jm));
}

// -k sqrt(2z/(e^{2zJ}-1)) e^{2zJ} = -k e^{3zJ/2} / sqrt(J sinhc(zJ))
template <typename T>
T kc_potential(const T& jm, double z, double k) {
  if (!(value_of(jm) > 0.0)) throw SingularConfiguration("KC potential at J- = 0");
  const T w = z * jm;
  return -k * exp(1.5 * w) / sqrt(jm * sinhc(w));
}

std::string family_name(const DeformedFamily& d) {
  std::string name = "H[f=" + to_string(d.f_kind) + ",U=" + to_string(d.u_kind);
  if (d.potential_scaled_by_profile) name += ",scaled";
  return name + "]";
}

}  // namespace

double sw_deformed_potential(double jm, double z, double omega) {
  return sw_potential(jm, z, omega);
}

double kc_deformed_potential(double jm, double z, double k) { return kc_potential(jm, z, k); }

Observable build_deformed(const DeformedFamily& spec) {
  const std::size_t n = spec.params.b.size();
  spec.validate(n);
  const DeformedFamily d = spec;
  return Observable(family_name(d), [d](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    const double z = d.params.z;
    const auto t = detail::chain_generators<T>(q, p, d.params.b, z, 0, q.size());
    const T w = z * t.jm;
    T f(1.0);
    switch (d.f_kind) {
      case ProfileKind::identity: break;
      case ProfileKind::exp_plus: f = exp(w); break;
      case ProfileKind::exp_minus: f = exp(-w); break;
      case ProfileKind::user: f = (*d.f_user)(w); break;
    }
    T u(0.0);
    switch (d.u_kind) {
      case PotentialKind::none: break;
      case PotentialKind::sw: u = sw_potential(t.jm, z, d.params.omega); break;
      case PotentialKind::kc: u = kc_potential(t.jm, z, d.params.k); break;
      case PotentialKind::user: u = (*d.u_user)(w); break;
    }
    if (d.potential_scaled_by_profile) return (0.5 * t.jp + u) * f;
    return 0.5 * t.jp * f + u;
  });
}

Observable extra_integral_ms(std::size_t dim, const ModelParams& params, bool sw) {
  if (dim < 2) throw std::invalid_argument("extra_integral_ms: needs at least 2 sites");
  params.validate(dim);
  if (sw && params.z == 0.0) {
    throw std::invalid_argument("extra_integral_ms: the SW variant is undefined at z = 0");
  }
  const double z = params.z, b1 = params.b[0], omega = params.omega;
  return Observable(sw ? "I_z[SW]" : "I_z", [z, b1, omega, sw](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    detail::check_site(value_of(q[0]), b1, 0);
    const T q2 = q[0] * q[0];
    const T s = sinc_hyp(z, q2);
    const T e = exp(z * q2);
    T v = 0.5 * s * e * p[0] * p[0];
    if (b1 != 0.0) v += 0.5 * b1 * e / (q2 * s);
    if (sw) v += omega / (2.0 * z) * e * e;
    return v;
  });
}

std::vector<double> ambient_coordinates(Chart chart, double kappa, std::span<const double> q) {
  double q2 = 0.0;
  for (double v : q) q2 += v * v;
  const double d = 1.0 + kappa * q2;
  std::vector<double> x(q.size());
  if (chart == Chart::poincare) {
    if (d == 0.0) throw std::domain_error("Poincare chart: 1 + kappa q^2 = 0");
    for (std::size_t i = 0; i < q.size(); ++i) x[i] = 2.0 * q[i] / d;
  } else {
    if (!(d > 0.0)) throw std::domain_error("Beltrami chart: 1 + kappa q^2 <= 0");
    const double r = std::sqrt(d);
    for (std::size_t i = 0; i < q.size(); ++i) x[i] = q[i] / r;
  }
  return x;
}

namespace {

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void check_radial(const T& q2) {
  if (!(value_of(q2) > 0.0)) throw SingularConfiguration("KC potential at q = 0");
}

template <typename T>
void check_poincare(const T& one_minus) {
  if (value_of(one_minus) == 0.0) throw SingularConfiguration("Poincare chart: 1 - kappa q^2 = 0");
}

// (1 - kappa q^2) p_i + 2 kappa (q.p) q_i in Poincare, p_i + kappa (q.p) q_i in Beltrami.
template <typename T>
T chart_momentum(Chart chart, double kappa, std::span<const T> q, std::span<const T> p,
                 const T& q2, const T& qp, std::size_t i) {
  if (chart == Chart::poincare) return p[i] * (1.0 - kappa * q2) + 2.0 * kappa * qp * q[i];
  return p[i] + kappa * qp * q[i];
}

Observable sw_integral(const ClassicalSystem& s, std::size_t i) {
  const Chart chart = s.chart;
  const double kappa = s.kappa, w2 = s.omega * s.omega, bi = s.b[i];
  const std::string name = std::string("I_") + std::to_string(i + 1) +
                           (chart == Chart::poincare ? "^P" : "^B");
  return Observable(name, [chart, kappa, w2, bi, i](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    detail::check_site(value_of(q[i]), bi, i);
    const T q2 = dot(q, q), qp = dot(q, p);
    const T m = chart_momentum(chart, kappa, q, p, q2, qp, i);
    const T qi2 = q[i] * q[i];
    if (chart == Chart::poincare) {
      const T om = 1.0 - kappa * q2;
      check_poincare(om);
      T v = m * m + 8.0 * w2 * qi2 / (om * om);
      if (bi != 0.0) v += bi * om * om / qi2;
      return v;
    }
    T v = m * m + 2.0 * w2 * qi2;
    if (bi != 0.0) v += bi / qi2;
    return v;
  });
}

Observable kc_integral(const ClassicalSystem& s, std::size_t i) {
  const Chart chart = s.chart;
  const double kappa = s.kappa, k = s.k;
  const std::vector<double> b = s.b;
  const std::string name = std::string("L_") + std::to_string(i + 1) +
                           (chart == Chart::poincare ? "^P" : "^B");
  return Observable(name, [chart, kappa, k, b, i](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    const T q2 = dot(q, q), qp = dot(q, p);
    check_radial(q2);
    const T om = 1.0 - kappa * q2;
    T v(0.0);
    for (std::size_t l = 0; l < q.size(); ++l) {
      v += chart_momentum(chart, kappa, q, p, q2, qp, l) * (q[l] * p[i] - q[i] * p[l]);
    }
    const T r = sqrt(q2);
    v += chart == Chart::poincare ? k * q[i] / (2.0 * r) : k * q[i] / r;
    for (std::size_t l = 0; l < q.size(); ++l) {
      if (l == i || b[l] == 0.0) continue;
      detail::check_site(value_of(q[l]), b[l], l);
      const T c = b[l] * q[i] / (q[l] * q[l]);
      v -= chart == Chart::poincare ? c * om : c;
    }
    return v;
  });
}

}  // namespace

ClassicalBuild build_classical(const ClassicalSystem& spec) {
  const std::size_t n = spec.b.size();
  if (n == 0) throw std::invalid_argument("build_classical: b must have one entry per site");
  if (!std::isfinite(spec.kappa)) throw std::invalid_argument("build_classical: kappa not finite");
  if (spec.potential == ClassicalPotential::evans &&
      (!spec.evans_v || !spec.evans_v->f || !spec.evans_v->df || !spec.evans_v->d2f)) {
    throw std::invalid_argument("build_classical: Evans system requires V, V' and V''");
  }
  const ClassicalSystem s = spec;
  const std::string name = "H^" + std::string(s.chart == Chart::poincare ? "P" : "B") + "[" +
                           to_string(s.potential) + "]";
  ClassicalBuild out;
  out.hamiltonian = Observable(name, [s](auto q, auto p) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    const auto t = detail::chain_generators<T>(q, p, s.b, 0.0, 0, q.size());
    const double kappa = s.kappa;
    const T d = 1.0 + kappa * t.jm;
    const bool poincare = s.chart == Chart::poincare;
    T h = poincare ? 0.5 * d * d * t.jp : 0.5 * d * (t.jp + kappa * t.j3 * t.j3);
    auto poincare_r2 = [&] {
      const T om = 1.0 - kappa * t.jm;
      check_poincare(om);
      return 4.0 * t.jm / (om * om);
    };
    switch (s.potential) {
      case ClassicalPotential::free: break;
      case ClassicalPotential::evans:
        h += (*s.evans_v)(poincare ? poincare_r2() : t.jm);
        break;
      case ClassicalPotential::sw:
        h += s.omega * s.omega * (poincare ? poincare_r2() : t.jm);
        break;
      case ClassicalPotential::kc:
        check_radial(t.jm);
        h -= poincare ? s.k * (1.0 - kappa * t.jm) / (2.0 * sqrt(t.jm)) : s.k / sqrt(t.jm);
        break;
    }
    return h;
  });

  if (s.potential == ClassicalPotential::sw) {
    for (std::size_t i = 0; i < n; ++i) out.integrals.push_back(sw_integral(s, i));
  } else if (s.potential == ClassicalPotential::kc) {
    for (std::size_t i = 0; i < n; ++i) {
      if (s.b[i] == 0.0) out.integrals.push_back(kc_integral(s, i));
    }
    if (out.integrals.empty()) {
      out.diagnostics.push_back(
          "KC: no b_i = 0, so no Laplace-Runge-Lenz component is a constant of the motion; "
          "the system is only quasi-maximally superintegrable");
    }
  }
  return out;
}

BuiltSystem build_system(const SystemSpec& spec) {
  BuiltSystem out;
  if (spec.kind == SystemSpec::Kind::deformed) {
    const auto& d = spec.deformed;
    out.n = d.params.b.size();
    out.hamiltonian = build_deformed(d);
    out.monitors = universal_integral_observables(d.params);
    const bool ms = d.f_kind == ProfileKind::exp_plus;
    if (out.n >= 2 && ms && d.u_kind == PotentialKind::none) {
      out.monitors.push_back(extra_integral_ms(out.n, d.params, false));
    } else if (out.n >= 2 && ms && d.u_kind == PotentialKind::sw && d.potential_scaled_by_profile &&
               d.params.z != 0.0) {
      out.monitors.push_back(extra_integral_ms(out.n, d.params, true));
    }
  } else {
    const auto& c = spec.classical;
    out.n = c.b.size();
    auto built = build_classical(c);
    out.hamiltonian = built.hamiltonian;
    ModelParams flat;
    flat.b = c.b;
    out.monitors = universal_integral_observables(flat);
    for (auto& i : built.integrals) out.monitors.push_back(std::move(i));
  }
  return out;
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::identity: return "identity";
    case ProfileKind::exp_plus: return "exp_plus";
    case ProfileKind::exp_minus: return "exp_minus";
    case ProfileKind::user: return "user";
  }
  return "?";
}

std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::none: return "none";
    case PotentialKind::sw: return "sw";
    case PotentialKind::kc: return "kc";
    case PotentialKind::user: return "user";
  }
  return "?";
}

std::string to_string(Chart c) { return c == Chart::poincare ? "poincare" : "beltrami"; }

std::string to_string(ClassicalPotential p) {
  switch (p) {
    case ClassicalPotential::free: return "free";
    case ClassicalPotential::evans: return "evans";
    case ClassicalPotential::sw: return "sw";
    case ClassicalPotential::kc: return "kc";
  }
  return "?";
}

}  // namespace curvlab
