#include "curvlab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "curvlab/diffobs.hpp"

namespace curvlab {

namespace {

using Vec = std::vector<double>;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_dim(std::span<const double> q, std::size_t n, const char* what) {
  if (q.size() != n) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

void require_nonzero_z(double z, const char* what) {
  if (z == 0.0) throw std::invalid_argument(std::string(what) + ": requires z != 0");
}

ModelParams free_params(std::size_t dim, double z) {
  ModelParams p;
  p.z = z;
  p.b.assign(dim, 0.0);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricField

std::vector<double> MetricField::coefficients(std::span<const double> q) const {
  require_dim(q, dim_, "MetricField");
  return impl_->f0(q);
}

std::vector<double> MetricField::kinetic(std::span<const double> q) const {
  auto g = coefficients(q);
  for (auto& v : g) v *= 0.5;
  return g;
}

MetricJet MetricField::jet(std::span<const double> q) const {
  require_dim(q, dim_, "MetricField");
  const std::size_t n = dim_;
  MetricJet out;
  out.g = impl_->f0(q);
  out.dg.assign(n, Vec(n, 0.0));
  out.d2g.assign(n, std::vector<Vec>(n, Vec(n, 0.0)));
  std::vector<D2> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = D2(D1(q[i], i == l ? 1.0 : 0.0), D1(i == k ? 1.0 : 0.0, 0.0));
      }
      const auto g = impl_->f2(std::span<const D2>(x));
      for (std::size_t i = 0; i < n; ++i) {
        out.dg[i][l] = g[i].val.eps;
        out.dg[i][k] = g[i].eps.val;
        out.d2g[i][k][l] = g[i].eps.eps;
        out.d2g[i][l][k] = g[i].eps.eps;
      }
    }
  }
  return out;
}

MetricJet MetricField::jet_fd(std::span<const double> q, double h) const {
  require_dim(q, dim_, "MetricField");
  const std::size_t n = dim_;
  auto at = [&](std::size_t k, double hk, std::size_t l, double hl) {
    Vec x(q.begin(), q.end());
    x[k] += hk;
    x[l] += hl;
    return impl_->f0(x);
  };
  auto raw = [&](double s) {
    MetricJet j;
    j.g = impl_->f0(q);
    j.dg.assign(n, Vec(n, 0.0));
    j.d2g.assign(n, std::vector<Vec>(n, Vec(n, 0.0)));
    for (std::size_t k = 0; k < n; ++k) {
      const Vec gp = at(k, s, k, 0.0), gm = at(k, -s, k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        j.dg[i][k] = (gp[i] - gm[i]) / (2.0 * s);
        j.d2g[i][k][k] = (gp[i] - 2.0 * j.g[i] + gm[i]) / (s * s);
      }
      for (std::size_t l = k + 1; l < n; ++l) {
        const Vec pp = at(k, s, l, s), pm = at(k, s, l, -s);
        const Vec mp = at(k, -s, l, s), mm = at(k, -s, l, -s);
        for (std::size_t i = 0; i < n; ++i) {
          const double v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * s * s);
          j.d2g[i][k][l] = v;
          j.d2g[i][l][k] = v;
        }
      }
    }
    return j;
  };
  const MetricJet coarse = raw(h);
  MetricJet fine = raw(0.5 * h);
  auto extrapolate = [](double f, double c) { return (4.0 * f - c) / 3.0; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      fine.dg[i][k] = extrapolate(fine.dg[i][k], coarse.dg[i][k]);
      for (std::size_t l = 0; l < n; ++l) {
        fine.d2g[i][k][l] = extrapolate(fine.d2g[i][k][l], coarse.d2g[i][k][l]);
      }
    }
  }
  return fine;
}

MetricField metric_from_kinetic(const Observable& h, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("metric_from_kinetic: dim must be positive");
  SampleRng rng(0x6d657472ULL);
  for (int s = 0; s < 4; ++s) {
    const PhaseState x = sample_state(dim, rng);
    auto hq = [&](const Vec& p) { return h.eval<double>(x.q, p); };
    Vec zero(dim, 0.0);
    const double v0 = hq(zero);
    std::vector<double> diag(dim);
    double scale = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      Vec e(dim, 0.0);
      e[i] = 1.0;
      diag[i] = hq(e);
      scale = std::max(scale, std::abs(diag[i]));
      Vec e2 = e;
      e2[i] = 2.0;
      if (std::abs(hq(e2) - 4.0 * diag[i]) > 1e-10 * std::max(1.0, std::abs(diag[i]))) {
        throw std::invalid_argument("metric_from_kinetic: " + h.name() +
                                    " is not quadratic in the momenta");
      }
    }
    if (std::abs(v0) > 1e-12 * std::max(1.0, scale)) {
      throw std::invalid_argument("metric_from_kinetic: " + h.name() + " has a potential term");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i + 1; j < dim; ++j) {
        Vec e(dim, 0.0);
        e[i] = 1.0;
        e[j] = 1.0;
        if (std::abs(hq(e) - diag[i] - diag[j]) > 1e-10 * std::max(1.0, scale)) {
          throw std::invalid_argument("metric_from_kinetic: " + h.name() +
                                      " has momentum cross terms");
        }
      }
    }
  }
  return MetricField("metric of " + h.name(), dim, [h, dim](auto q) {
    using T = std::remove_const_t<typename decltype(q)::value_type>;
    std::vector<T> g(dim);
    std::vector<T> p(dim, T(0.0));
    for (std::size_t i = 0; i < dim; ++i) {
      p[i] = T(1.0);
      g[i] = T(1.0) / h.eval<T>(q, std::span<const T>(p));
      p[i] = T(0.0);
    }
    return g;
  });
}

MetricField type_one_metric(std::size_t dim, double z) {
  return metric_from_kinetic(build_deformed(type_one_family(free_params(dim, z))), dim);
}

MetricField ms_metric(std::size_t dim, double z) {
  return metric_from_kinetic(build_deformed(ms_family(free_params(dim, z))), dim);
}

MetricField family_metric(std::size_t dim, double z, ProfileKind kind,
                          const std::optional<ScalarFunction>& f) {
  DeformedFamily fam;
  fam.f_kind = kind;
  fam.params = free_params(dim, z);
  fam.f_user = f;
  return metric_from_kinetic(build_deformed(fam), dim);
}

// ---------------------------------------------------------------------------
// Curvature

CurvatureTensor curvature_from_jet(const MetricJet& jet) {
  const std::size_t n = jet.g.size();
  const auto& g = jet.g;
  const auto& dg = jet.dg;
  const auto& d2g = jet.d2g;
  for (double v : g) {
    if (v == 0.0 || !std::isfinite(v)) {
      throw SingularConfiguration("curvature: degenerate metric");
    }
  }
  auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
  // Gamma^a_{bc} = (delta_ac d_b g_aa + delta_ab d_c g_aa - delta_bc d_a g_bb) / (2 g_aa)
  auto num = [&](std::size_t a, std::size_t b, std::size_t c) {
    return delta(a, c) * dg[a][b] + delta(a, b) * dg[a][c] - delta(b, c) * dg[b][a];
  };
  auto dnum = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return delta(a, c) * d2g[a][b][d] + delta(a, b) * d2g[a][c][d] - delta(b, c) * d2g[b][a][d];
  };
  std::vector<double> gam(n * n * n), dgam(n * n * n * n);
  auto G = [&](std::size_t a, std::size_t b, std::size_t c) -> double& {
    return gam[(a * n + b) * n + c];
  };
  auto dG = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) -> double& {
    return dgam[((a * n + b) * n + c) * n + d];
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        const double nm = num(a, b, c);
        G(a, b, c) = nm / (2.0 * g[a]);
        for (std::size_t d = 0; d < n; ++d) {
          dG(a, b, c, d) = dnum(a, b, c, d) / (2.0 * g[a]) - nm * dg[a][d] / (2.0 * g[a] * g[a]);
        }
      }
    }
  }
  // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
  auto riemann = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    double r = dG(a, d, b, c) - dG(a, c, b, d);
    for (std::size_t e = 0; e < n; ++e) r += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
    return r;
  };
  CurvatureTensor out;
  out.sectional = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double k = riemann(a, b, a, b) / g[b];
      out.sectional(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = k;
      out.sectional(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = k;
      out.scalar += 2.0 * k;
    }
  }
  return out;
}

CurvatureTensor sectional_curvatures(const MetricField& m, std::span<const double> q,
                                     DerivativeMode mode) {
  return curvature_from_jet(mode == DerivativeMode::automatic ? m.jet(q) : m.jet_fd(q));
}

double gaussian_curvature_2d(const MetricField& m, std::span<const double> q,
                             DerivativeMode mode) {
  if (m.dim() != 2) throw std::invalid_argument("gaussian_curvature_2d: metric must be 2D");
  const MetricJet j = mode == DerivativeMode::automatic ? m.jet(q) : m.jet_fd(q);
  const double e = j.g[0], g = j.g[1];
  if (!(e * g > 0.0)) throw SingularConfiguration("gaussian_curvature_2d: metric not Riemannian");
  // K = -1/(2W) [d1(G_1/W) + d2(E_2/W)], W = sqrt(EG)
  const double w = std::sqrt(e * g);
  const double e1 = j.dg[0][0], e2 = j.dg[0][1];
  const double g1 = j.dg[1][0], g2 = j.dg[1][1];
  const double w1 = (e1 * g + e * g1) / (2.0 * w);
  const double w2 = (e2 * g + e * g2) / (2.0 * w);
  const double t1 = j.d2g[1][0][0] / w - g1 * w1 / (w * w);
  const double t2 = j.d2g[0][1][1] / w - e2 * w2 / (w * w);
  return -(t1 + t2) / (2.0 * w);
}

double type_one_curvature_2d(double z, std::span<const double> q) {
  require_dim(q, 2, "type_one_curvature_2d");
  return -z * std::sinh(z * (q[0] * q[0] + q[1] * q[1]));
}

double curvature_of_family(ProfileKind kind, double z, double x,
                           const std::optional<ScalarFunction>& f) {
  // h = log f: K/z = 1/2 [(h' + h'' - 1) e^{h+x} + (h' - h'' + 1) e^{h-x}]
  double h1 = 0.0, h2 = 0.0, ep = 0.0, em = 0.0;
  switch (kind) {
    case ProfileKind::identity:
      ep = std::exp(x);
      em = std::exp(-x);
      break;
    case ProfileKind::exp_plus:
      h1 = 1.0;
      ep = std::exp(2.0 * x);
      em = 1.0;
      break;
    case ProfileKind::exp_minus:
      h1 = -1.0;
      ep = 1.0;
      em = std::exp(-2.0 * x);
      break;
    case ProfileKind::user: {
      if (!f) throw std::invalid_argument("curvature_of_family: user profile requires f");
      const D2 xd(D1(x, 1.0), D1(1.0, 0.0));
      const D2 fv = (*f)(xd);
      const double f0 = fv.val.val, f1 = fv.val.eps, f2 = fv.eps.eps;
      if (f0 == 0.0) throw std::domain_error("curvature_of_family: f vanishes");
      h1 = f1 / f0;
      h2 = f2 / f0 - h1 * h1;
      ep = f0 * std::exp(x);
      em = f0 * std::exp(-x);
      break;
    }
  }
  return 0.5 * z * ((h1 + h2 - 1.0) * ep + (h1 - h2 + 1.0) * em);
}

double curvature_of_family(const ScalarFunction& f, double z, double x) {
  const D2 xd(D1(x, 1.0), D1(1.0, 0.0));
  const D2 fv = f(xd);
  const double f0 = fv.val.val, f1 = fv.val.eps, f2 = fv.eps.eps;
  if (f0 == 0.0) throw std::domain_error("curvature_of_family: f vanishes");
  return z * (f1 * std::cosh(x) + (f2 - f0 - f1 * f1 / f0) * std::sinh(x));
}

Sectional3d sectional_curvatures_3d(Geometry3d kind, double z, std::span<const double> q) {
  require_dim(q, 3, "sectional_curvatures_3d");
  Sectional3d s;
  if (kind == Geometry3d::ms) {
    s.k12 = s.k13 = s.k23 = z;
    s.scalar = 6.0 * z;
    return s;
  }
  const double q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
  const double e = std::exp(-z * q2);
  const double big = std::exp(2.0 * z * q2);
  const double e2 = std::exp(2.0 * z * q[1] * q[1]);
  const double e3 = std::exp(2.0 * z * q[2] * q[2]);
  s.k12 = 0.25 * z * e * (1.0 + e3 - 2.0 * big);
  s.k13 = 0.25 * z * e * (2.0 - e3 + e2 * e3 - 2.0 * big);
  s.k23 = 0.25 * z * e * (2.0 - e2 * e3 - big);
  s.scalar = -5.0 * z * std::sinh(z * q2);
  return s;
}

// ---------------------------------------------------------------------------
// Polar coordinates

Eigen::MatrixXd polar_jacobian(std::span<const double> coords, double z, double kappa2) {
  const std::size_t n = coords.size();
  Eigen::MatrixXd j(n, n);
  std::vector<D1> x(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) x[i] = D1(coords[i], i == c ? 1.0 : 0.0);
    const auto q = cartesian_from_polar<D1>(x, z, kappa2);
    for (std::size_t i = 0; i < n; ++i) {
      j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = q[i].eps;
    }
  }
  return j;
}

std::vector<double> PolarState::coords() const {
  Vec c{rho};
  c.insert(c.end(), theta.begin(), theta.end());
  return c;
}

std::vector<double> PolarState::momenta() const {
  Vec c{p_rho};
  c.insert(c.end(), p_theta.begin(), p_theta.end());
  return c;
}

namespace {

void check_polar_params(double z, double kappa2, const char* what) {
  require_nonzero_z(z, what);
  if (!(kappa2 > 0.0)) throw std::invalid_argument(std::string(what) + ": requires kappa2 > 0");
}

template <typename T>
std::vector<T> polar_lift(std::span<const T> q, std::span<const T> p, double z, double kappa2) {
  using D = Dual<T>;
  const std::size_t n = q.size();
  const auto coords = polar_coordinates<T>(q, z, kappa2);
  std::vector<T> out(coords.begin(), coords.end());
  std::vector<D> x(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) x[i] = D(coords[i], T(i == c ? 1.0 : 0.0));
    const auto qd = cartesian_from_polar<D>(x, z, kappa2);
    T pc(0.0);
    for (std::size_t i = 0; i < n; ++i) pc = pc + qd[i].eps * p[i];
    out.push_back(pc);
  }
  return out;
}

}  // namespace

PolarState to_polar(const PhaseState& x, double z, double kappa2) {
  check_polar_params(z, kappa2, "to_polar");
  const std::size_t n = x.dim();
  if (n < 2) throw std::invalid_argument("to_polar: requires N >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (x.q[i] < 0.0) throw std::domain_error("to_polar: q_i must be nonnegative");
    if (x.q[i] == 0.0) throw SingularConfiguration("to_polar: momentum lift singular at q_i = 0");
  }
  const auto c = polar_coordinates<double>(x.q, z, kappa2);
  const Eigen::MatrixXd j = polar_jacobian(c, z, kappa2);
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(x.p.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd pp = j.transpose() * p;
  PolarState s;
  s.z = z;
  s.kappa2 = kappa2;
  s.rho = c[0];
  s.theta.assign(c.begin() + 1, c.end());
  s.p_rho = pp(0);
  for (std::size_t i = 1; i < n; ++i) s.p_theta.push_back(pp(static_cast<Eigen::Index>(i)));
  return s;
}

PhaseState from_polar(const PolarState& s) {
  check_polar_params(s.z, s.kappa2, "from_polar");
  const std::size_t n = s.dim();
  if (n < 2 || s.p_theta.size() != s.theta.size()) {
    throw std::invalid_argument("from_polar: inconsistent polar state");
  }
  if (!(s.rho > 0.0)) throw SingularConfiguration("from_polar: requires rho > 0");
  if (s.z < 0.0 && !(std::sqrt(-s.z) * s.rho < 0.5 * std::numbers::pi)) {
    throw std::domain_error("from_polar: rho beyond the chart");
  }
  for (std::size_t k = 0; k < s.theta.size(); ++k) {
    const double a = k == 0 ? std::sqrt(s.kappa2) * s.theta[k] : s.theta[k];
    if (!(a > 0.0 && a < 0.5 * std::numbers::pi)) {
      throw std::domain_error("from_polar: angle outside the principal domain");
    }
  }
  const Vec c = s.coords();
  PhaseState x;
  x.q = cartesian_from_polar<double>(c, s.z, s.kappa2);
  const Eigen::MatrixXd j = polar_jacobian(c, s.z, s.kappa2);
  const Vec mom = s.momenta();
  const Eigen::VectorXd pp = Eigen::Map<const Eigen::VectorXd>(mom.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd p = j.transpose().fullPivLu().solve(pp);
  x.p.assign(p.data(), p.data() + n);
  return x;
}

std::vector<Observable> polar_observables(std::size_t dim, double z, double kappa2) {
  check_polar_params(z, kappa2, "polar_observables");
  std::vector<Observable> out;
  for (std::size_t c = 0; c < 2 * dim; ++c) {
    std::string name;
    if (c == 0) {
      name = "rho";
    } else if (c < dim) {
      name = "theta_" + std::to_string(c + 1);
    } else if (c == dim) {
      name = "P_rho";
    } else {
      name = "P_theta_" + std::to_string(c - dim + 1);
    }
    out.emplace_back(name, [c, z, kappa2](auto q, auto p) {
      using T = std::remove_const_t<typename decltype(q)::value_type>;
      return polar_lift<T>(q, p, z, kappa2)[c];
    });
  }
  return out;
}

namespace {

double angular_weight(const PolarState& s, std::size_t j) {
  const double th = s.theta[j - 2];
  if (j == 2) {
    const double sk = sin_k(s.kappa2, th);
    return 1.0 / (sk * sk);
  }
  const double sn = std::sin(th);
  return 1.0 / (sn * sn);
}

double pi_theta(const PolarState& s, std::size_t j) { return 2.0 * s.p_theta[j - 2]; }

void check_state(const PolarState& s) {
  if (s.theta.size() != s.p_theta.size() || s.theta.empty()) {
    throw std::invalid_argument("polar state: inconsistent dimensions");
  }
}

}  // namespace

double polar_left_integral(const PolarState& s, std::size_t m) {
  check_state(s);
  const std::size_t n = s.dim();
  if (m < 2 || m > n) throw std::out_of_range("polar_left_integral: m must be in [2, N]");
  double sum = 0.0;
  for (std::size_t i = n - m + 2; i <= n; ++i) {
    double w = 1.0;
    for (std::size_t j = n - m + 2; j < i; ++j) w *= angular_weight(s, j);
    const double pi = pi_theta(s, i);
    sum += w * pi * pi;
  }
  return sum;
}

std::vector<double> polar_integral_chain(const PolarState& s) {
  check_state(s);
  const std::size_t n = s.dim();
  Vec out;
  double c = pi_theta(s, n) * pi_theta(s, n);
  out.push_back(c);
  for (std::size_t m = 3; m <= n; ++m) {
    const std::size_t j = n - m + 2;
    c = pi_theta(s, j) * pi_theta(s, j) + angular_weight(s, j) * c;
    out.push_back(c);
  }
  return out;
}

double polar_right_integral_3d(const PolarState& s) {
  check_state(s);
  if (s.dim() != 3) throw std::invalid_argument("polar_right_integral_3d: requires N = 3");
  const double th = s.theta[0], ph = s.theta[1];
  const double v = std::cos(ph) * pi_theta(s, 2) -
                   std::sin(ph) * cos_k(s.kappa2, th) / sin_k(s.kappa2, th) * pi_theta(s, 3);
  return v * v;
}

double polar_hamiltonian_type_one(const PolarState& s) {
  check_state(s);
  const double c = cos_k(-s.z, s.rho), sr = sin_k(-s.z, s.rho);
  const double pr = 2.0 * s.p_rho;
  return 0.5 * c * (pr * pr + polar_left_integral(s, s.dim()) / (s.kappa2 * sr * sr));
}

MsRadial ms_radial(const PolarState& s) {
  require_nonzero_z(s.z, "ms_radial");
  const double t = tan_k(-s.z, s.rho);
  const double rz = std::sqrt(std::abs(s.z));
  MsRadial out;
  out.r = s.z > 0.0 ? std::asin(rz * t) / rz : std::asinh(rz * t) / rz;
  out.p_r = cos_k(-s.z, s.rho) * s.p_rho;
  return out;
}

double polar_hamiltonian_ms(const PolarState& s) {
  check_state(s);
  const MsRadial r = ms_radial(s);
  const double t = tan_k(-s.z, s.rho);
  const double pr = 2.0 * r.p_r;
  return 0.5 * pr * pr + polar_left_integral(s, s.dim()) / (2.0 * s.kappa2 * t * t);
}

double polar_ms_extra_integral_3d(const PolarState& s) {
  check_state(s);
  if (s.dim() != 3) throw std::invalid_argument("polar_ms_extra_integral_3d: requires N = 3");
  const MsRadial r = ms_radial(s);
  const double th = s.theta[0], ph = s.theta[1];
  const double cot_r = 1.0 / sin_k(-s.z, s.rho);
  const double sk = sin_k(s.kappa2, th), ck = cos_k(s.kappa2, th);
  const double v = s.kappa2 * sk * std::sin(ph) * 2.0 * r.p_r +
                   ck * std::sin(ph) * cot_r * pi_theta(s, 2) +
                   std::cos(ph) * cot_r / sk * pi_theta(s, 3);
  return v * v;
}

double RadialSystem::operator()(double radius, double momentum) const {
  if (kind == RadialKind::type_one) {
    const double sr = sin_k(-z, radius);
    if (sr == 0.0) throw SingularConfiguration("radial system: rho = 0");
    return 0.5 * cos_k(-z, radius) * (momentum * momentum + ctilde / (kappa2 * sr * sr));
  }
  const double sr = sin_k(z, radius);
  if (sr == 0.0) throw SingularConfiguration("radial system: r = 0");
  return 0.5 * momentum * momentum + ctilde / (2.0 * kappa2 * sr * sr);
}

RadialSystem radial_reduction(RadialKind kind, double z, double kappa2, double ctilde) {
  require_nonzero_z(z, "radial_reduction");
  if (kappa2 == 0.0) throw std::invalid_argument("radial_reduction: kappa2 must be nonzero");
  return RadialSystem{kind, z, kappa2, ctilde};
}

std::vector<double> type_one_polar_metric_2d(double z, double kappa2, double rho) {
  const double c = cos_k(-z, rho), sr = sin_k(-z, rho);
  return {1.0 / c, kappa2 * sr * sr / c};
}

double type_one_polar_curvature(double z, double rho) {
  const double c = cos_k(-z, rho), sr = sin_k(-z, rho);
  return -0.5 * z * z * sr * sr / c;
}

MetricField type_one_polar_metric(std::size_t dim, double z, double kappa2) {
  if (dim < 2) throw std::invalid_argument("type_one_polar_metric: requires N >= 2");
  if (kappa2 == 0.0) throw std::invalid_argument("type_one_polar_metric: kappa2 must be nonzero");
  return MetricField("type I polar", dim, [dim, z, kappa2](auto x) {
    using T = std::remove_const_t<typename decltype(x)::value_type>;
    const T c = cos_k(-z, x[0]);
    const T sr = sin_k(-z, x[0]);
    std::vector<T> g(dim);
    g[0] = T(1.0) / c;
    T w = kappa2 * sr * sr / c;
    for (std::size_t i = 1; i < dim; ++i) {
      g[i] = w;
      const T sn = i == 1 ? sin_k(kappa2, x[1]) : sin(x[i]);
      w = w * sn * sn;
    }
    return g;
  });
}

MetricField ms_polar_metric_2d(double z, double kappa2) {
  return MetricField("MS polar", 2, [z, kappa2](auto x) {
    using T = std::remove_const_t<typename decltype(x)::value_type>;
    const T sr = sin_k(z, x[0]);
    return std::vector<T>{T(1.0), kappa2 * sr * sr};
  });
}

// ---------------------------------------------------------------------------
// Collective variables

double CollectiveVars::pseudosphere() const {
  double s = xi2.at(0);
  for (std::size_t k = 1; k < xi2.size(); ++k) s -= xi2[k];
  return s;
}

std::vector<double> CollectiveVars::xi() const {
  Vec out;
  for (double v : xi2) {
    if (v < 0.0) throw std::domain_error("CollectiveVars::xi: negative square (z < 0)");
    out.push_back(std::sqrt(v));
  }
  return out;
}

CollectiveVars collective_vars(std::span<const double> q, double z) {
  require_nonzero_z(z, "collective_vars");
  const std::size_t n = q.size();
  Vec s(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + 2.0 * z * q[i] * q[i];
  CollectiveVars cv;
  cv.xi2.push_back(std::exp(s[n]));
  for (std::size_t k = 1; k <= n; ++k) {
    cv.xi2.push_back(std::exp(s[n - k]) * std::expm1(2.0 * z * q[n - k] * q[n - k]));
  }
  return cv;
}

// ---------------------------------------------------------------------------
// Scans

std::vector<CurvatureRow> curvature_scan(CurvatureFamily family, std::size_t dim, double z,
                                         double lo, double hi, std::size_t points,
                                         DerivativeMode mode) {
  if (dim < 2) throw std::invalid_argument("curvature_scan: requires N >= 2");
  if (points == 0) throw std::invalid_argument("curvature_scan: points must be positive");
  if (!(lo <= hi)) throw std::invalid_argument("curvature_scan: requires lo <= hi");
  const bool type_one = family == CurvatureFamily::type_one;
  const MetricField m = type_one ? type_one_metric(dim, z) : ms_metric(dim, z);
  auto node = [&](std::size_t i) {
    return points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  };
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= points;
  std::vector<CurvatureRow> rows;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vec q(dim);
    std::size_t r = idx;
    for (std::size_t d = dim; d-- > 0;) {
      q[d] = node(r % points);
      r /= points;
    }
    if (dim == 2) {
      const double closed = type_one ? type_one_curvature_2d(z, q) : z;
      rows.push_back({q, "K", closed, gaussian_curvature_2d(m, q, mode)});
      continue;
    }
    const CurvatureTensor t = sectional_curvatures(m, q, mode);
    Eigen::MatrixXd closed = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dim),
                                                       static_cast<Eigen::Index>(dim), std::nan(""));
    double closed_scalar = std::nan("");
    if (!type_one) {
      closed.setConstant(z);
      closed_scalar = static_cast<double>(dim * (dim - 1)) * z;
    } else if (dim == 3) {
      const Sectional3d c = sectional_curvatures_3d(Geometry3d::type_one, z, q);
      closed(0, 1) = c.k12;
      closed(0, 2) = c.k13;
      closed(1, 2) = c.k23;
      closed_scalar = c.scalar;
    }
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(dim); ++i) {
      for (Eigen::Index j = i + 1; j < static_cast<Eigen::Index>(dim); ++j) {
        rows.push_back({q, "K" + std::to_string(i + 1) + std::to_string(j + 1), closed(i, j),
                        t.sectional(i, j)});
      }
    }
    rows.push_back({q, "scalar", closed_scalar, t.scalar});
  }
  return rows;
}

std::string curvature_csv(const std::vector<CurvatureRow>& rows) {
  std::ostringstream os;
  const std::size_t dim = rows.empty() ? 2 : rows.front().coords.size();
  for (std::size_t d = 0; d < dim; ++d) os << 'q' << d + 1 << ',';
  if (dim >= 3) os << "component,";
  os << "closed_form,numeric,abs_err\n";
  for (const auto& row : rows) {
    for (double v : row.coords) os << fmt17(v) << ',';
    if (dim >= 3) os << row.component << ',';
    os << fmt17(row.closed_form) << ',' << fmt17(row.numeric) << ','
       << fmt17(std::abs(row.numeric - row.closed_form)) << '\n';
  }
  return os.str();
}

}  // namespace curvlab
