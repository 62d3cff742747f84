#include "irqm/friedrichs.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

namespace irqm {

namespace {

template <class T>
T horner(const std::vector<double>& c, T x) {
  T r = 0.0;
  for (size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

std::vector<cplx> poly_roots(const std::vector<double>& c) {
  size_t deg = c.size() - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  std::vector<cplx> out;
  if (deg == 0) return out;
  Eigen::VectorXd coeffs(deg + 1);
  for (size_t i = 0; i <= deg; ++i) coeffs[i] = c[i];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(coeffs);
  for (int i = 0; i < solver.roots().size(); ++i) {
    cplx r = solver.roots()[i];
    bool dup = false;
    for (auto& s : out)
      if (std::abs(s - r) < 1e-6 * std::max(1.0, std::abs(r))) dup = true;
    if (!dup) out.push_back(r);
  }
  return out;
}

// (c(w) - c(z)) / (w - z) for a polynomial with ascending coefficients
cplx divided_difference(const std::vector<double>& c, double w, cplx z) {
  cplx acc = 0.0, s = 0.0, zp = 1.0;
  for (size_t k = 1; k < c.size(); ++k) {
    s = w * s + zp;
    zp *= z;
    acc += c[k] * s;
  }
  return acc;
}

int degree(const std::vector<double>& c) {
  int d = (int)c.size() - 1;
  while (d > 0 && c[d] == 0.0) --d;
  return d;
}

}  // namespace

double FormFactor::f2(double w) const { return w * horner(num, w) / horner(den, w); }

cplx FormFactor::f2(cplx z) const { return z * horner(num, z) / horner(den, z); }

double FormFactor::f(double w) const { return std::sqrt(std::max(0.0, f2(w))); }

FormFactor make_lorentz2(double b) {
  if (!(b > 0)) throw Error(ErrorKind::model, "lorentz2 width must be positive");
  FormFactor ff;
  ff.family = Family::lorentz2;
  ff.params = {b};
  ff.num = {1.0};
  ff.den = {b * b * b * b, 0.0, 2 * b * b, 0.0, 1.0};
  ff.singularities = {cplx(0, b), cplx(0, -b)};
  return ff;
}

FormFactor make_rational(const std::vector<double>& num, const std::vector<double>& den) {
  if (num.empty() || den.empty()) throw Error(ErrorKind::model, "empty polynomial");
  if (degree(den) < degree(num) + 3)
    throw Error(ErrorKind::model, "rational form factor needs deg q >= deg p + 3");
  FormFactor ff;
  ff.family = Family::rational;
  ff.num = num;
  ff.den = den;
  ff.params.push_back(degree(num));
  ff.params.insert(ff.params.end(), num.begin(), num.end());
  ff.params.insert(ff.params.end(), den.begin(), den.end());
  ff.singularities = poly_roots(den);
  for (auto& s : ff.singularities)
    if (std::abs(s.imag()) < 1e-12 && s.real() >= 0)
      throw Error(ErrorKind::model, "denominator vanishes on the positive axis");
  if (horner(den, 0.0) <= 0) throw Error(ErrorKind::model, "denominator must be positive at 0");
  double lead = num[degree(num)] / den[degree(den)];
  if (lead < 0) throw Error(ErrorKind::model, "form factor negative at large energy");
  for (int i = 0; i <= 2000; ++i) {
    double w = 0.05 * i;
    if (ff.f2(w) < 0) throw Error(ErrorKind::model, "form factor negative on the real axis");
  }
  return ff;
}

FormFactor make_form_factor(const std::string& family, const std::vector<double>& params) {
  if (family == "lorentz2") return make_lorentz2(params.empty() ? 1.0 : params[0]);
  if (family == "rational") {
    if (params.empty()) throw Error(ErrorKind::config, "rational form factor needs params");
    int dp = (int)params[0];
    if (dp < 0 || (int)params.size() < dp + 2 + 1)
      throw Error(ErrorKind::config, "bad rational form factor params");
    std::vector<double> num(params.begin() + 1, params.begin() + 2 + dp);
    std::vector<double> den(params.begin() + 2 + dp, params.end());
    return make_rational(num, den);
  }
  throw Error(ErrorKind::config, "unknown form factor family: " + family);
}

std::string family_name(Family f) { return f == Family::lorentz2 ? "lorentz2" : "rational"; }

FriedrichsModel single_level(double omega0, double lambda, const FormFactor& ff,
                             double omega_max) {
  FriedrichsModel m;
  m.levels = {omega0};
  m.scales = {1.0};
  m.lambda = lambda;
  m.ff = ff;
  m.omega_max = omega_max;
  return m;
}

void validate(const FriedrichsModel& m) {
  if (m.levels.empty()) throw Error(ErrorKind::model, "model needs at least one level");
  if (m.scales.size() != m.levels.size())
    throw Error(ErrorKind::model, "one coupling scale per level required");
  double top = 0;
  for (size_t i = 0; i < m.levels.size(); ++i) {
    if (m.levels[i] < 0) throw Error(ErrorKind::model, "level energies must be >= 0");
    top = std::max(top, m.levels[i]);
    for (size_t j = 0; j < i; ++j)
      if (m.levels[i] == m.levels[j]) throw Error(ErrorKind::model, "level energies must differ");
  }
  if (!(m.omega_max > 10 * top)) throw Error(ErrorKind::model, "omega_max must exceed 10 x max level");
  if (!(m.quad_tol > 0)) throw Error(ErrorKind::model, "quadrature tolerance must be positive");
}

cplx cauchy_f2(const FormFactor& ff, cplx z, Sheet sheet, double tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double x = z.real(), y = z.imag();
  bool on_axis = (y == 0.0 && x >= 0.0);
  // upper half plane is the same function on both sheets
  if (y > 0) sheet = Sheet::first;

  cplx result = 0.0;
  double err = 0.0;
  double req = std::max(0.1 * tol, 5e-13);
  double l1 = 0.0;
  // pieces [0,1], [1,2], [2,4], ... up to the split point, then the tail
  auto piecewise = [&](auto g, double split) {
    std::vector<double> br = {0.0};
    for (double b = 1.0; b < 0.5 * split; b *= 2.0) br.push_back(b);
    if (split > 0) br.push_back(split);
    double top = std::max(1.0, split);
    for (double b = 2.0 * top; b <= 256.0 * top; b *= 2.0) br.push_back(b);
    cplx acc = 0.0;
    for (size_t i = 0; i + 1 < br.size(); ++i) {
      double e = 0.0, l = 0.0;
      if (br[i + 1] > br[i]) acc += GK::integrate(g, br[i], br[i + 1], 8, req, &e, &l);
      err += e;
      l1 += l;
    }
    double e = 0.0, l = 0.0;
    double w0 = br.back();
    auto tail = [&](double u) -> cplx { return g(w0 / u) * (w0 / (u * u)); };
    acc += GK::integrate(tail, 0.0, 1.0, 8, req, &e, &l);
    err += e;
    l1 += l;
    return acc;
  };
  bool near = x > 0 && std::abs(y) < 0.25 * std::max(1.0, x);
  if (near || on_axis) {
    if (x == 0.0) throw Error(ErrorKind::cut, "evaluation at the threshold");
    cplx fz = ff.f2(z);
    // P(w) = w (w + 1) p(w); the integrand is -[h(w) - h(z)] / ((w - z)(w + 1)) with h = P / q
    std::vector<double> P(ff.num.size() + 2, 0.0);
    for (size_t k = 0; k < ff.num.size(); ++k) {
      P[k + 1] += ff.num[k];
      P[k + 2] += ff.num[k];
    }
    cplx Pz = horner(P, z), Qz = horner(ff.den, z);
    double band = 0.5 * std::max(1.0, x);
    auto g = [&](double w) -> cplx {
      if (std::abs(w - x) > band) return (ff.f2(w) - fz * (z + 1.0) / (w + 1.0)) / (z - w);
      cplx dd = (Qz * divided_difference(P, w, z) - Pz * divided_difference(ff.den, w, z)) /
                (horner(ff.den, w) * Qz);
      return -dd / (w + 1.0);
    };
    cplx lg;
    if (on_axis)
      lg = cplx(std::log(x), pi);  // lower lip
    else
      lg = std::log(-z);
    result = piecewise(g, x) + fz * lg;
  } else {
    auto g = [&](double w) -> cplx { return ff.f2(w) / (z - w); };
    result = piecewise(g, std::max(x, 0.0));
  }
  if (!(err <= std::max(tol * std::abs(result), 1e-12 * l1) + 1e-15) || !std::isfinite(std::abs(result))) {
    std::ostringstream os;
    os.precision(17);
    os << "quadrature did not reach tolerance at z = " << z << " (estimate " << err << ")";
    throw Error(ErrorKind::tolerance, os.str(), err);
  }
  if (sheet == Sheet::second && (y < 0 || on_axis)) result -= 2.0 * pi * I * ff.f2(z);
  return result;
}

static void check_singular(const FriedrichsModel& m, cplx z) {
  for (auto& s : m.ff.singularities)
    if (std::abs(z - s) < 1e-10) throw Error(ErrorKind::singularity, "form factor singularity");
}

cplx eta(const FriedrichsModel& m, cplx z, Sheet sheet, int level) {
  double g = m.scales[level];
  if (m.lambda == 0.0) return z - m.levels[level];
  check_singular(m, z);
  return z - m.levels[level] - m.lambda * m.lambda * g * g * cauchy_f2(m.ff, z, sheet, m.quad_tol);
}

cplx eta_first_sheet(const FriedrichsModel& m, cplx z) {
  if (z.imag() == 0.0 && z.real() >= 0.0)
    throw Error(ErrorKind::cut, "first-sheet evaluation on the cut");
  return eta(m, z, Sheet::first);
}

cplx eta_second_sheet(const FriedrichsModel& m, cplx z) {
  check_singular(m, z);
  return eta(m, z, Sheet::second);
}

Eigen::MatrixXcd eta_matrix(const FriedrichsModel& m, cplx z, Sheet sheet) {
  int n = m.n_levels();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  cplx s = 0.0;
  if (m.lambda != 0.0) {
    check_singular(m, z);
    s = cauchy_f2(m.ff, z, sheet, m.quad_tol);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M(i, j) = (i == j ? z - m.levels[i] : 0.0) - m.lambda * m.lambda * m.scales[i] * m.scales[j] * s;
  return M;
}

cplx golden_rule_seed(const FriedrichsModel& m, int level) {
  double w = m.levels[level], g = m.scales[level];
  return cplx(w, -pi * m.lambda * m.lambda * g * g * m.ff.f2(w));
}

namespace {

template <class F>
auto stencil(F f, cplx z, double h) {
  using R = std::decay_t<decltype(f(z))>;
  R out = (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h);
  return out;
}

}  // namespace

ResonanceData find_pole(const FriedrichsModel& m, std::optional<cplx> seed, int level,
                        const PoleOptions& opt) {
  validate(m);
  int n = m.n_levels();
  ResonanceData r;
  r.level = level;
  if (m.lambda == 0.0) {
    r.pole = m.levels[level];
    r.gamma = 0.0;
    r.norm = 1.0;
    r.bound = true;
    r.amps = Eigen::VectorXcd::Zero(n);
    r.amps[level] = 1.0;
    return r;
  }
  FriedrichsModel mt = m;
  mt.quad_tol = std::min(m.quad_tol, 1e-13);
  cplx z = seed ? *seed : golden_rule_seed(m, level);
  bool bound_search = (z.imag() == 0.0 && z.real() < 0.0);
  Sheet sheet = bound_search ? Sheet::first : Sheet::second;
  auto F = [&](cplx w) -> cplx {
    if (n == 1) return eta(mt, w, sheet, 0);
    return eta_matrix(mt, w, sheet).determinant();
  };
  double h = 1e-3;
  bool ok = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    r.trace.push_back(z);
    cplx fz = F(z);
    r.residual = std::abs(fz);
    r.iterations = it;
    if (r.residual < opt.tol) {
      ok = true;
      break;
    }
    double hz = h * std::max(1.0, std::abs(z));
    if (bound_search) hz = std::min(hz, 0.25 * std::abs(z.real()));
    cplx d = stencil(F, z, hz);
    cplx step = fz / d;
    z -= step;
    if (bound_search) {
      z = cplx(std::min(z.real(), -1e-14), 0.0);
    }
  }
  if (!ok) {
    std::ostringstream os;
    os << "pole search did not converge; iterates:";
    for (auto& t : r.trace) os << " " << t;
    throw Error(ErrorKind::search, os.str(), r.residual);
  }
  if (z.imag() > 1e-10) throw Error(ErrorKind::model, "pole converged in the upper half plane");
  if (std::abs(z.imag()) <= 1e-10) {
    r.bound = true;
    z = cplx(z.real(), 0.0);
    sheet = z.real() < 0 ? Sheet::first : Sheet::second;
  }
  r.pole = z;
  r.gamma = -2.0 * z.imag();
  if (r.gamma < 0) r.gamma = 0;

  double hz = h * std::max(1.0, std::abs(z));
  if (r.bound && z.real() < 0) hz = std::min(hz, 0.25 * std::abs(z.real()));
  auto Mf = [&](cplx w) -> Eigen::MatrixXcd { return eta_matrix(mt, w, sheet); };
  Eigen::MatrixXcd M = Mf(z);
  Eigen::MatrixXcd dM = stencil(Mf, z, hz);
  Eigen::VectorXcd a;
  if (n == 1) {
    a = Eigen::VectorXcd::Ones(1);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    a = svd.matrixV().col(n - 1);
    // fix the phase so the seeded level carries a real positive entry
    cplx ph = a[level] / std::abs(a[level]);
    a /= ph;
  }
  cplx q = (a.transpose() * dM * a)(0, 0);
  cplx c = std::sqrt(1.0 / q);
  r.amps = c * a;
  r.norm = r.amps[level] * r.amps[level];
  return r;
}

std::vector<ResonanceData> find_all_poles(const FriedrichsModel& m, const PoleOptions& opt) {
  std::vector<ResonanceData> out;
  for (int l = 0; l < m.n_levels(); ++l) out.push_back(find_pole(m, std::nullopt, l, opt));
  return out;
}

Contour background_contour(const FriedrichsModel& m, const std::vector<ResonanceData>& poles) {
  Contour c;
  c.omega_max = m.omega_max;
  std::vector<cplx> cpx;
  for (auto& p : poles)
    if (!p.bound) cpx.push_back(p.pole);
  std::sort(cpx.begin(), cpx.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  c.waypoints.push_back(0.0);
  if (cpx.empty()) {
    c.waypoints.push_back(m.omega_max);
    return c;
  }
  double top = 0;
  for (auto& p : cpx) top = std::min(top, p.imag());
  double depth = 1.5 * top;
  for (auto& s : m.ff.singularities) {
    if (s.imag() < 0 && s.real() <= m.omega_max) {
      double lim = 0.5 * s.imag();
      if (depth < lim) depth = lim;
    }
  }
  for (auto& p : cpx) {
    if (!(p.imag() > depth)) {
      std::ostringstream os;
      os << "no clearance under pole " << p << ": contour depth " << depth
         << " limited by a form-factor singularity";
      throw Error(ErrorKind::contour, os.str());
    }
    if (p.real() <= 0 || p.real() >= m.omega_max)
      throw Error(ErrorKind::contour, "pole outside the contour span");
  }
  c.depth = depth;
  for (auto& p : cpx) c.waypoints.push_back(cplx(p.real(), depth));
  c.waypoints.push_back(m.omega_max);
  // check form-factor singularities are not between the contour and the axis
  for (auto& s : m.ff.singularities) {
    if (s.imag() >= 0 || s.real() <= 0 || s.real() >= m.omega_max) continue;
    for (size_t i = 0; i + 1 < c.waypoints.size(); ++i) {
      cplx a = c.waypoints[i], b = c.waypoints[i + 1];
      if (s.real() < a.real() || s.real() > b.real()) continue;
      double t = (s.real() - a.real()) / (b.real() - a.real());
      double yc = a.imag() + t * (b.imag() - a.imag());
      if (s.imag() > yc) {
        std::ostringstream os;
        os << "form-factor singularity " << s << " lies between the contour and the axis";
        throw Error(ErrorKind::contour, os.str());
      }
    }
  }
  c.attractors = cpx;
  for (auto& s : m.ff.singularities)
    if (s.imag() < 0) c.attractors.push_back(s);
  return c;
}

std::vector<Node> contour_nodes(const Contour& c, int panel_nodes, double max_panel) {
  std::vector<Node> out;
  for (size_t i = 0; i + 1 < c.waypoints.size(); ++i) {
    cplx a = c.waypoints[i], b = c.waypoints[i + 1];
    auto br = graded_breaks(a, b, c.attractors, max_panel, i == 0);
    segment_rule(a, b, br, panel_nodes, out);
  }
  tail_rule(c.omega_max, panel_nodes, 40, out);
  return out;
}

}  // namespace irqm
