#include "irqm/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace irqm {

cplx RationalAmplitude::operator()(cplx z) const {
  cplx v = constant;
  for (size_t k = 0; k < poles.size(); ++k) v += residues[k] / (z - poles[k]);
  return v;
}

RationalAmplitude RationalAmplitude::mirrored() const {
  RationalAmplitude r;
  r.constant = std::conj(constant);
  for (size_t k = 0; k < poles.size(); ++k) {
    r.poles.push_back(std::conj(poles[k]));
    r.residues.push_back(std::conj(residues[k]));
  }
  return r;
}

bool RationalAmplitude::is_zero() const {
  if (constant != 0.0) return false;
  for (auto& a : residues)
    if (a != 0.0) return false;
  return true;
}

PureState bare_level() { return PureState{1.0, {}}; }

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

template <class F>
cplx real_integral(F f) {
  double err;
  const double inf = std::numeric_limits<double>::infinity();
  cplx a = GK::integrate(f, 0.0, 1.0, 15, 1e-13, &err);
  cplx b = GK::integrate(f, 1.0, inf, 15, 1e-13, &err);
  return a + b;
}

void check_amplitude(const FriedrichsModel& m, const RationalAmplitude& r) {
  if (r.poles.size() != r.residues.size())
    throw Error(ErrorKind::continuation, "amplitude needs one residue per pole");
  for (auto& p : r.poles) {
    if (p.imag() == 0.0 && p.real() >= 0.0)
      throw Error(ErrorKind::continuation, "amplitude pole on the continuum");
    for (auto& s : m.ff.singularities)
      if (std::abs(p - s) < 1e-10) throw Error(ErrorKind::continuation, "amplitude pole on a form-factor singularity");
  }
  for (size_t i = 0; i < r.poles.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (std::abs(r.poles[i] - r.poles[j]) < 1e-12)
        throw Error(ErrorKind::continuation, "amplitude poles must be simple");
}

// depth of the contour under real part x (0 outside the dip)
double contour_height(const Contour& c, double x) {
  for (size_t i = 0; i + 1 < c.waypoints.size(); ++i) {
    cplx a = c.waypoints[i], b = c.waypoints[i + 1];
    if (x >= a.real() && x <= b.real()) {
      double t = (x - a.real()) / (b.real() - a.real());
      return a.imag() + t * (b.imag() - a.imag());
    }
  }
  return 0.0;
}

void check_not_crossed(const Contour& c, const std::vector<cplx>& poles, const char* what) {
  for (auto& p : poles) {
    if (p.imag() >= 0 || p.real() <= 0 || p.real() >= c.omega_max) continue;
    if (p.imag() > contour_height(c, p.real()))
      throw Error(ErrorKind::continuation,
                  std::string(what) + " pole lies between the background contour and the axis");
  }
}

cplx cauchy_from(const RationalAmplitude& r, const std::vector<cplx>& s_poles, cplx z, cplx sz) {
  cplx v = r.constant * sz;
  for (size_t k = 0; k < r.poles.size(); ++k) {
    cplx d = z - r.poles[k];
    if (std::abs(d) < 1e-12) throw Error(ErrorKind::continuation, "evaluation at an amplitude pole");
    v += r.residues[k] * (sz - s_poles[k]) / d;
  }
  return v;
}

std::vector<cplx> cauchy_at_poles(const FriedrichsModel& m, const RationalAmplitude& r) {
  std::vector<cplx> out;
  for (auto& p : r.poles) out.push_back(cauchy_f2(m.ff, p, Sheet::first, m.quad_tol));
  return out;
}

cplx expm1c(cplx w) {
  double x = w.real(), y = w.imag();
  double sh = std::sin(0.5 * y);
  return cplx(std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y));
}

}  // namespace

double state_norm(const FriedrichsModel& m, const PureState& s) {
  return direct_inner(m, s, s).real();
}

PureState normalized(const FriedrichsModel& m, const PureState& s) {
  double n = std::sqrt(state_norm(m, s));
  if (!(n > 0)) throw Error(ErrorKind::state, "cannot normalise the zero state");
  PureState out = s;
  out.alpha /= n;
  out.amp.constant /= n;
  for (auto& a : out.amp.residues) a /= n;
  return out;
}

cplx direct_inner(const FriedrichsModel& m, const PureState& phi, const PureState& psi) {
  check_amplitude(m, phi.amp);
  check_amplitude(m, psi.amp);
  RationalAmplitude sb = phi.amp.mirrored();
  cplx v = std::conj(phi.alpha) * psi.alpha;
  if (!phi.amp.is_zero() && !psi.amp.is_zero())
    v += real_integral([&](double w) -> cplx { return m.ff.f2(w) * sb(w) * psi.amp(w); });
  return v;
}

cplx direct_energy(const FriedrichsModel& m, const PureState& phi, const PureState& psi) {
  RationalAmplitude sb = phi.amp.mirrored();
  double lam = m.lambda, w0 = m.levels[0];
  cplx v = std::conj(phi.alpha) * psi.alpha * w0;
  v += real_integral([&](double w) -> cplx {
    double f2 = m.ff.f2(w);
    return f2 * (w * sb(w) * psi.amp(w) + lam * std::conj(phi.alpha) * psi.amp(w) + lam * psi.alpha * sb(w));
  });
  return v;
}

cplx cauchy_rational(const FriedrichsModel& m, const RationalAmplitude& r, cplx z, Sheet sheet) {
  check_amplitude(m, r);
  cplx sz = cauchy_f2(m.ff, z, sheet, m.quad_tol);
  return cauchy_from(r, cauchy_at_poles(m, r), z, sz);
}

namespace {

// Gamow coefficient of psi (or of a mirrored probe) at one pole
cplx pole_coefficient(const FriedrichsModel& m, const ResonanceData& p, cplx alpha,
                      const RationalAmplitude& r, const std::vector<cplx>& s_poles) {
  if (m.lambda == 0.0) return alpha;
  Sheet sheet = (p.bound && p.pole.real() < 0) ? Sheet::first : Sheet::second;
  cplx sz = cauchy_f2(m.ff, p.pole, sheet, m.quad_tol);
  cplx c = alpha;
  if (!r.is_zero()) {
    cplx adj = cauchy_from(r, s_poles, p.pole, sz);
    c += m.lambda * adj;
  }
  return std::sqrt(p.norm) * c;
}

void fill_background(GamowState& g, const std::vector<Node>& nodes) {
  const auto& m = g.model;
  g.nodes = nodes;
  g.background.assign(nodes.size(), 0.0);
  g.cauchy_nodes.assign(nodes.size(), 0.0);
  auto sp = cauchy_at_poles(m, g.raw.amp);
  for (size_t k = 0; k < nodes.size(); ++k) {
    cplx z = nodes[k].z;
    if (m.lambda == 0.0) {
      g.background[k] = g.raw.amp(z);
      continue;
    }
    cplx s1 = cauchy_f2(m.ff, z, Sheet::first, m.quad_tol);
    g.cauchy_nodes[k] = s1;
    cplx eta1 = z - m.levels[0] - m.lambda * m.lambda * s1;
    cplx c = g.raw.amp.is_zero() ? cplx(0.0) : cauchy_from(g.raw.amp, sp, z, s1);
    g.background[k] = g.raw.amp(z) + m.lambda * (g.raw.alpha + m.lambda * c) / eta1;
  }
}

void fill_energy_grid(GamowState& g, int n) {
  const auto& m = g.model;
  std::vector<cplx> attract;
  for (auto& p : g.poles) attract.push_back(p.pole);
  for (auto& p : g.raw.amp.poles) attract.push_back(p);
  for (auto& s : m.ff.singularities) attract.push_back(s);
  std::vector<double> x, w;
  real_rule(0.0, m.omega_max, attract, std::min(0.5, 2.0 * pi / g.t_max), n, true, x, w);
  std::vector<Node> tail;
  tail_rule(m.omega_max, n, 40, tail);
  for (auto& t : tail) {
    x.push_back(t.z.real());
    w.push_back(t.w.real());
  }
  g.energy = x;
  g.energy_w = w;
  g.psi_plus.resize(x.size());
  auto sp = cauchy_at_poles(m, g.raw.amp);
  for (size_t k = 0; k < x.size(); ++k) {
    double e = x[k];
    cplx v = g.raw.amp(e);
    if (m.lambda != 0.0) {
      cplx s1 = cauchy_f2(m.ff, e, Sheet::first, m.quad_tol);  // lower lip
      cplx eta1 = e - m.levels[0] - m.lambda * m.lambda * s1;
      cplx c = g.raw.amp.is_zero() ? cplx(0.0) : cauchy_from(g.raw.amp, sp, e, s1);
      v += m.lambda * (g.raw.alpha + m.lambda * c) / eta1;
    }
    g.psi_plus[k] = m.ff.f(e) * v;
  }
}

std::vector<PureState> validation_probes() {
  PureState a = bare_level();
  PureState b;
  b.alpha = 0.0;
  b.amp.poles = {cplx(2.0, 1.0)};
  b.amp.residues = {1.0};
  PureState c;
  c.alpha = 0.5;
  c.amp.poles = {cplx(0.5, 2.0)};
  c.amp.residues = {1.0};
  return {a, b, c};
}

}  // namespace

GamowState expand_in_gamow(const FriedrichsModel& m, const PureState& psi,
                           const std::vector<ResonanceData>& poles, const Contour& contour,
                           const ExpandOptions& opt) {
  validate(m);
  if (m.n_levels() != 1) throw Error(ErrorKind::shape, "pure-state expansion supports one discrete level");
  check_amplitude(m, psi.amp);
  check_not_crossed(contour, psi.amp.poles, "amplitude");
  if (!(opt.t_max > 0)) throw Error(ErrorKind::domain, "t_max must be positive");

  GamowState g;
  g.model = m;
  g.raw = psi;
  g.poles = poles;
  g.contour = contour;
  g.t_max = opt.t_max;

  auto sp = cauchy_at_poles(m, psi.amp);
  for (auto& p : poles) g.coeff.push_back(pole_coefficient(m, p, psi.alpha, psi.amp, sp));

  Contour c = contour;
  for (auto& p : psi.amp.poles)
    if (p.imag() < 0) c.attractors.push_back(p);
  double max_panel = std::min(2.0, 6.0 * pi / opt.t_max);
  double panels = m.omega_max / std::min(0.5, 2.0 * pi / opt.t_max);
  if (panels > opt.max_panels)
    throw Error(ErrorKind::resolution, "t_max too long for the energy grid (" + std::to_string((long)panels) +
                                           " panels); shorten the horizon", opt.t_max);

  auto probes = validation_probes();
  std::vector<cplx> exact;
  for (auto& p : probes) exact.push_back(direct_inner(m, p, psi));

  for (int n = opt.panel_nodes; n <= opt.max_panel_nodes; n *= 2) {
    g.panel_nodes = n;
    fill_background(g, contour_nodes(c, n, max_panel));
    double worst = 0.0;
    for (size_t i = 0; i < probes.size(); ++i)
      worst = std::max(worst, std::abs(pairing(g, probes[i]) - exact[i]));
    g.reconstruction_residual = worst;
    if (worst < opt.reconstruction_tol) {
      if (opt.real_grid) fill_energy_grid(g, std::max(n, 16));
      return g;
    }
  }
  throw Error(ErrorKind::tolerance, "Gamow reconstruction did not reach tolerance",
              g.reconstruction_residual);
}

GamowState expand_in_gamow(const FriedrichsModel& m, const PureState& psi, const ExpandOptions& opt) {
  auto poles = find_all_poles(m);
  auto contour = background_contour(m, poles);
  return expand_in_gamow(m, psi, poles, contour, opt);
}

GamowState evolve_pure(const GamowState& s, double t) {
  if (t < 0) throw Error(ErrorKind::domain, "evolution to negative times is not defined on this space");
  if (s.time + t > s.t_max * (1 + 1e-12))
    throw Error(ErrorKind::resolution, "background nodes do not resolve times beyond t_max");
  GamowState out = s;
  out.time = s.time + t;
  for (size_t i = 0; i < s.poles.size(); ++i) out.coeff[i] *= std::exp(-I * s.poles[i].pole * t);
  for (size_t k = 0; k < s.nodes.size(); ++k) out.background[k] *= std::exp(-I * s.nodes[k].z * t);
  for (size_t k = 0; k < s.energy.size(); ++k) out.psi_plus[k] *= std::exp(-I * s.energy[k] * t);
  return out;
}

ProbeWeights probe_weights(const GamowState& g, const PureState& phi) {
  const auto& m = g.model;
  check_amplitude(m, phi.amp);
  RationalAmplitude sb = phi.amp.mirrored();
  check_not_crossed(g.contour, sb.poles, "probe");
  cplx beta = std::conj(phi.alpha);
  auto sp = cauchy_at_poles(m, sb);
  ProbeWeights w;
  for (auto& p : g.poles) w.pole.push_back(pole_coefficient(m, p, beta, sb, sp));
  w.node.resize(g.nodes.size());
  for (size_t k = 0; k < g.nodes.size(); ++k) {
    cplx z = g.nodes[k].z;
    cplx f2 = m.ff.f2(z);
    cplx val = sb(z);
    if (m.lambda != 0.0) {
      cplx s2 = g.cauchy_nodes[k] - 2.0 * pi * I * f2;  // second sheet, upper lip on the axis
      cplx eta2 = z - m.levels[0] - m.lambda * m.lambda * s2;
      cplx c = sb.is_zero() ? cplx(0.0) : cauchy_from(sb, sp, z, s2);
      val += m.lambda * (beta + m.lambda * c) / eta2;
    }
    w.node[k] = g.nodes[k].w * f2 * val;
  }
  return w;
}

cplx pairing(const GamowState& s, const ProbeWeights& w) {
  cplx v = 0.0;
  for (size_t i = 0; i < s.coeff.size(); ++i) v += w.pole[i] * s.coeff[i];
  for (size_t k = 0; k < s.background.size(); ++k) v += w.node[k] * s.background[k];
  return v;
}

cplx pairing(const GamowState& s, const PureState& phi) { return pairing(s, probe_weights(s, phi)); }

double norm_of(const GamowState& s) {
  double v = 0.0;
  for (size_t i = 0; i < s.poles.size(); ++i)
    if (s.poles[i].bound) v += std::norm(s.coeff[i]);
  for (size_t k = 0; k < s.energy.size(); ++k) v += s.energy_w[k] * std::norm(s.psi_plus[k]);
  return v;
}

double energy_of(const GamowState& s) {
  double v = 0.0;
  for (size_t i = 0; i < s.poles.size(); ++i)
    if (s.poles[i].bound) v += s.poles[i].pole.real() * std::norm(s.coeff[i]);
  for (size_t k = 0; k < s.energy.size(); ++k) v += s.energy_w[k] * s.energy[k] * std::norm(s.psi_plus[k]);
  return v;
}

SurvivalCurve survival_probability(const GamowState& s, const std::vector<double>& ts) {
  if (s.time != 0.0) throw Error(ErrorKind::state, "survival is measured from the initial state");
  ProbeWeights w = probe_weights(s, s.raw);
  std::vector<cplx> amp, z;
  size_t np = s.coeff.size();
  for (size_t i = 0; i < np; ++i) {
    amp.push_back(w.pole[i] * s.coeff[i]);
    z.push_back(s.poles[i].pole);
  }
  for (size_t k = 0; k < s.background.size(); ++k) {
    amp.push_back(w.node[k] * s.background[k]);
    z.push_back(s.nodes[k].z);
  }
  cplx n = 0.0, hz = 0.0;
  for (size_t j = 0; j < amp.size(); ++j) {
    n += amp[j];
    hz += amp[j] * z[j];
  }
  cplx h = hz / n;
  double n2 = std::norm(n);
  SurvivalCurve out;
  for (double t : ts) {
    if (t < 0) throw Error(ErrorKind::domain, "survival probability needs t >= 0");
    if (t > s.t_max * (1 + 1e-12))
      throw Error(ErrorKind::resolution, "background nodes do not resolve times beyond t_max");
    cplx d = 0.0, pole = 0.0, bg = 0.0;
    for (size_t j = 0; j < amp.size(); ++j) {
      d -= amp[j] * expm1c(-I * (z[j] - h) * t);
      cplx term = amp[j] * std::exp(-I * z[j] * t);
      if (j < np)
        pole += term;
      else
        bg += term;
    }
    double omp = (2.0 * std::real(std::conj(n) * d) - std::norm(d)) / n2;
    out.t.push_back(t);
    out.one_minus_p.push_back(omp);
    out.p.push_back(std::norm(n - d) / n2);
    out.p_pole.push_back(std::norm(pole) / n2);
    out.p_background.push_back(std::norm(bg) / n2);
  }
  return out;
}

double ghost_norm_quadrature(const FriedrichsModel& m, const ResonanceData& r,
                             const std::vector<Node>& nodes) {
  if (r.bound) throw Error(ErrorKind::state, "ghost norm is defined for complex poles");
  cplx s2 = 0.0;
  for (auto& nd : nodes) s2 += nd.w * m.ff.f2(nd.z) / (r.pole - nd.z);
  double g = m.scales[r.level];
  return std::abs(r.norm) * (1.0 - m.lambda * m.lambda * g * g * s2.imag() / r.pole.imag());
}

Eigen::MatrixXcd biorthonormality(const FriedrichsModel& m, const std::vector<ResonanceData>& poles,
                                  const std::vector<Node>& nodes) {
  int n = (int)poles.size();
  Eigen::VectorXd g(m.n_levels());
  for (int l = 0; l < m.n_levels(); ++l) g[l] = m.scales[l];
  Eigen::MatrixXcd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& a = poles[i];
      const auto& b = poles[j];
      cplx integral = 0.0;
      for (auto& nd : nodes) integral += nd.w * m.ff.f2(nd.z) / ((a.pole - nd.z) * (b.pole - nd.z));
      cplx ga = (g.cast<cplx>().transpose() * a.amps)(0, 0);
      cplx gb = (g.cast<cplx>().transpose() * b.amps)(0, 0);
      B(i, j) = (a.amps.transpose() * b.amps)(0, 0) + m.lambda * m.lambda * ga * gb * integral;
    }
  return B;
}

}  // namespace irqm

namespace irqm {

KhalfinReport khalfin_crossover(const SurvivalCurve& c) {
  KhalfinReport out;
  std::vector<double> r(c.t.size(), 0.0);
  for (size_t i = 0; i < c.t.size(); ++i)
    r[i] = c.p_pole[i] > 0 ? std::sqrt(c.p_background[i] / c.p_pole[i]) : INFINITY;
  size_t cross = 0;
  for (size_t i = 1; i < r.size(); ++i)
    if (r[i - 1] < 1.0 && r[i] >= 1.0) cross = i;
  if (cross == 0) return out;
  double a = std::log(r[cross - 1]), b = std::log(r[cross]);
  double f = std::isfinite(b) && b != a ? -a / (b - a) : 1.0;
  out.t_star = c.t[cross - 1] + f * (c.t[cross] - c.t[cross - 1]);
  for (size_t i = cross + 1; i < r.size(); ++i)
    if (r[i] < r[i - 1]) out.decreasing_steps++;
  out.increasing_after = out.decreasing_steps == 0;
  return out;
}

}  // namespace irqm
