#include "irqm/oracle.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irqm {

namespace {

struct Secular {
  const std::vector<double>& q;   // sorted active poles
  const std::vector<double>& z2;  // squared couplings, same order
  double head;

  // F at q[b] + x, with q[b] taken as the origin; b = -1 means absolute x
  double value(int b, double x, double* deriv = nullptr) const {
    double origin = b >= 0 ? q[b] : 0.0;
    double f = origin + x - head, d = 1.0;
    for (size_t j = 0; j < q.size(); ++j) {
      double diff = (q[j] - origin) - x;
      double t = z2[j] / diff;
      f += t;
      d += t / diff;
    }
    if (deriv) *deriv = d;
    return f;
  }

  // split derivative into poles at index <= i and > i
  void split(int b, double x, int i, double& f, double& dl, double& dr, double& mag) const {
    double origin = q[b];
    f = origin + x - head;
    mag = std::abs(origin + x) + std::abs(head);
    dl = 0.0;
    dr = 1.0;
    for (int j = 0; j <= i; ++j) {
      double inv = 1.0 / ((q[j] - origin) - x);
      double t = z2[j] * inv;
      f += t;
      mag += std::abs(t);
      dl += t * inv;
    }
    for (size_t j = i + 1; j < q.size(); ++j) {
      double inv = 1.0 / ((q[j] - origin) - x);
      double t = z2[j] * inv;
      f += t;
      mag += std::abs(t);
      dr += t * inv;
    }
  }
};

// root of F strictly between q[i] and q[i+1], returned as (base, offset)
void interior_root(const Secular& s, int i, int& base, double& off) {
  double gap = s.q[i + 1] - s.q[i];
  double fmid = s.value(i, 0.5 * gap);
  base = fmid > 0 ? i : i + 1;
  double a = s.q[i] - s.q[base], b = s.q[i + 1] - s.q[base];
  double lo = fmid > 0 ? a : 0.5 * (a + b);
  double hi = fmid > 0 ? 0.5 * (a + b) : b;
  double x = 0.5 * (lo + hi);
  if (fmid == 0) {
    off = 0.5 * (a + b);
    return;
  }
  for (int it = 0; it < 100; ++it) {
    double f, dl, dr, mag;
    s.split(base, x, i, f, dl, dr, mag);
    if (std::abs(f) <= 2e-16 * mag) break;
    if (f < 0)
      lo = x;
    else
      hi = x;
    double sl = (a - x) * (a - x) * dl, sr = (b - x) * (b - x) * dr;
    double c = f - sl / (a - x) - sr / (b - x);
    // c (a-y)(b-y) + sl (b-y) + sr (a-y) = 0
    double A = c, B = -(c * (a + b) + sl + sr), C = c * a * b + sl * b + sr * a;
    double y;
    if (std::abs(A) < 1e-300) {
      y = -C / B;
    } else {
      double disc = std::max(0.0, B * B - 4 * A * C);
      double qq = -0.5 * (B + std::copysign(std::sqrt(disc), B));
      double y1 = qq / A, y2 = C / qq;
      y = (y1 > a && y1 < b) ? y1 : y2;
    }
    if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
    double step = std::abs(y - x);
    x = y;
    if (step <= 4e-16 * std::max(std::abs(x), 1e-300) || hi - lo <= 4e-16 * std::max(std::abs(lo), std::abs(hi)))
      break;
  }
  off = x;
}

// root outside the pole range, as an offset from the nearest pole
double outer_root(const Secular& s, bool below, int& base) {
  double spread = 1.0;
  for (double v : s.z2) spread += v;
  if (s.q.empty()) {
    base = -1;
    return s.head;
  }
  base = below ? 0 : (int)s.q.size() - 1;
  spread += std::abs(s.head - s.q[base]);
  double lo = below ? -spread : 0.0, hi = below ? 0.0 : spread;
  auto f = [&](double x) {
    if (x == 0.0) return below ? 1e300 : -1e300;
    return s.value(base, x);
  };
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

DiscretizedHamiltonian discretize_grid(const FriedrichsModel& m, const std::vector<double>& nodes,
                                       const std::vector<double>& weights) {
  validate(m);
  DiscretizedHamiltonian h;
  h.model = m;
  h.nodes = nodes;
  h.weights = weights;
  int nl = m.n_levels(), nn = (int)nodes.size();
  h.coupling.resize(nn);
  for (int k = 0; k < nn; ++k) h.coupling[k] = m.lambda * m.ff.f(nodes[k]) * std::sqrt(weights[k]);

  Eigen::VectorXd sc(nl), lv(nl);
  for (int n = 0; n < nl; ++n) {
    sc[n] = m.scales[n];
    lv[n] = m.levels[n];
  }
  double snorm = sc.norm();
  Eigen::VectorXd chi = snorm > 0 ? Eigen::VectorXd(sc / snorm) : Eigen::VectorXd::Unit(nl, 0);
  // orthonormal completion of chi
  Eigen::MatrixXd basis(nl, nl);
  basis.col(0) = chi;
  if (nl > 1) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(chi);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd comp = Q.rightCols(nl - 1);
    Eigen::MatrixXd hc = comp.transpose() * lv.asDiagonal() * comp;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hc);
    basis.rightCols(nl - 1) = comp * es.eigenvectors();
  }
  h.level_basis = basis;
  h.head = chi.dot(lv.asDiagonal() * chi);

  // pole list: complement levels then nodes
  std::vector<double> z;
  for (int i = 1; i < nl; ++i) {
    Eigen::VectorXd u = basis.col(i);
    h.poles.push_back(u.dot(lv.asDiagonal() * u));
    z.push_back(u.dot(lv.asDiagonal() * chi));
  }
  for (int k = 0; k < nn; ++k) {
    h.poles.push_back(nodes[k]);
    z.push_back(snorm * h.coupling[k]);
  }
  h.weights_z = z;
  int np = (int)h.poles.size();
  double zscale = 0.0;
  for (double v : z) zscale = std::max(zscale, std::abs(v));

  std::vector<int> active, defl;
  for (int j = 0; j < np; ++j) {
    if (std::abs(z[j]) <= 1e-15 * std::max(1.0, zscale) || z[j] == 0.0)
      defl.push_back(j);
    else
      active.push_back(j);
  }
  std::sort(active.begin(), active.end(), [&](int a, int b) { return h.poles[a] < h.poles[b]; });
  h.pole_order = active;
  std::vector<double> q, z2;
  for (int j : active) {
    q.push_back(h.poles[j]);
    z2.push_back(z[j] * z[j]);
  }
  for (size_t i = 0; i + 1 < q.size(); ++i)
    if (!(q[i + 1] > q[i])) throw Error(ErrorKind::model, "coincident coupled energies in the discretisation");

  Secular sec{q, z2, h.head};
  int na = (int)q.size();
  // roots: one below, one per gap, one above (just one if no active poles)
  auto push_root = [&](int b, double off) {
    double e = (b >= 0 ? q[b] : 0.0) + off;
    double d;
    sec.value(b, off, &d);
    h.energies.push_back(e);
    h.base.push_back(b);
    h.offset.push_back(off);
    h.head_amp.push_back(1.0 / std::sqrt(d));
    h.deflated.push_back(-1);
  };
  if (na == 0) {
    push_root(-1, h.head);
  } else {
    int ob;
    double off = outer_root(sec, true, ob);
    push_root(ob, off);
    for (int i = 0; i + 1 < na; ++i) {
      int b;
      double off;
      interior_root(sec, i, b, off);
      push_root(b, off);
    }
    off = outer_root(sec, false, ob);
    push_root(ob, off);
  }
  for (int j : defl) {
    h.energies.push_back(h.poles[j]);
    h.base.push_back(-1);
    h.offset.push_back(h.poles[j]);
    h.head_amp.push_back(0.0);
    h.deflated.push_back(j);
  }
  return h;
}

DiscretizedHamiltonian discretize(const FriedrichsModel& m, int n) {
  if (n < 256) throw Error(ErrorKind::resolution, "oracle needs at least 256 continuum nodes");
  double w = m.omega_max / n;
  std::vector<double> nodes(n), weights(n, w);
  for (int k = 0; k < n; ++k) nodes[k] = (k + 0.5) * w;
  return discretize_grid(m, nodes, weights);
}

namespace {

// E_j - pole p, computed relative to the base pole
inline double gap_to(const DiscretizedHamiltonian& h, int j, int p) {
  int b = h.base[j];
  if (b < 0) return h.offset[j] - h.poles[p];
  double qb = h.poles[h.pole_order[b]];
  return h.offset[j] - (h.poles[p] - qb);
}

}  // namespace

double DiscretizedHamiltonian::component(int j, int b) const {
  int nl = n_levels();
  if (deflated[j] >= 0) {
    int p = deflated[j];
    if (p < nl - 1) return b < nl ? level_basis(b, p + 1) : 0.0;
    return b == nl + (p - (nl - 1)) ? 1.0 : 0.0;
  }
  double a = head_amp[j];
  if (b < nl) {
    double v = level_basis(b, 0);
    for (int p = 0; p < nl - 1; ++p) {
      if (weights_z[p] == 0.0) continue;
      v += weights_z[p] / gap_to(*this, j, p) * level_basis(b, p + 1);
    }
    return a * v;
  }
  int p = nl - 1 + (b - nl);
  if (weights_z[p] == 0.0) return 0.0;
  return a * weights_z[p] / gap_to(*this, j, p);
}

Eigen::VectorXd DiscretizedHamiltonian::eigenvector(int j) const {
  Eigen::VectorXd v(dim());
  for (int b = 0; b < dim(); ++b) v[b] = component(j, b);
  return v;
}

Eigen::MatrixXd DiscretizedHamiltonian::dense() const {
  int nl = n_levels(), d = dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (int n = 0; n < nl; ++n) H(n, n) = model.levels[n];
  for (int k = 0; k < n_nodes(); ++k) {
    H(nl + k, nl + k) = nodes[k];
    for (int n = 0; n < nl; ++n) H(n, nl + k) = H(nl + k, n) = model.scales[n] * coupling[k];
  }
  return H;
}

double DiscretizedHamiltonian::residual() const {
  int nl = n_levels(), nn = n_nodes();
  double worst = 0.0;
  for (size_t j = 0; j < energies.size(); ++j) {
    Eigen::VectorXd v = eigenvector((int)j);
    double e = energies[j];
    double cv = 0.0, sv = 0.0;
    for (int k = 0; k < nn; ++k) cv += coupling[k] * v[nl + k];
    for (int n = 0; n < nl; ++n) sv += model.scales[n] * v[n];
    double r2 = 0.0;
    for (int n = 0; n < nl; ++n) {
      double r = (model.levels[n] - e) * v[n] + model.scales[n] * cv;
      r2 += r * r;
    }
    for (int k = 0; k < nn; ++k) {
      double r = (nodes[k] - e) * v[nl + k] + coupling[k] * sv;
      r2 += r * r;
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  return worst;
}

Eigen::VectorXcd to_eigenbasis(const DiscretizedHamiltonian& h, const OracleVector& psi) {
  int nl = h.n_levels(), nn = h.n_nodes();
  if (psi.size() != h.dim()) throw Error(ErrorKind::shape, "state does not match the discretisation");
  Eigen::VectorXcd lvl = h.level_basis.transpose() * psi.head(nl);
  int ne = (int)h.energies.size();
  Eigen::VectorXcd c(ne);
  for (int j = 0; j < ne; ++j) {
    if (h.deflated[j] >= 0) {
      int p = h.deflated[j];
      c[j] = p < nl - 1 ? lvl[p + 1] : psi[nl + (p - (nl - 1))];
      continue;
    }
    cplx acc = lvl[0];
    for (int p = 0; p < nl - 1; ++p)
      if (h.weights_z[p] != 0.0) acc += h.weights_z[p] / gap_to(h, j, p) * lvl[p + 1];
    for (int k = 0; k < nn; ++k) {
      int p = nl - 1 + k;
      if (h.weights_z[p] != 0.0) acc += h.weights_z[p] / gap_to(h, j, p) * psi[nl + k];
    }
    c[j] = h.head_amp[j] * acc;
  }
  return c;
}

OracleVector from_eigenbasis(const DiscretizedHamiltonian& h, const Eigen::VectorXcd& c) {
  int nl = h.n_levels(), nn = h.n_nodes();
  Eigen::VectorXcd lvl = Eigen::VectorXcd::Zero(nl);
  OracleVector out = OracleVector::Zero(h.dim());
  for (int j = 0; j < (int)h.energies.size(); ++j) {
    if (h.deflated[j] >= 0) {
      int p = h.deflated[j];
      if (p < nl - 1)
        lvl[p + 1] += c[j];
      else
        out[nl + (p - (nl - 1))] += c[j];
      continue;
    }
    cplx a = h.head_amp[j] * c[j];
    lvl[0] += a;
    for (int p = 0; p < nl - 1; ++p)
      if (h.weights_z[p] != 0.0) lvl[p + 1] += a * (h.weights_z[p] / gap_to(h, j, p));
    for (int k = 0; k < nn; ++k) {
      int p = nl - 1 + k;
      if (h.weights_z[p] != 0.0) out[nl + k] += a * (h.weights_z[p] / gap_to(h, j, p));
    }
  }
  out.head(nl) = h.level_basis * lvl;
  return out;
}

std::vector<OracleVector> exact_evolve(const DiscretizedHamiltonian& h, const OracleVector& psi0,
                                       const std::vector<double>& ts) {
  Eigen::VectorXcd c = to_eigenbasis(h, psi0);
  std::vector<OracleVector> out;
  for (double t : ts) {
    Eigen::VectorXcd ct(c.size());
    for (int j = 0; j < c.size(); ++j) ct[j] = std::exp(-I * h.energies[j] * t) * c[j];
    out.push_back(from_eigenbasis(h, ct));
  }
  return out;
}

std::vector<cplx> transition_amplitude(const DiscretizedHamiltonian& h, const OracleVector& phi,
                                       const OracleVector& psi0, const std::vector<double>& ts) {
  Eigen::VectorXcd c = to_eigenbasis(h, psi0), d = to_eigenbasis(h, phi);
  std::vector<cplx> out;
  for (double t : ts) {
    cplx acc = 0.0;
    for (int j = 0; j < c.size(); ++j) acc += std::conj(d[j]) * c[j] * std::exp(-I * h.energies[j] * t);
    out.push_back(acc);
  }
  return out;
}

std::vector<cplx> survival_amplitude(const DiscretizedHamiltonian& h, const OracleVector& psi0,
                                     const std::vector<double>& ts) {
  Eigen::VectorXcd c = to_eigenbasis(h, psi0);
  std::vector<cplx> out;
  for (double t : ts) {
    cplx acc = 0.0;
    for (int j = 0; j < c.size(); ++j) acc += std::norm(c[j]) * std::exp(-I * h.energies[j] * t);
    out.push_back(acc);
  }
  return out;
}

namespace {

std::vector<Eigen::VectorXcd> coeffs(const DiscretizedHamiltonian& h, const std::vector<OracleVector>& vs) {
  std::vector<Eigen::VectorXcd> out;
  for (auto& v : vs) out.push_back(to_eigenbasis(h, v));
  return out;
}

}  // namespace

std::vector<cplx> density_expectation(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                      const LowRankDensity& obs, const std::vector<double>& ts) {
  auto C = coeffs(h, rho.vectors);
  auto D = coeffs(h, obs.vectors);
  int na = (int)C.size(), nc = (int)D.size();
  std::vector<cplx> out;
  for (double t : ts) {
    Eigen::VectorXcd ph(h.energies.size());
    for (int j = 0; j < ph.size(); ++j) ph[j] = std::exp(-I * h.energies[j] * t);
    // overlaps <phi_d | psi_a(t)>
    Eigen::MatrixXcd ov(nc, na);
    for (int d = 0; d < nc; ++d)
      for (int a = 0; a < na; ++a) ov(d, a) = (D[d].conjugate().array() * C[a].array() * ph.array()).sum();
    cplx acc = 0.0;
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < na; ++b)
        for (int c = 0; c < nc; ++c)
          for (int d = 0; d < nc; ++d)
            acc += rho.weights(a, b) * obs.weights(c, d) * ov(d, a) * std::conj(ov(c, b));
    out.push_back(acc);
  }
  return out;
}

std::vector<double> density_trace(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                  const std::vector<double>& ts) {
  auto C = coeffs(h, rho.vectors);
  int na = (int)C.size();
  std::vector<double> out;
  for (double t : ts) {
    std::vector<Eigen::VectorXcd> Ct;
    for (auto& c : C) {
      Eigen::VectorXcd v(c.size());
      for (int j = 0; j < c.size(); ++j) v[j] = std::exp(-I * h.energies[j] * t) * c[j];
      Ct.push_back(v);
    }
    cplx acc = 0.0;
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < na; ++b) acc += rho.weights(a, b) * Ct[b].dot(Ct[a]);
    out.push_back(acc.real());
  }
  return out;
}

std::vector<double> density_energy(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                   const std::vector<double>& ts) {
  auto C = coeffs(h, rho.vectors);
  int na = (int)C.size();
  Eigen::Map<const Eigen::VectorXd> e(h.energies.data(), h.energies.size());
  std::vector<double> out;
  for (double t : ts) {
    cplx acc = 0.0;
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < na; ++b) {
        Eigen::VectorXcd pa(C[a].size()), pb(C[b].size());
        for (int j = 0; j < pa.size(); ++j) {
          pa[j] = std::exp(-I * h.energies[j] * t) * C[a][j];
          pb[j] = std::exp(-I * h.energies[j] * t) * C[b][j];
        }
        acc += rho.weights(a, b) * (pb.conjugate().array() * e.array() * pa.array()).sum();
      }
    out.push_back(acc.real());
  }
  return out;
}

Eigen::MatrixXcd exact_density_evolve(const DiscretizedHamiltonian& h, const Eigen::MatrixXcd& rho0,
                                      double t) {
  if (rho0.rows() != h.dim() || rho0.cols() != h.dim())
    throw Error(ErrorKind::shape, "density matrix does not match the discretisation");
  if (h.dim() > 4000) throw Error(ErrorKind::resolution, "dense evolution limited to small systems");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
  Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
  Eigen::VectorXcd ph(h.dim());
  for (int j = 0; j < h.dim(); ++j) ph[j] = std::exp(-I * es.eigenvalues()[j] * t);
  Eigen::MatrixXcd U = V * ph.asDiagonal() * V.adjoint();
  return U * rho0 * U.adjoint();
}

}  // namespace irqm
