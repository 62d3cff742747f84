#include "irqm/liouville.hpp"

#include <algorithm>
#include <cmath>

namespace irqm {

// ---- ghost algebra -------------------------------------------------------

void GhostOperator::add(GKet ket, GKet bra, cplx c) {
  if (c == 0.0) return;
  for (auto& t : terms) {
    if (t.ket.label == ket.label && t.ket.kind == ket.kind && t.bra.label == bra.label &&
        t.bra.kind == bra.kind) {
      t.c += c;
      return;
    }
  }
  terms.push_back({ket, bra, c});
}

GhostOperator GhostOperator::operator+(const GhostOperator& o) const {
  GhostOperator r = *this;
  for (auto& t : o.terms) r.add(t.ket, t.bra, t.c);
  return r;
}

GhostOperator GhostOperator::scaled(cplx s) const {
  GhostOperator r;
  for (auto& t : terms) r.add(t.ket, t.bra, s * t.c);
  return r;
}

int GhostAlgebra::add_label(bool is_ghost) {
  ghost.push_back(is_ghost);
  return (int)ghost.size() - 1;
}

double GhostAlgebra::pairing(GKet bra, GKet ket) const {
  if (bra.label != ket.label) return 0.0;
  if (!ghost.at(bra.label)) return 1.0;
  return bra.kind != ket.kind ? 1.0 : 0.0;
}

GhostOperator GhostAlgebra::product(const GhostOperator& a, const GhostOperator& b) const {
  GhostOperator r;
  for (auto& x : a.terms)
    for (auto& y : b.terms)
      if (pairing(x.bra, y.ket) != 0.0) r.add(x.ket, y.bra, x.c * y.c);
  // drop exact cancellations
  std::erase_if(r.terms, [](const GDyad& d) { return d.c == 0.0; });
  return r;
}

GhostOperator GhostAlgebra::power(const GhostOperator& a, int n) const {
  if (n < 1) throw Error(ErrorKind::domain, "power must be at least one");
  GhostOperator r = a;
  for (int k = 1; k < n; ++k) r = product(r, a);
  return r;
}

cplx GhostAlgebra::trace(const GhostOperator& a) const {
  cplx s = 0.0;
  for (auto& t : a.terms) s += t.c * pairing(t.bra, t.ket);
  return s;
}

// ---- states ----------------------------------------------------------------

cplx LiouvilleState::kernel(int a, int b) const {
  cplx s = 0.0;
  int n = (int)kernel_vectors.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s += kernel_weights(i, j) * kernel_vectors[i](a) * std::conj(kernel_vectors[j](b));
  return s;
}

void LiouvilleState::riesz(int a, int b, double& sigma, double& nu) const {
  sigma = 0.5 * (grid.at(a) + grid.at(b));
  nu = grid[a] - grid[b];
}

LiouvilleState empty_state(const FriedrichsModel& m, const std::vector<double>& grid,
                           const std::vector<double>& w) {
  if (grid.size() != w.size()) throw Error(ErrorKind::shape, "grid and weights differ in length");
  LiouvilleState r;
  r.model = m;
  r.grid = grid;
  r.grid_w = w;
  int n = (int)grid.size();
  r.rho_sigma.assign(n, 0.0);
  r.rho_0w = Eigen::VectorXcd::Zero(n);
  r.rho_w0 = Eigen::VectorXcd::Zero(n);
  r.kernel_weights = Eigen::MatrixXcd::Zero(0, 0);
  r.ghost_block = Eigen::MatrixXcd::Zero(0, 0);
  r.rho_n0 = Eigen::VectorXcd::Zero(0);
  r.rho_0n = Eigen::VectorXcd::Zero(0);
  return r;
}

LiouvilleState from_pure(const GamowState& g) {
  if (g.energy.empty() || g.coeff.size() != g.poles.size())
    throw Error(ErrorKind::state, "pure state has not been expanded");
  const auto& m = g.model;
  LiouvilleState r = empty_state(m, g.energy, g.energy_w);
  r.time = g.time;

  cplx bound_amp = 0.0;
  std::vector<cplx> ghost_amp;
  if (m.lambda == 0.0) {
    r.has_bound = true;
    r.bound_energy = m.levels[0];
    bound_amp = g.raw.alpha * std::exp(-I * m.levels[0] * g.time);
  } else {
    for (size_t i = 0; i < g.poles.size(); ++i) {
      const auto& p = g.poles[i];
      if (p.bound) {
        if (r.has_bound) throw Error(ErrorKind::state, "more than one bound state");
        r.has_bound = true;
        r.bound_energy = p.pole.real();
        bound_amp = g.coeff[i];
      } else {
        r.ghosts.push_back({p.pole, p.gamma});
        ghost_amp.push_back(g.coeff[i]);
      }
    }
  }
  r.rho0 = r.has_bound ? std::norm(bound_amp) : 0.0;

  int n = r.size();
  Eigen::VectorXcd cont(n);
  for (int k = 0; k < n; ++k) cont(k) = g.psi_plus[k];
  if (r.has_bound) {
    r.rho_0w = bound_amp * cont.conjugate();
    r.rho_w0 = cont * std::conj(bound_amp);
  }
  r.kernel_vectors = {cont};
  r.kernel_weights = Eigen::MatrixXcd::Ones(1, 1);

  int ng = (int)r.ghosts.size();
  r.ghost_block.resize(ng, ng);
  r.rho_n0 = Eigen::VectorXcd::Zero(ng);
  r.rho_0n = Eigen::VectorXcd::Zero(ng);
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) r.ghost_block(i, j) = ghost_amp[i] * std::conj(ghost_amp[j]);
    if (r.has_bound) {
      r.rho_n0(i) = ghost_amp[i] * std::conj(bound_amp);
      r.rho_0n(i) = bound_amp * std::conj(ghost_amp[i]);
    }
  }
  return r;
}

LiouvilleState from_poles(const FriedrichsModel& m, const std::vector<ResonanceData>& poles,
                          const Eigen::MatrixXcd& block) {
  int n = (int)poles.size();
  if (block.rows() != n || block.cols() != n)
    throw Error(ErrorKind::shape, "pole block does not match the number of poles");
  LiouvilleState r = empty_state(m, {}, {});
  for (auto& p : poles) {
    if (p.bound) throw Error(ErrorKind::precondition, "pole-only states take complex poles");
    r.ghosts.push_back({p.pole, p.gamma});
  }
  r.ghost_block = block;
  r.rho_n0 = Eigen::VectorXcd::Zero(n);
  r.rho_0n = Eigen::VectorXcd::Zero(n);
  return r;
}

// ---- observables -----------------------------------------------------------

Observable identity_observable(const LiouvilleState& like) {
  Observable o;
  int n = like.size();
  int ng = (int)like.ghosts.size();
  o.a0 = 1.0;
  o.a_sigma.assign(n, 1.0);
  o.a_0w = Eigen::VectorXcd::Zero(n);
  o.a_w0 = Eigen::VectorXcd::Zero(n);
  o.kernel_weights = Eigen::MatrixXcd::Zero(0, 0);
  o.tilde_block = Eigen::MatrixXcd::Zero(ng, ng);
  o.tilde_n0 = Eigen::VectorXcd::Zero(ng);
  o.tilde_0n = Eigen::VectorXcd::Zero(ng);
  return o;
}

Observable energy_observable(const LiouvilleState& like) {
  return spectral_observable(like, [](double e) { return e; });
}

Observable projector_observable(const LiouvilleState& like, cplx bound_amp, const Eigen::VectorXcd& cont) {
  if (cont.size() != like.size()) throw Error(ErrorKind::shape, "projector amplitude does not match the grid");
  Observable o = identity_observable(like);
  o.a0 = std::norm(bound_amp);
  std::fill(o.a_sigma.begin(), o.a_sigma.end(), 0.0);
  o.a_w0 = cont * std::conj(bound_amp);
  o.a_0w = bound_amp * cont.conjugate();
  o.kernel_vectors = {cont};
  o.kernel_weights = Eigen::MatrixXcd::Ones(1, 1);
  return o;
}

Observable sum(const Observable& a, const Observable& b) {
  if (a.a_sigma.size() != b.a_sigma.size() || a.tilde_block.rows() != b.tilde_block.rows())
    throw Error(ErrorKind::shape, "observables live on different grids");
  Observable o = a;
  o.a0 += b.a0;
  for (size_t k = 0; k < o.a_sigma.size(); ++k) o.a_sigma[k] += b.a_sigma[k];
  o.a_0w += b.a_0w;
  o.a_w0 += b.a_w0;
  int na = (int)a.kernel_vectors.size(), nb = (int)b.kernel_vectors.size();
  for (auto& v : b.kernel_vectors) o.kernel_vectors.push_back(v);
  o.kernel_weights = Eigen::MatrixXcd::Zero(na + nb, na + nb);
  if (na) o.kernel_weights.topLeftCorner(na, na) = a.kernel_weights;
  if (nb) o.kernel_weights.bottomRightCorner(nb, nb) = b.kernel_weights;
  o.tilde_block += b.tilde_block;
  o.tilde_n0 += b.tilde_n0;
  o.tilde_0n += b.tilde_0n;
  return o;
}

void check_hermitian(const Observable& o) {
  auto bad = [](double d, double scale) { return d > 1e-12 * std::max(1.0, scale); };
  if (bad((o.a_0w - o.a_w0.conjugate()).norm(), o.a_0w.norm()))
    throw Error(ErrorKind::hermiticity, "mixed coordinates are not conjugate");
  if (o.kernel_weights.size() &&
      bad((o.kernel_weights - o.kernel_weights.adjoint()).norm(), o.kernel_weights.norm()))
    throw Error(ErrorKind::hermiticity, "kernel is not Hermitian");
  if (o.tilde_block.size() && bad((o.tilde_block - o.tilde_block.adjoint()).norm(), o.tilde_block.norm()))
    throw Error(ErrorKind::hermiticity, "pole part is not Hermitian");
  if (bad((o.tilde_n0 - o.tilde_0n.conjugate()).norm(), o.tilde_n0.norm()))
    throw Error(ErrorKind::hermiticity, "mixed pole coordinates are not conjugate");
}

// ---- pairings --------------------------------------------------------------

namespace {

void same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::shape, "states live on different grids");
  for (size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) throw Error(ErrorKind::shape, "states live on different grids");
}

// G_ij = sum_k w_k conj(u_i(k)) v_j(k)
Eigen::MatrixXcd gram(const std::vector<double>& w, const std::vector<Eigen::VectorXcd>& u,
                      const std::vector<Eigen::VectorXcd>& v) {
  Eigen::MatrixXcd g(u.size(), v.size());
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), (Eigen::Index)w.size());
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) g(i, j) = u[i].dot(wv.cast<cplx>().cwiseProduct(v[j]));
  return g;
}

}  // namespace

cplx liouville_inner(const LiouvilleState& a, const LiouvilleState& b) {
  same_grid(a.grid, b.grid);
  cplx s = a.rho0 * b.rho0;
  for (int k = 0; k < a.size(); ++k) {
    double w = a.grid_w[k];
    s += w * (std::conj(a.rho_0w(k)) * b.rho_0w(k) + std::conj(a.rho_w0(k)) * b.rho_w0(k) +
              a.rho_sigma[k] * b.rho_sigma[k]);
  }
  if (!a.kernel_vectors.empty() && !b.kernel_vectors.empty()) {
    Eigen::MatrixXcd g = gram(a.grid_w, a.kernel_vectors, b.kernel_vectors);
    Eigen::MatrixXcd m = a.kernel_weights.adjoint() * g * b.kernel_weights;
    s += (m.array() * g.conjugate().array()).sum();
  }
  return s;
}

GhostAlgebra algebra_of(const LiouvilleState& r) {
  GhostAlgebra alg;
  if (r.has_bound) alg.add_label(false);
  for (size_t i = 0; i < r.ghosts.size(); ++i) alg.add_label(true);
  return alg;
}

GhostOperator pole_operator(const LiouvilleState& r) {
  GhostOperator op;
  int off = r.has_bound ? 1 : 0;
  int ng = (int)r.ghosts.size();
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) op.add({i + off, Kind::bar}, {j + off, Kind::bar}, r.ghost_block(i, j));
    if (r.has_bound) {
      op.add({i + off, Kind::bar}, {0, Kind::bar}, r.rho_n0(i));
      op.add({0, Kind::bar}, {i + off, Kind::bar}, r.rho_0n(i));
    }
  }
  return op;
}

namespace {

double kernel_diagonal(const LiouvilleState& r, int k) { return r.kernel(k, k).real(); }

}  // namespace

cplx generalized_trace(const LiouvilleState& r) {
  cplx s = r.rho0;
  for (int k = 0; k < r.size(); ++k) s += r.grid_w[k] * (r.rho_sigma[k] + kernel_diagonal(r, k));
  s += algebra_of(r).trace(pole_operator(r));
  return s;
}

double expectation(const LiouvilleState& r, const Observable& o) {
  int n = r.size();
  int ng = (int)r.ghosts.size();
  if ((int)o.a_sigma.size() != n || o.a_0w.size() != n || o.a_w0.size() != n)
    throw Error(ErrorKind::shape, "observable grid does not match the state");
  bool pole_part = o.tilde_block.size() + o.tilde_n0.size() + o.tilde_0n.size() > 0 &&
                   (!o.tilde_block.isZero(0.0) || !o.tilde_n0.isZero(0.0) || !o.tilde_0n.isZero(0.0));
  if (pole_part && (o.tilde_block.rows() != ng || o.tilde_block.cols() != ng || o.tilde_n0.size() != ng ||
                    o.tilde_0n.size() != ng))
    throw Error(ErrorKind::shape, "observable pole part does not match the state");
  check_hermitian(o);

  cplx s = r.rho0 * o.a0;
  for (int k = 0; k < n; ++k) {
    s += r.grid_w[k] * (r.rho_0w(k) * o.a_w0(k) + r.rho_w0(k) * o.a_0w(k) +
                        o.a_sigma[k] * (r.rho_sigma[k] + kernel_diagonal(r, k)));
  }
  if (!r.kernel_vectors.empty() && !o.kernel_vectors.empty()) {
    Eigen::MatrixXcd h = gram(r.grid_w, o.kernel_vectors, r.kernel_vectors);
    s += (r.kernel_weights * h.adjoint() * o.kernel_weights * h).trace();
  }
  for (int i = 0; pole_part && i < ng; ++i) {
    for (int j = 0; j < ng; ++j) s += r.ghost_block(i, j) * o.tilde_block(j, i);
    s += r.rho_n0(i) * o.tilde_0n(i) + r.rho_0n(i) * o.tilde_n0(i);
  }
  cplx tr = generalized_trace(r);
  if (std::abs(tr) == 0.0) throw Error(ErrorKind::state, "state has zero trace");
  return (s / tr).real();
}

LiouvilleState evolve(const LiouvilleState& r, double t) {
  if (t < 0) throw Error(ErrorKind::domain, "evolution to negative times is not defined on this space");
  LiouvilleState out = r;
  out.time = r.time + t;
  double eb = r.bound_energy;
  for (int k = 0; k < r.size(); ++k) {
    double e = r.grid[k];
    out.rho_0w(k) *= std::exp(-I * (eb - e) * t);
    out.rho_w0(k) *= std::exp(-I * (e - eb) * t);
  }
  for (auto& v : out.kernel_vectors)
    for (int k = 0; k < r.size(); ++k) v(k) *= std::exp(-I * r.grid[k] * t);
  int ng = (int)r.ghosts.size();
  for (int i = 0; i < ng; ++i) {
    cplx zi = r.ghosts[i].z;
    for (int j = 0; j < ng; ++j) out.ghost_block(i, j) *= std::exp(-I * (zi - std::conj(r.ghosts[j].z)) * t);
    out.rho_n0(i) *= std::exp(-I * (zi - eb) * t);
    out.rho_0n(i) *= std::exp(-I * (eb - std::conj(zi)) * t);
  }
  for (auto& x : out.extra) x.coeff *= std::exp(-I * (x.sigma + x.zeta) * t);
  return out;
}

namespace {

double slowest_rate(const LiouvilleState& r, bool& any) {
  any = false;
  double g = INFINITY;
  int ng = (int)r.ghosts.size();
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) {
      if (r.ghost_block(i, j) != 0.0) {
        any = true;
        g = std::min(g, 0.5 * (r.ghosts[i].gamma + r.ghosts[j].gamma));
      }
    }
    if (r.rho_n0(i) != 0.0 || r.rho_0n(i) != 0.0) {
      any = true;
      g = std::min(g, 0.5 * r.ghosts[i].gamma);
    }
  }
  return any ? g : 0.0;
}

}  // namespace

EquilibriumParts equilibrium_parts(const LiouvilleState& r, double t) {
  LiouvilleState e = evolve(r, t);
  EquilibriumParts out;
  bool any = false;
  out.gamma_min = slowest_rate(e, any);
  out.no_ghosts = !any;

  LiouvilleState star = empty_state(e.model, e.grid, e.grid_w);
  star.time = e.time;
  star.has_bound = e.has_bound;
  star.bound_energy = e.bound_energy;
  star.rho0 = e.rho0;
  for (int k = 0; k < e.size(); ++k) star.rho_sigma[k] = e.rho_sigma[k] + kernel_diagonal(e, k);
  out.rho_star = star;

  LiouvilleState one = empty_state(e.model, e.grid, e.grid_w);
  one.time = e.time;
  one.has_bound = e.has_bound;
  one.bound_energy = e.bound_energy;
  one.ghosts = e.ghosts;
  double grow = std::exp(out.gamma_min * e.time);
  one.ghost_block = e.ghost_block * grow;
  one.rho_n0 = e.rho_n0 * grow;
  one.rho_0n = e.rho_0n * grow;
  out.rho_1 = one;
  return out;
}

double pole_block_norm(const LiouvilleState& r) {
  return std::sqrt(r.ghost_block.squaredNorm() + r.rho_n0.squaredNorm() + r.rho_0n.squaredNorm());
}

DecoherenceProfile decoherence_profile(const LiouvilleState& r, const std::vector<double>& ts) {
  DecoherenceProfile d;
  for (double t : ts) {
    LiouvilleState e = evolve(r, t);
    d.t.push_back(t);
    d.mass.push_back(e.rho_n0.squaredNorm() + e.rho_0n.squaredNorm() + e.ghost_block.squaredNorm());
  }
  return d;
}

LyapunovCurve lyapunov_Y(const LiouvilleState& r, const std::vector<double>& ts, bool signed_variant) {
  int ng = (int)r.ghosts.size();
  if (signed_variant) {
    for (int i = 0; i < ng; ++i)
      if (r.ghost_block(i, i).real() < -1e-14)
        throw Error(ErrorKind::precondition, "diagonal pole coefficient is negative");
  }
  double constant = r.rho0;
  for (int k = 0; k < r.size(); ++k) constant += r.grid_w[k] * r.rho_sigma[k];
  LyapunovCurve c;
  for (double t : ts) {
    if (t < 0) throw Error(ErrorKind::domain, "negative time");
    double y = constant, yd = 0.0, yl = r.rho0 * r.rho0;
    for (int i = 0; i < ng; ++i) {
      double g = r.ghosts[i].gamma;
      double cii = r.ghost_block(i, i).real();
      y += cii * std::exp(-g * t);
      yd += g * cii * std::exp(-g * t);
      yl += std::norm(r.ghost_block(i, i)) * std::exp(-2.0 * g * t);
    }
    c.t.push_back(t);
    c.y.push_back(-y);
    c.ydot.push_back(yd);
    c.y_linear.push_back(-yl);
  }
  return c;
}

}  // namespace irqm
