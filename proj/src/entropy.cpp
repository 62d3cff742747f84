#include "irqm/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace irqm {

int slot_count(const LiouvilleState& r) {
  int n = (int)r.ghosts.size();
  return n * n + (r.has_bound ? 2 * n : 0);
}

EntropyProjector build_projector(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q, bool require_idempotent) {
  if (p.rows() < 1) throw Error(ErrorKind::precondition, "projector needs at least one ghost slot");
  if (p.rows() != p.cols() || q.rows() != p.rows() || q.cols() != p.cols())
    throw Error(ErrorKind::shape, "projector blocks must be square and of equal size");
  EntropyProjector e;
  e.p = p;
  e.q = q;
  e.residual = std::max((p * p - p).cwiseAbs().maxCoeff(), (q * p - q).cwiseAbs().maxCoeff());
  e.idempotent = e.residual < 1e-12;
  if (require_idempotent && !e.idempotent)
    throw Error(ErrorKind::consistency, "projector blocks are not idempotent", e.residual);
  if (q.isZero(0.0)) e.naive = true;
  return e;
}

EntropyProjector build_projector(int n, const std::string& recipe, bool require_idempotent) {
  if (n < 1) throw Error(ErrorKind::precondition, "projector needs at least one ghost slot");
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  if (recipe == "default") return build_projector(id, id, require_idempotent);
  if (recipe == "half") return build_projector(id, 0.5 * id, require_idempotent);
  if (recipe == "naive") return build_projector(id, Eigen::MatrixXcd::Zero(n, n), require_idempotent);
  if (recipe == "rank1") {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n) / std::sqrt((double)n);
    Eigen::MatrixXcd pr = v * v.adjoint();
    return build_projector(pr, pr, require_idempotent);
  }
  throw Error(ErrorKind::config, "unknown projector recipe: " + recipe);
}

namespace {

struct Slot {
  GKet ket, bra;
};

std::vector<Slot> slots_of(const LiouvilleState& r) {
  int off = r.has_bound ? 1 : 0;
  int n = (int)r.ghosts.size();
  std::vector<Slot> s;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.push_back({{i + off, Kind::bar}, {j + off, Kind::bar}});
  if (r.has_bound) {
    for (int i = 0; i < n; ++i) s.push_back({{i + off, Kind::bar}, {0, Kind::bar}});
    for (int i = 0; i < n; ++i) s.push_back({{0, Kind::bar}, {i + off, Kind::bar}});
  }
  return s;
}

Eigen::VectorXcd slot_coefficients(const LiouvilleState& r) {
  int n = (int)r.ghosts.size();
  Eigen::VectorXcd c(slot_count(r));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i * n + j) = r.ghost_block(i, j);
  if (r.has_bound) {
    c.segment(n * n, n) = r.rho_n0;
    c.segment(n * n + n, n) = r.rho_0n;
  }
  return c;
}

// the ghost sides of a slot switched to tilde
Slot tilde_of(const Slot& s, const GhostAlgebra& alg) {
  Slot t = s;
  if (alg.ghost[t.ket.label]) t.ket.kind = Kind::tilde;
  if (alg.ghost[t.bra.label]) t.bra.kind = Kind::tilde;
  return t;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (x.empty()) return 0.0;
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  size_t k = it - x.begin();
  double u = (at - x[k - 1]) / (x[k] - x[k - 1]);
  return (1 - u) * y[k - 1] + u * y[k];
}

}  // namespace

GhostOperator project(const EntropyProjector& proj, const LiouvilleState& r) {
  GhostAlgebra alg = algebra_of(r);
  GhostOperator out;
  if (r.has_bound) out.add({0, Kind::bar}, {0, Kind::bar}, r.rho0);
  int ns = slot_count(r);
  if (ns == 0) return out;
  if (proj.p.rows() != ns) throw Error(ErrorKind::shape, "projector does not match the pole block");
  auto slots = slots_of(r);
  Eigen::VectorXcd c = slot_coefficients(r);
  Eigen::VectorXcd bar = proj.p * c;
  Eigen::VectorXcd til = proj.q * c;
  for (int s = 0; s < ns; ++s) {
    out.add(slots[s].ket, slots[s].bra, bar(s));
    Slot t = tilde_of(slots[s], alg);
    out.add(t.ket, t.bra, til(s));
  }
  return out;
}

EntropyCurve conditional_entropy(const LiouvilleState& rho, const LiouvilleState& rho_star,
                                 const EntropyProjector& proj, const std::vector<double>& ts) {
  EntropyCurve out;
  GhostAlgebra alg = algebra_of(rho);
  int off = rho.has_bound ? 1 : 0;

  // rho*^{-1} on the diagonal labels that the pole block touches
  GhostOperator inv;
  bool have_ghost_content = slot_count(rho) > 0 && !slot_coefficients(rho).isZero(0.0);
  if (have_ghost_content) {
    if (rho.has_bound) {
      if (!(rho_star.rho0 > 0)) throw Error(ErrorKind::singular_equilibrium, "equilibrium has no weight on the bound state");
      inv.add({0, Kind::bar}, {0, Kind::bar}, 1.0 / rho_star.rho0);
    }
    for (size_t i = 0; i < rho.ghosts.size(); ++i) {
      double d = interpolate(rho_star.grid, rho_star.rho_sigma, rho.ghosts[i].z.real());
      if (!(d > 0))
        throw Error(ErrorKind::singular_equilibrium, "equilibrium density vanishes under a ghost", d);
      inv.add({(int)i + off, Kind::bar}, {(int)i + off, Kind::tilde}, 1.0 / d);
    }
  }

  for (double t : ts) {
    out.t.push_back(t);
    if (!have_ghost_content || proj.naive) {
      out.s.push_back(0.0);
      out.neglected.push_back(0.0);
      continue;
    }
    auto parts = equilibrium_parts(rho, t);
    out.gamma_min = parts.gamma_min;
    LiouvilleState one = parts.rho_1;
    one.rho0 = 0.0;
    GhostOperator tilde1 = project(proj, one);
    double decay = std::exp(-parts.gamma_min * parts.rho_1.time);
    cplx second = alg.trace(alg.product(alg.power(tilde1, 2), inv));
    GhostOperator x = alg.product(tilde1, inv);
    cplx third = alg.trace(alg.power(x, 3));
    out.s.push_back(-0.5 * decay * decay * second.real());
    out.neglected.push_back(std::abs(third) * decay * decay * decay / 3.0);
  }
  return out;
}

}  // namespace irqm
