#pragma once

#include <Eigen/Dense>
#include <vector>

#include "irqm/spectral.hpp"

namespace irqm {

// ---- ghost algebra -------------------------------------------------------

enum class Kind { bar, tilde };

struct GKet {
  int label = 0;
  Kind kind = Kind::bar;
};

struct GDyad {
  GKet ket, bra;
  cplx c = 0.0;
};

struct GhostOperator {
  std::vector<GDyad> terms;
  void add(GKet ket, GKet bra, cplx c);
  GhostOperator operator+(const GhostOperator& o) const;
  GhostOperator scaled(cplx s) const;
  bool is_zero() const { return terms.empty(); }
};

// Labels are either ordinary (bound states, eps = 1) or ghosts (complex poles, eps = 0).
struct GhostAlgebra {
  std::vector<bool> ghost;

  int add_label(bool is_ghost);
  // <bra|ket>: 0 for different labels, 1 for ordinary labels, and for ghosts
  // 1 only when the kinds differ
  double pairing(GKet bra, GKet ket) const;
  GhostOperator product(const GhostOperator& a, const GhostOperator& b) const;
  GhostOperator power(const GhostOperator& a, int n) const;
  cplx trace(const GhostOperator& a) const;
};

// ---- states and observables ----------------------------------------------

struct PoleLabel {
  cplx z;
  double gamma = 0.0;
};

// discrete (sigma_j, zeta_l^j) slot, kept for completeness
struct ExtraPole {
  double sigma = 0.0;
  cplx zeta;
  cplx coeff;
};

struct LiouvilleState {
  FriedrichsModel model;
  double time = 0.0;

  // singular part
  bool has_bound = false;
  double bound_energy = 0.0;
  double rho0 = 0.0;
  std::vector<double> grid, grid_w;
  std::vector<double> rho_sigma;

  // regular part: rho(w, w') = sum_ab W_ab u_a(w) conj(u_b(w'))
  Eigen::VectorXcd rho_0w, rho_w0;
  std::vector<Eigen::VectorXcd> kernel_vectors;
  Eigen::MatrixXcd kernel_weights;

  // pole block: C_ij |i><j| between ghosts, mixed terms with the bound state
  std::vector<PoleLabel> ghosts;
  Eigen::MatrixXcd ghost_block;
  Eigen::VectorXcd rho_n0, rho_0n;
  std::vector<ExtraPole> extra;

  int size() const { return (int)grid.size(); }
  cplx kernel(int a, int b) const;
  // Riesz coordinates of grid pair (a, b)
  void riesz(int a, int b, double& sigma, double& nu) const;
};

LiouvilleState empty_state(const FriedrichsModel& m, const std::vector<double>& grid,
                           const std::vector<double>& w);
LiouvilleState from_pure(const GamowState& g);
// pole-only state over the given complex poles
LiouvilleState from_poles(const FriedrichsModel& m, const std::vector<ResonanceData>& poles,
                          const Eigen::MatrixXcd& block);

struct Observable {
  double a0 = 0.0;
  std::vector<double> a_sigma;
  Eigen::VectorXcd a_0w, a_w0;
  std::vector<Eigen::VectorXcd> kernel_vectors;
  Eigen::MatrixXcd kernel_weights;
  // pairs with the pole block through |j~><i~| dyads
  Eigen::MatrixXcd tilde_block;
  Eigen::VectorXcd tilde_n0, tilde_0n;
};

Observable identity_observable(const LiouvilleState& like);
Observable energy_observable(const LiouvilleState& like);
// |phi><phi| with phi given by its bound amplitude and its continuum amplitude on the grid
Observable projector_observable(const LiouvilleState& like, cplx bound_amp, const Eigen::VectorXcd& cont);
// diagonal function of the energy
template <class F>
Observable spectral_observable(const LiouvilleState& like, F f) {
  Observable o = identity_observable(like);
  o.a0 = like.has_bound ? f(like.bound_energy) : 0.0;
  for (int k = 0; k < like.size(); ++k) o.a_sigma[k] = f(like.grid[k]);
  return o;
}
Observable sum(const Observable& a, const Observable& b);
void check_hermitian(const Observable& o);

cplx liouville_inner(const LiouvilleState& a, const LiouvilleState& b);
GhostAlgebra algebra_of(const LiouvilleState& r);
GhostOperator pole_operator(const LiouvilleState& r);
cplx generalized_trace(const LiouvilleState& r);
double expectation(const LiouvilleState& r, const Observable& o);

LiouvilleState evolve(const LiouvilleState& r, double t);

struct EquilibriumParts {
  LiouvilleState rho_star;
  LiouvilleState rho_1;
  double gamma_min = 0.0;
  bool no_ghosts = false;
};
EquilibriumParts equilibrium_parts(const LiouvilleState& r, double t);
// norm of the pole block in coefficient space
double pole_block_norm(const LiouvilleState& r);

struct DecoherenceProfile {
  std::vector<double> t, mass;
};
DecoherenceProfile decoherence_profile(const LiouvilleState& r, const std::vector<double>& ts);

struct LyapunovCurve {
  std::vector<double> t, y, ydot, y_linear;
};
LyapunovCurve lyapunov_Y(const LiouvilleState& r, const std::vector<double>& ts, bool signed_variant = true);

}  // namespace irqm
