#pragma once

#include <Eigen/Dense>
#include <vector>

#include "irqm/friedrichs.hpp"

namespace irqm {

// Continuum discretised on nodes omega_k with weights w_k; the coupling of
// level n to node k is lambda * scale_n * f(omega_k) * sqrt(w_k).
// Eigenpairs come from the secular equation of the arrowhead form, so the
// full eigenvector matrix is never stored.
struct DiscretizedHamiltonian {
  FriedrichsModel model;
  std::vector<double> nodes, weights, coupling;

  // arrowhead form: head vector chi in level space, head energy, then poles
  // (level-complement eigenvalues first, then continuum nodes)
  Eigen::MatrixXd level_basis;  // columns: chi, then complement eigenvectors
  double head = 0.0;
  std::vector<double> poles, weights_z;
  std::vector<int> pole_order;  // sorted positions into poles

  // eigenpairs
  std::vector<double> energies;
  std::vector<int> base;        // nearest pole (index into poles) or -1 for head-only / deflated
  std::vector<double> offset;   // energy - poles[base]
  std::vector<double> head_amp; // head component of the normalised eigenvector
  std::vector<int> deflated;    // pole index when the eigenvector is a unit vector, else -1

  int n_levels() const { return model.n_levels(); }
  int n_nodes() const { return (int)nodes.size(); }
  int dim() const { return n_levels() + n_nodes(); }

  // component of eigenvector j on basis element b (levels first, then nodes)
  double component(int j, int b) const;
  // all components of eigenvector j
  Eigen::VectorXd eigenvector(int j) const;
  // max_j ||H v_j - E_j v_j||
  double residual() const;
  Eigen::MatrixXd dense() const;
};

DiscretizedHamiltonian discretize(const FriedrichsModel& m, int n);
DiscretizedHamiltonian discretize_grid(const FriedrichsModel& m, const std::vector<double>& nodes,
                                       const std::vector<double>& weights);

// Vector in the discretised basis: level amplitudes then node amplitudes.
using OracleVector = Eigen::VectorXcd;

// coefficients <v_j|psi> for all eigenvectors
Eigen::VectorXcd to_eigenbasis(const DiscretizedHamiltonian& h, const OracleVector& psi);
OracleVector from_eigenbasis(const DiscretizedHamiltonian& h, const Eigen::VectorXcd& c);

// psi(t) = sum_j exp(-i E_j t) <v_j|psi0> v_j; any sign of t
std::vector<OracleVector> exact_evolve(const DiscretizedHamiltonian& h, const OracleVector& psi0,
                                       const std::vector<double>& ts);

// <psi0|psi(t)> without building psi(t)
std::vector<cplx> survival_amplitude(const DiscretizedHamiltonian& h, const OracleVector& psi0,
                                     const std::vector<double>& ts);
// <phi|psi(t)>
std::vector<cplx> transition_amplitude(const DiscretizedHamiltonian& h, const OracleVector& phi,
                                       const OracleVector& psi0, const std::vector<double>& ts);

// rho = sum_ab R_ab |psi_a><psi_b|
struct LowRankDensity {
  std::vector<OracleVector> vectors;
  Eigen::MatrixXcd weights;
};

// Tr[rho(t) A] with A = sum_cd Q_cd |phi_c><phi_d|
std::vector<cplx> density_expectation(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                      const LowRankDensity& obs, const std::vector<double>& ts);
std::vector<double> density_trace(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                  const std::vector<double>& ts);
std::vector<double> density_energy(const DiscretizedHamiltonian& h, const LowRankDensity& rho,
                                   const std::vector<double>& ts);

// dense path for small systems
Eigen::MatrixXcd exact_density_evolve(const DiscretizedHamiltonian& h, const Eigen::MatrixXcd& rho0,
                                      double t);

// state whose level part is alpha and continuum amplitude is f(w) amp(w)
template <class Amp>
OracleVector oracle_state(const DiscretizedHamiltonian& h, const Eigen::VectorXcd& levels, Amp amp) {
  OracleVector v(h.dim());
  for (int n = 0; n < h.n_levels(); ++n) v[n] = levels[n];
  for (int k = 0; k < h.n_nodes(); ++k) {
    double w = h.nodes[k];
    v[h.n_levels() + k] = h.model.ff.f(w) * amp(w) * std::sqrt(h.weights[k]);
  }
  return v;
}

}  // namespace irqm
