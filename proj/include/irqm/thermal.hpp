#pragma once

#include <Eigen/Dense>
#include <vector>

#include "irqm/oracle.hpp"

namespace irqm {

// discrete block rho_nm in the bare level basis plus Z exp(-beta E) on the continuum
struct ThermalBathState {
  double beta = 1.0;
  double z = 0.0;
  double omega_max = 20.0;
  Eigen::MatrixXcd discrete;
};

ThermalBathState make_bath(double beta, const Eigen::MatrixXcd& discrete, double omega_max);
// Tr(discrete) + Z int_0^omega_max exp(-beta E) dE - 1
double bath_normalization_residual(const ThermalBathState& b);

struct ThermalGrid {
  double half_width = 0.25;  // fine window around each level
  int fine_cells = 4000;     // per window
  int coarse_cells = 2000;   // over [0, omega_max]
};

// midpoint cells, fine around every level
void thermal_nodes(const FriedrichsModel& m, const ThermalGrid& g, std::vector<double>& nodes,
                   std::vector<double>& weights);
DiscretizedHamiltonian thermal_oracle(const FriedrichsModel& m, const ThermalGrid& g = {});

// rho_O(t)_{n m} for the bare levels after evolving the bath state
Eigen::MatrixXcd reduced_oscillator_state(const DiscretizedHamiltonian& h, const ThermalBathState& bath, double t);

struct OverlapRow {
  double lambda = 0.0;
  double gamma = 0.0;          // golden-rule estimate of the level's width
  double second_moment = 0.0;  // of |<level|v_j>|^2 about the bare energy
  double iqr_width = 0.0;
  double survival = 0.0;       // |<level|U(t)|level>|^2 at t = 10 / gamma
  double block_identity_residual = 0.0;
};

struct OverlapReport {
  std::vector<OverlapRow> rows;
  bool moment_decreasing = true;
  double width_exponent = 0.0;   // fitted d log(iqr) / d log(lambda)
  double moment_exponent = 0.0;
};

OverlapReport weak_coupling_overlap_check(const FriedrichsModel& m, const std::vector<double>& lambdas,
                                          int level = 0, const ThermalGrid& g = {});

}  // namespace irqm
