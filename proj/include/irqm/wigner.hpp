#pragma once

#include <Eigen/Dense>
#include <vector>

#include "irqm/common.hpp"

namespace irqm {

// Values on a uniform (q, p) grid.  Rows are spaced by half the position
// step (grid points and midpoints); columns cover momenta p0 + j dp.
struct PhaseSpaceFunction {
  double q0 = 0.0, hq = 0.0;
  double p0 = 0.0, dp = 0.0;
  double dq = 0.0;  // step of the position grid the function came from
  Eigen::MatrixXcd values;

  int rows() const { return (int)values.rows(); }
  int cols() const { return (int)values.cols(); }
  double q(int r) const { return q0 + r * hq; }
  double p(int c) const { return p0 + c * dp; }
  // whole rows sit on the position grid
  bool whole_row(int r) const { return r % 2 == 0; }
};

// rho(q_a, q_b) kernel on the grid q0 + a dq, Hermitian
PhaseSpaceFunction wigner_transform(const Eigen::MatrixXcd& rho, double q0, double dq);
// symbol of an operator given as the matrix acting on grid samples
PhaseSpaceFunction weyl_symbol(const Eigen::MatrixXcd& op, double q0, double dq, bool check = true);

double integrate(const PhaseSpaceFunction& f);
// int f g dq dp over the stored grid
cplx pairing_integral(const PhaseSpaceFunction& f, const PhaseSpaceFunction& g);
// restriction to |p| < pi / (2 dq)
PhaseSpaceFunction principal_zone(const PhaseSpaceFunction& f);
double max_imag(const PhaseSpaceFunction& f);
double min_real(const PhaseSpaceFunction& f);

struct MoyalReport {
  std::vector<double> residual;  // by truncation order
  double scale = 0.0;
};
// symbol of op1 op2 against the star product of the symbols truncated at each order,
// compared on grid rows at least `edge` points from the boundary
MoyalReport moyal_product_check(const Eigen::MatrixXcd& op1, const Eigen::MatrixXcd& op2, double q0,
                                double dq, int k_max = 2, int edge = 3);

struct ClassicalEntropyCurve {
  std::vector<double> t, s, sdot, excluded_mass;
  double fixed_point_residual = 0.0;
};
ClassicalEntropyCurve classical_conditional_entropy(const std::vector<PhaseSpaceFunction>& rho_t,
                                                    const std::vector<double>& ts,
                                                    const PhaseSpaceFunction& rho_star,
                                                    double width_cells = 2.0);
// normalised Gaussian smoothing, width in grid cells
Eigen::MatrixXd smooth(const Eigen::MatrixXd& f, double width_cells);

}  // namespace irqm
