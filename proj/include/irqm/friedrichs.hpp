#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "irqm/common.hpp"
#include "irqm/quadrature.hpp"

namespace irqm {

enum class Family { lorentz2, rational };

// f^2(w) = w p(w) / q(w), coefficients in ascending order
struct FormFactor {
  Family family = Family::lorentz2;
  std::vector<double> params;
  std::vector<double> num, den;
  std::vector<cplx> singularities;

  double f2(double w) const;
  cplx f2(cplx z) const;
  double f(double w) const;
};

FormFactor make_lorentz2(double b = 1.0);
// params = {deg p, p_0..p_deg, q_0..q_m}
FormFactor make_rational(const std::vector<double>& num, const std::vector<double>& den);
FormFactor make_form_factor(const std::string& family, const std::vector<double>& params);
std::string family_name(Family f);

struct FriedrichsModel {
  std::vector<double> levels = {1.0};
  std::vector<double> scales = {1.0};
  double lambda = 0.0;
  FormFactor ff = make_lorentz2();
  double omega_max = 20.0;
  double quad_tol = 1e-10;

  int n_levels() const { return (int)levels.size(); }
};

FriedrichsModel single_level(double omega0, double lambda, const FormFactor& ff = make_lorentz2(),
                             double omega_max = 20.0);
void validate(const FriedrichsModel& m);

enum class Sheet { first, second };

// S(z) = int_0^inf f^2(w)/(z - w) dw.  On the first sheet a real z >= 0 means
// the lower lip z - i0, on the second sheet it means the upper lip z + i0.
cplx cauchy_f2(const FormFactor& ff, cplx z, Sheet sheet, double tol);

cplx eta(const FriedrichsModel& m, cplx z, Sheet sheet, int level = 0);
cplx eta_first_sheet(const FriedrichsModel& m, cplx z);
cplx eta_second_sheet(const FriedrichsModel& m, cplx z);
Eigen::MatrixXcd eta_matrix(const FriedrichsModel& m, cplx z, Sheet sheet);

struct ResonanceData {
  cplx pole;
  double gamma = 0.0;
  cplx norm = 1.0;       // residue of the level's resolvent at the pole
  bool bound = false;    // real pole
  int level = 0;
  Eigen::VectorXcd amps; // discrete components of the Gamow vector, bilinear normalised
  double residual = 0.0;
  int iterations = 0;
  std::vector<cplx> trace;
};

struct PoleOptions {
  double tol = 1e-12;
  int max_iter = 100;
};

ResonanceData find_pole(const FriedrichsModel& m, std::optional<cplx> seed = std::nullopt,
                        int level = 0, const PoleOptions& opt = {});
std::vector<ResonanceData> find_all_poles(const FriedrichsModel& m, const PoleOptions& opt = {});
cplx golden_rule_seed(const FriedrichsModel& m, int level);

struct Contour {
  std::vector<cplx> waypoints;
  double depth = 0.0;
  double omega_max = 20.0;
  std::vector<cplx> attractors;
};

Contour background_contour(const FriedrichsModel& m, const std::vector<ResonanceData>& poles);

// quadrature nodes along the contour plus the real tail to infinity
std::vector<Node> contour_nodes(const Contour& c, int panel_nodes, double max_panel);

}  // namespace irqm
