#pragma once

#include <cmath>
#include <vector>

#include "irqm/friedrichs.hpp"

namespace irqm {

// r(w) = constant + sum_k residues[k] / (w - poles[k])
struct RationalAmplitude {
  cplx constant = 0.0;
  std::vector<cplx> poles, residues;

  cplx operator()(cplx z) const;
  // the function whose values on the real axis are the conjugates of this one
  RationalAmplitude mirrored() const;
  bool is_zero() const;
};

// alpha |1> + int f(w) r(w) |w> dw
struct PureState {
  cplx alpha = 1.0;
  RationalAmplitude amp;
};

PureState bare_level();
double state_norm(const FriedrichsModel& m, const PureState& s);
PureState normalized(const FriedrichsModel& m, const PureState& s);
// <phi|psi> by direct quadrature on the real axis
cplx direct_inner(const FriedrichsModel& m, const PureState& phi, const PureState& psi);
// <phi|H|psi> by direct quadrature
cplx direct_energy(const FriedrichsModel& m, const PureState& phi, const PureState& psi);

// int_0^inf f^2(w) r(w) / (z - w) dw on the requested sheet
cplx cauchy_rational(const FriedrichsModel& m, const RationalAmplitude& r, cplx z, Sheet sheet);

struct ExpandOptions {
  int panel_nodes = 16;
  int max_panel_nodes = 256;
  double t_max = 100.0;       // longest time the background nodes resolve
  double reconstruction_tol = 1e-6;
  bool real_grid = true;      // fill energy / psi_plus (needed by the Liouville layer)
  int max_panels = 20000;     // per grid; longer horizons raise a resolution error
};

struct GamowState {
  FriedrichsModel model;
  PureState raw;
  std::vector<ResonanceData> poles;
  Contour contour;
  double time = 0.0;
  double t_max = 0.0;
  int panel_nodes = 0;

  std::vector<cplx> coeff;       // <f~_i|psi(t)>
  std::vector<Node> nodes;       // background contour plus real tail
  std::vector<cplx> background;  // Psi_I(z_k) exp(-i z_k t)
  std::vector<cplx> cauchy_nodes;  // first-sheet S at the nodes

  std::vector<double> energy, energy_w;  // real-axis grid
  std::vector<cplx> psi_plus;            // <w+|psi(t)> on that grid

  double reconstruction_residual = 0.0;
};

GamowState expand_in_gamow(const FriedrichsModel& m, const PureState& psi,
                           const std::vector<ResonanceData>& poles, const Contour& contour,
                           const ExpandOptions& opt = {});
GamowState expand_in_gamow(const FriedrichsModel& m, const PureState& psi,
                           const ExpandOptions& opt = {});

GamowState evolve_pure(const GamowState& s, double t);

// pieces of <phi|psi(t)> = sum_i pole[i] coeff_i(t) + sum_k node[k] background_k(t)
struct ProbeWeights {
  std::vector<cplx> pole;
  std::vector<cplx> node;
};
ProbeWeights probe_weights(const GamowState& s, const PureState& phi);
cplx pairing(const GamowState& s, const ProbeWeights& w);
cplx pairing(const GamowState& s, const PureState& phi);

// norm and energy of the real-axis representation
double norm_of(const GamowState& s);
double energy_of(const GamowState& s);

struct SurvivalCurve {
  std::vector<double> t, p, p_pole, p_background, one_minus_p;
};
SurvivalCurve survival_probability(const GamowState& s, const std::vector<double>& ts);

// Crossover where the background amplitude overtakes the pole amplitude.  The
// deviation |p - p_pole| / p_pole oscillates inside the envelope 2 r + r^2 with
// r = |A_bg| / |A_pole|, so monotonicity is judged on r.
struct KhalfinReport {
  double t_star = NAN;  // NaN when the curve never crosses
  bool increasing_after = false;
  int decreasing_steps = 0;
};
KhalfinReport khalfin_crossover(const SurvivalCurve& c);

// ghost self-pairing <f_0|f_0> of a complex pole realised with contour quadrature
double ghost_norm_quadrature(const FriedrichsModel& m, const ResonanceData& r,
                             const std::vector<Node>& nodes);
// matrix <f~_i|f_j> realised with contour quadrature
Eigen::MatrixXcd biorthonormality(const FriedrichsModel& m, const std::vector<ResonanceData>& poles,
                                  const std::vector<Node>& nodes);

struct HardyReport {
  double past_fraction = 0.0;    // L2 mass of the time transform at t < 0
  double future_fraction = 0.0;  // L2 mass at t > 0
  double score = 0.0;            // past_fraction, the residual of the lower-half-plane test
  enum Verdict { lower, upper, neither } verdict = neither;
  double bandwidth = 0.0;
  bool rational_extension = true;
};
const char* verdict_name(HardyReport::Verdict v);

// samples on a uniform grid of [0, omega_max]
HardyReport hardy_check(const std::vector<cplx>& samples, double omega_max);

}  // namespace irqm
