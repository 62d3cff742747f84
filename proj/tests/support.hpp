#pragma once

#include <gsl/gsl_integration.h>

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "irqm/friedrichs.hpp"
#include "irqm/liouville.hpp"

namespace support {

using irqm::cplx;

// int_0^inf f^2(w) / (z - w) dw with a plain composite Gauss rule:
// `panels` panels of `order` nodes on [0, cut] and the same on the mapped tail
inline cplx cauchy_by_gauss(const irqm::FormFactor& ff, cplx z, double cut = 200.0, int panels = 25000,
                            int order = 20) {
  gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(order);
  cplx acc = 0.0;
  double h = cut / panels;
  for (int k = 0; k < panels; ++k) {
    double a = k * h;
    for (int i = 0; i < order; ++i) {
      double x, w;
      gsl_integration_glfixed_point(a, a + h, i, &x, &w, tab);
      acc += w * ff.f2(x) / (z - x);
    }
  }
  // w = cut / u on (0, 1]
  double hu = 1.0 / panels;
  for (int k = 0; k < panels; ++k) {
    double a = k * hu;
    for (int i = 0; i < order; ++i) {
      double u, w;
      gsl_integration_glfixed_point(a, a + hu, i, &u, &w, tab);
      double x = cut / u;
      acc += w * cut / (u * u) * ff.f2(x) / (z - x);
    }
  }
  gsl_integration_glfixed_table_free(tab);
  return acc;
}

inline double golden_rule(const irqm::FriedrichsModel& m, int level = 0) {
  double s = m.scales[level];
  return 2.0 * M_PI * m.lambda * m.lambda * s * s * m.ff.f2(m.levels[level]);
}

inline double fitted_decay(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> ly;
  for (double v : y) ly.push_back(std::log(v));
  return -irqm::fit_slope(t, ly);
}

inline cplx random_cplx(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return cplx(n(rng), n(rng));
}

inline Eigen::MatrixXcd random_hermitian(std::mt19937& rng, int n) {
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = random_cplx(rng);
  return (a + a.adjoint()) / 2.0;
}

// n complex poles strictly in the lower half plane
inline std::vector<irqm::ResonanceData> random_poles(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> re(0.5, 5.0), g(0.01, 0.5);
  std::vector<irqm::ResonanceData> out;
  for (int i = 0; i < n; ++i) {
    irqm::ResonanceData r;
    r.gamma = g(rng);
    r.pole = cplx(re(rng), -r.gamma / 2);
    r.level = i;
    out.push_back(r);
  }
  return out;
}

// random pole-only state with 1..4 ghosts
inline irqm::LiouvilleState random_pole_state(std::mt19937& rng) {
  int n = std::uniform_int_distribution<int>(1, 4)(rng);
  auto poles = random_poles(rng, n);
  irqm::FriedrichsModel m = irqm::single_level(1.0, 0.1);
  return irqm::from_poles(m, poles, random_hermitian(rng, n));
}

}  // namespace support
