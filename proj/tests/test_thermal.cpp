#include <doctest.h>

#include "irqm/thermal.hpp"
#include "support.hpp"

using namespace irqm;

namespace {

FriedrichsModel two_level(double lambda) {
  FriedrichsModel m;
  m.levels = {1.0, 2.0};
  m.scales = {1.0, 1.0};
  m.lambda = lambda;
  m.omega_max = 30;
  return m;
}

Eigen::MatrixXcd populations(double a, double b) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

}  // namespace

TEST_CASE("bath normalisation") {
  for (double beta : {0.5, 1.0, 3.0}) {
    auto b = make_bath(beta, populations(0.3, 0.2), 30.0);
    CHECK(std::abs(bath_normalization_residual(b)) < 1e-12);
    CHECK(b.z > 0);
  }
  CHECK_THROWS_AS(make_bath(1.0, populations(0.7, 0.6), 30.0), Error);
}

TEST_CASE("graded nodes avoid the levels and cover the band") {
  auto m = two_level(0.05);
  ThermalGrid g;
  g.fine_cells = 400;
  g.coarse_cells = 300;
  std::vector<double> x, w;
  thermal_nodes(m, g, x, w);
  double total = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    total += w[k];
    CHECK(x[k] != 1.0);
    CHECK(x[k] != 2.0);
    if (k > 0) CHECK(x[k] > x[k - 1]);
  }
  CHECK(total == doctest::Approx(m.omega_max).epsilon(1e-12));
}

TEST_CASE("uncoupled levels keep their block and time zero reduces to the initial block") {
  ThermalGrid g;
  g.fine_cells = 400;
  g.coarse_cells = 300;
  Eigen::MatrixXcd d = populations(0.3, 0.2);
  d(0, 1) = cplx(0.05, 0.02);
  d(1, 0) = std::conj(d(0, 1));
  auto bath = make_bath(1.0, d, 30.0);
  auto h0 = thermal_oracle(two_level(0.0), g);
  auto h = thermal_oracle(two_level(0.05), g);
  for (double t : {0.0, 7.0, 300.0}) {
    auto r0 = reduced_oscillator_state(h0, bath, t);
    // phases of the uncoupled levels
    CHECK(std::abs(r0(0, 0) - d(0, 0)) < 1e-12);
    CHECK(std::abs(r0(1, 1) - d(1, 1)) < 1e-12);
    CHECK(std::abs(r0(0, 1) - d(0, 1) * std::exp(-I * (1.0 - 2.0) * t)) < 1e-12);
  }
  CHECK((reduced_oscillator_state(h, bath, 0.0) - d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("populations relax to Gibbs ratios") {
  auto m = two_level(0.05);
  auto h = thermal_oracle(m);
  auto bath = make_bath(1.0, populations(0.3, 0.2), m.omega_max);
  double gmax = std::max(support::golden_rule(m, 0), support::golden_rule(m, 1));
  auto r = reduced_oscillator_state(h, bath, 30 / gmax);
  double ratio = r(1, 1).real() / r(0, 0).real();
  CHECK(std::abs(ratio / std::exp(-1.0) - 1) < 0.05);
  CHECK(std::abs(r(0, 0).real() / (bath.z * std::exp(-1.0)) - 1) < 0.05);
}

TEST_CASE("weak coupling overlap concentrates like the golden rule") {
  auto m = single_level(1.0, 0.0, make_lorentz2(), 40.0);
  auto zero = weak_coupling_overlap_check(m, {0.0});
  CHECK(zero.rows[0].block_identity_residual == 0.0);
  auto rep = weak_coupling_overlap_check(m, {0.2, 0.1, 0.05});
  CHECK(rep.moment_decreasing);
  CHECK(std::abs(rep.width_exponent - 2) < 0.2);
  for (auto& row : rep.rows) CHECK(row.iqr_width == doctest::Approx(row.gamma).epsilon(0.1));
}
