#include <doctest.h>

#include <algorithm>

#include "irqm/oracle.hpp"
#include "support.hpp"

using namespace irqm;

namespace {

OracleVector bare(const DiscretizedHamiltonian& h, int level = 0) {
  OracleVector v = OracleVector::Zero(h.dim());
  v[level] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("secular eigenpairs agree with a dense solver") {
  FriedrichsModel two;
  two.levels = {1.0, 2.0};
  two.scales = {1.0, 0.7};
  two.lambda = 0.3;
  two.omega_max = 25;
  for (auto m : {single_level(1.0, 0.3), two}) {
    auto h = discretize(m, 300);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    auto e = h.energies;
    std::sort(e.begin(), e.end());
    for (int i = 0; i < (int)e.size(); ++i) CHECK(std::abs(e[i] - es.eigenvalues()[i]) < 1e-12);
    CHECK(h.residual() < 1e-12);
  }
}

TEST_CASE("uncoupled spectrum is the levels plus the nodes") {
  auto h = discretize(single_level(1.0, 0.0), 500);
  std::vector<double> expect = h.nodes;
  expect.push_back(1.0);
  std::sort(expect.begin(), expect.end());
  auto e = h.energies;
  std::sort(e.begin(), e.end());
  REQUIRE(e.size() == expect.size());
  for (size_t i = 0; i < e.size(); ++i) CHECK(e[i] == expect[i]);
}

TEST_CASE("level repulsion") {
  auto h = discretize(single_level(1.0, 0.1), 2000);
  for (double e : h.energies) CHECK(e != 1.0);
}

TEST_CASE("exact evolution is unitary and reversible") {
  auto h = discretize(single_level(1.0, 0.3), 2000);
  OracleVector psi = bare(h) * std::sqrt(0.5);
  psi += oracle_state(h, Eigen::VectorXcd::Zero(1), [](double w) { return cplx(1.0, 0.5) / (1.0 + w); }) * 0.3;
  psi.normalize();
  auto out = exact_evolve(h, psi, {0.0, 1.0, 50.0, -20.0});
  CHECK((out[0] - psi).norm() < 1e-13);
  for (auto& v : out) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  for (double t : {0.5, 10.0, 80.0}) {
    auto fwd = exact_evolve(h, psi, {t})[0];
    auto back = exact_evolve(h, fwd, {-t})[0];
    CHECK((back - psi).norm() < 1e-12);
  }
}

TEST_CASE("oracle survival converges under grid doubling") {
  auto m = single_level(1.0, 0.3);
  double gam = find_pole(m).gamma;
  auto ts = linspace(0, 10 / gam, 201);
  auto h1 = discretize(m, 2000), h2 = discretize(m, 4000);
  auto a1 = survival_amplitude(h1, bare(h1), ts), a2 = survival_amplitude(h2, bare(h2), ts);
  double worst = 0;
  for (size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(std::norm(a1[i]) - std::norm(a2[i])));
  CHECK(worst < 1e-4);
}

TEST_CASE("densities: stationary states and trace") {
  FriedrichsModel two;
  two.levels = {1.0, 2.0};
  two.scales = {1.0, 1.0};
  two.lambda = 0.2;
  two.omega_max = 30;
  auto h = discretize(two, 256);
  Eigen::MatrixXd hd = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hd);
  // a function of H commutes with H
  Eigen::VectorXd f = (-es.eigenvalues().array()).exp();
  Eigen::MatrixXcd stat = (es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose()).cast<cplx>();
  stat /= stat.trace();
  auto later = exact_density_evolve(h, stat, 13.0);
  CHECK((later - stat).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937 rng(3);
  Eigen::MatrixXcd a = support::random_hermitian(rng, h.dim());
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace();
  for (double t : {0.1, 5.0, 40.0}) CHECK(std::abs(exact_density_evolve(h, rho, t).trace() - 1.0) < 1e-12);

  LowRankDensity lr;
  lr.vectors = {bare(h, 0), bare(h, 1)};
  lr.weights = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  for (double tr : density_trace(h, lr, {0.0, 3.0, 30.0})) CHECK(std::abs(tr - 1.0) < 1e-12);
  auto en = density_energy(h, lr, {0.0, 3.0, 30.0});
  for (double e : en) CHECK(std::abs(e - en[0]) < 1e-12);
}

TEST_CASE("off-diagonal decay rate matches the mean of the pole widths") {
  FriedrichsModel m;
  m.levels = {1.0, 2.0};
  m.scales = {1.0, 1.0};
  m.lambda = 0.1;
  m.omega_max = 30;
  auto ps = find_all_poles(m);
  double target = (ps[0].gamma + ps[1].gamma) / 2;
  auto h = discretize(m, 20000);
  OracleVector psi = (bare(h, 0) + bare(h, 1)) / std::sqrt(2.0);
  std::vector<double> ts, mod;
  for (int i = 0; i <= 100; ++i) ts.push_back((2.0 + 6.0 * i / 100) / target);
  auto a0 = transition_amplitude(h, bare(h, 0), psi, ts);
  auto a1 = transition_amplitude(h, bare(h, 1), psi, ts);
  for (size_t i = 0; i < ts.size(); ++i) mod.push_back(std::abs(a0[i] * std::conj(a1[i])));
  CHECK(std::abs(support::fitted_decay(ts, mod) / target - 1) < 0.01);
}
