#include <doctest.h>

#include <random>

#include "irqm/wigner.hpp"
#include "support.hpp"

using namespace irqm;

namespace {

const int n = 128;
const double q0 = -8.0, dq = 16.0 / (n - 1);

Eigen::VectorXcd oscillator(int level, double shift = 0.0, double kick = 0.0) {
  Eigen::VectorXcd v(n);
  for (int a = 0; a < n; ++a) {
    double q = q0 + a * dq, x = q - shift;
    double herm = level == 0 ? 1.0 : std::sqrt(2.0) * x;
    v(a) = std::pow(pi, -0.25) * herm * std::exp(-x * x / 2) * std::exp(I * kick * q);
  }
  return v;
}

Eigen::MatrixXcd position_op() {
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) q(a, a) = q0 + a * dq;
  return q;
}

Eigen::MatrixXcd momentum_op() {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a + 1 < n; ++a) {
    p(a, a + 1) = -I / (2 * dq);
    p(a + 1, a) = I / (2 * dq);
  }
  return p;
}

}  // namespace

TEST_CASE("oscillator states against closed forms") {
  Eigen::VectorXcd g0 = oscillator(0), g1 = oscillator(1);
  Eigen::MatrixXcd r0 = g0 * g0.adjoint(), r1 = g1 * g1.adjoint();
  auto w0 = wigner_transform(r0, q0, dq), w1 = wigner_transform(r1, q0, dq);
  CHECK(std::abs(integrate(w0) - r0.trace().real() * dq) < 1e-8);
  CHECK(std::abs(integrate(w1) - r1.trace().real() * dq) < 1e-8);
  auto p0 = principal_zone(w0), p1 = principal_zone(w1);
  double e0 = 0, e1 = 0;
  for (int r = 0; r < p0.rows(); ++r)
    for (int c = 0; c < p0.cols(); ++c) {
      double s = p0.q(r) * p0.q(r) + p0.p(c) * p0.p(c);
      e0 = std::max(e0, std::abs(p0.values(r, c).real() - std::exp(-s) / pi));
      e1 = std::max(e1, std::abs(p1.values(r, c).real() - (2 * s - 1) * std::exp(-s) / pi));
    }
  CHECK(e0 < 1e-10);
  CHECK(e1 < 1e-10);
  CHECK(min_real(p0) > -1e-12);
  CHECK(min_real(p1) == doctest::Approx(-1 / pi).epsilon(1e-6));
  CHECK(max_imag(w0) < 1e-12);
}

TEST_CASE("symbols of the identity and of position") {
  auto si = weyl_symbol(Eigen::MatrixXcd::Identity(n, n), q0, dq);
  auto sq = weyl_symbol(position_op(), q0, dq);
  for (int r = 0; r < si.rows(); ++r)
    for (int c = 0; c < si.cols(); ++c) {
      CHECK(std::abs(si.values(r, c) - 1.0) < 1e-12);
      CHECK(std::abs(sq.values(r, c) - sq.q(r)) < 1e-12);
    }
}

TEST_CASE("pairing identity on random Hermitian pairs") {
  std::mt19937 rng(17);
  const int m = 64;
  const double h = 0.1;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd a = support::random_hermitian(rng, m), b = support::random_hermitian(rng, m);
    cplx lhs = pairing_integral(wigner_transform(a, 0.0, h), weyl_symbol(b, 0.0, h));
    cplx rhs = h * (a * b).trace();
    CHECK(std::abs(lhs - rhs) < 1e-6);
  }
}

TEST_CASE("non-Hermitian density is rejected") {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(8, 8);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(wigner_transform(a, 0.0, 0.1), Error);
}

TEST_CASE("Moyal expansion") {
  auto qp = moyal_product_check(position_op(), momentum_op(), q0, dq, 2);
  CHECK(qp.residual[0] > 0.1);
  CHECK(qp.residual[1] < 1e-6);

  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, n), g = f;
  for (int a = 0; a < n; ++a) {
    double q = q0 + a * dq;
    f(a, a) = std::sin(q);
    g(a, a) = q * q;
  }
  CHECK(moyal_product_check(f, g, q0, dq, 2).residual[0] < 1e-8);
  CHECK(moyal_product_check(momentum_op(), momentum_op(), q0, dq, 2).residual[0] < 1e-8);
}

TEST_CASE("localized mixture is non-negative") {
  Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(n, n);
  const double centres[3][3] = {{-2, 0.5, 0.3}, {1, -1, 0.5}, {2.5, 1, 0.2}};
  for (auto& c : centres) {
    Eigen::VectorXcd v = oscillator(0, c[0], c[1]);
    mix += c[2] * v * v.adjoint();
  }
  CHECK(min_real(principal_zone(wigner_transform(mix, q0, dq))) > -1e-6);
}

TEST_CASE("classical conditional entropy near equilibrium") {
  Eigen::VectorXcd g0 = oscillator(0), g1 = oscillator(1);
  Eigen::MatrixXcd r0 = g0 * g0.adjoint(), r1 = g1 * g1.adjoint();
  auto w0 = wigner_transform(r0, q0, dq), w1 = wigner_transform(r1, q0, dq);
  auto star = wigner_transform(0.5 * (r0 + r1), q0, dq);
  CHECK(classical_conditional_entropy({star}, {0.0}, star).s[0] == 0.0);

  std::vector<PhaseSpaceFunction> path;
  std::vector<double> ts;
  for (int k = 0; k <= 20; ++k) {
    double t = 3 + 0.35 * k;
    auto f = star;
    f.values += std::exp(-0.5 * t) * 0.3 * (w1.values - w0.values);
    path.push_back(f);
    ts.push_back(t);
  }
  auto c = classical_conditional_entropy(path, ts, star);
  for (size_t k = 0; k < ts.size(); ++k) {
    CHECK(c.s[k] <= 0);
    CHECK(c.sdot[k] >= -1e-8);
  }
  CHECK(c.s.back() > c.s.front());
}

TEST_CASE("smoothing preserves the integral") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(40, 40);
  f(20, 20) = 1.0;
  f(14, 25) = 2.0;
  Eigen::MatrixXd s = smooth(f, 2.0);
  CHECK(s.sum() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.minCoeff() >= 0.0);
}
