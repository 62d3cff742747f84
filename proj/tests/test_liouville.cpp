#include <doctest.h>

#include <random>

#include "irqm/liouville.hpp"
#include "irqm/oracle.hpp"
#include "support.hpp"

using namespace irqm;

namespace {

struct Fixture {
  GamowState g;
  LiouvilleState r;
  double gamma = 0;
};

const Fixture& decaying() {
  static Fixture f = [] {
    Fixture x;
    auto m = single_level(1.0, 0.3);
    x.gamma = find_pole(m).gamma;
    ExpandOptions o;
    o.t_max = 20 / x.gamma;
    x.g = expand_in_gamow(m, bare_level(), o);
    x.r = from_pure(x.g);
    return x;
  }();
  return f;
}

Eigen::VectorXcd continuum_of(const GamowState& g) {
  Eigen::VectorXcd c(g.psi_plus.size());
  for (size_t k = 0; k < g.psi_plus.size(); ++k) c(k) = g.psi_plus[k];
  return c;
}

Observable probe(const Fixture& f) {
  return sum(spectral_observable(f.r, [](double e) { return 1.0 / (1.0 + e * e); }),
             projector_observable(f.r, 0.0, continuum_of(f.g)));
}

ResonanceData ghost_pole(double e, double gamma) {
  ResonanceData r;
  r.pole = cplx(e, -gamma / 2);
  r.gamma = gamma;
  return r;
}

}  // namespace

TEST_CASE("ghost algebra pairings") {
  GhostAlgebra a;
  int g = a.add_label(true), o = a.add_label(false);
  CHECK(a.pairing({g, Kind::bar}, {g, Kind::bar}) == 0.0);
  CHECK(a.pairing({g, Kind::tilde}, {g, Kind::bar}) == 1.0);
  CHECK(a.pairing({g, Kind::bar}, {g, Kind::tilde}) == 1.0);
  CHECK(a.pairing({o, Kind::bar}, {o, Kind::bar}) == 1.0);
  CHECK(a.pairing({o, Kind::bar}, {g, Kind::tilde}) == 0.0);
  GhostOperator d;
  d.add({g, Kind::bar}, {g, Kind::bar}, 1.0);
  CHECK(a.trace(d) == cplx(0.0));
  CHECK(a.product(d, d).is_zero());
}

TEST_CASE("ghost laws on random pole-only states") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = support::random_pole_state(rng);
    auto alg = algebra_of(r);
    auto rho1 = pole_operator(r);
    CHECK(alg.trace(rho1) == cplx(0.0));
    CHECK(alg.trace(alg.product(rho1, rho1)) == cplx(0.0));
    for (int n = 3; n <= 5; ++n) CHECK(alg.power(rho1, n).is_zero());
    CHECK(generalized_trace(r) == cplx(0.0));
    // same laws after evolution
    auto e = evolve(r, std::uniform_real_distribution<double>(0.0, 20.0)(rng));
    CHECK(alg.power(pole_operator(e), 3).is_zero());
  }
}

TEST_CASE("pure state from a decaying level") {
  const auto& f = decaying();
  const auto& r = f.r;
  double total = r.rho0;
  for (int k = 0; k < r.size(); ++k) {
    double diag = r.rho_sigma[k] + r.kernel(k, k).real();
    total += r.grid_w[k] * diag;
    CHECK(diag >= 0.0);
    CHECK(std::abs(r.kernel(k, k).imag()) < 1e-15);
  }
  CHECK(std::abs(total - 1) < 1e-10);
  CHECK(std::abs(generalized_trace(r) - 1.0) < 1e-10);
  CHECK(std::abs(liouville_inner(r, r) - std::pow(norm_of(f.g), 2)) < 1e-8);
  CHECK(liouville_inner(r, r).real() >= 0);
  for (int a = 0; a < r.size(); a += 97)
    for (int b = 0; b < r.size(); b += 89) CHECK(std::abs(r.kernel(a, b) - std::conj(r.kernel(b, a))) < 1e-14);
  CHECK((r.rho_0w - r.rho_w0.conjugate()).norm() == 0.0);
  CHECK(std::abs(expectation(r, identity_observable(r)) - 1) < 1e-10);
}

TEST_CASE("uncoupled bound state") {
  auto m = single_level(1.0, 0.0);
  auto r = from_pure(expand_in_gamow(m, bare_level()));
  CHECK(r.has_bound);
  CHECK(r.rho0 == 1.0);
  for (double v : r.rho_sigma) CHECK(v == 0.0);
  CHECK(r.ghosts.empty());
  auto eq = equilibrium_parts(r, 0.0);
  CHECK(eq.no_ghosts);
  auto prof = decoherence_profile(r, {0.0, 5.0});
  for (double d : prof.mass) CHECK(d == 0.0);
  auto ly = lyapunov_Y(r, {0.0, 1.0, 10.0});
  for (size_t i = 0; i < ly.y.size(); ++i) CHECK(ly.y[i] == ly.y[0]);
}

TEST_CASE("single ghost: rates of the block, profile and Lyapunov slope") {
  auto m = single_level(1.0, 0.1);
  Eigen::MatrixXcd c(1, 1);
  c << 0.5;
  auto r = from_poles(m, {ghost_pole(1.0, 0.1)}, c);
  for (double t : {0.0, 3.0, 17.0}) {
    auto e = evolve(r, t);
    CHECK(std::abs(e.ghost_block(0, 0)) == doctest::Approx(0.5 * std::exp(-0.1 * t)).epsilon(1e-13));
  }
  auto prof = decoherence_profile(r, {0.0, 2.0, 9.0});
  for (size_t i = 0; i < prof.t.size(); ++i)
    CHECK(prof.mass[i] == doctest::Approx(prof.mass[0] * std::exp(-2 * 0.1 * prof.t[i])).epsilon(1e-13));
  auto ly = lyapunov_Y(r, {0.0, 1.0, 5.0});
  CHECK(ly.ydot[0] == doctest::Approx(0.05).epsilon(1e-13));
  for (double v : ly.ydot) CHECK(v > 0);
  Eigen::MatrixXcd neg(1, 1);
  neg << -0.5;
  CHECK_THROWS_AS(lyapunov_Y(from_poles(m, {ghost_pole(1.0, 0.1)}, neg), {0.0}), Error);
  CHECK_NOTHROW(lyapunov_Y(from_poles(m, {ghost_pole(1.0, 0.1)}, neg), {0.0}, false));
}

TEST_CASE("off-diagonal block entries decay at the mean width") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3;
    auto poles = support::random_poles(rng, n);
    auto r = from_poles(single_level(1.0, 0.1), poles, support::random_hermitian(rng, n));
    auto e = evolve(r, 4.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double expect = std::exp(-(poles[i].gamma + poles[j].gamma) / 2 * 4.0) * std::abs(r.ghost_block(i, j));
        CHECK(std::abs(e.ghost_block(i, j)) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
}

TEST_CASE("evolution: identity, semigroup, conservation, direction") {
  const auto& f = decaying();
  auto H = energy_observable(f.r);
  auto A = probe(f);
  auto same = evolve(f.r, 0.0);
  CHECK(expectation(same, A) == expectation(f.r, A));
  double e0 = expectation(f.r, H);
  CHECK(e0 == doctest::Approx(energy_of(f.g)).epsilon(1e-12));
  for (double t : {1.0, 10.0, 60.0}) {
    auto e = evolve(f.r, t);
    CHECK(std::abs(generalized_trace(e) - 1.0) < 1e-10);
    CHECK(std::abs(expectation(e, H) - e0) < 1e-8);
    auto two = evolve(evolve(f.r, t / 3), 2 * t / 3);
    CHECK(std::abs(expectation(two, A) - expectation(e, A)) < 1e-10);
    CHECK((two.ghost_block - e.ghost_block).norm() < 1e-12);
  }
  try {
    evolve(f.r, -0.5);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("survival as the expectation of the initial projector") {
  const auto& f = decaying();
  auto proj = projector_observable(f.r, 0.0, continuum_of(f.g));
  auto ts = linspace(0, 10 / f.gamma, 21);
  auto c = survival_probability(f.g, ts);
  for (size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(expectation(evolve(f.r, ts[i]), proj) - c.p[i]) < 1e-8);
}

TEST_CASE("probe expectation against oracle density evolution") {
  const auto& f = decaying();
  auto A = probe(f);
  auto h = discretize(f.r.model, 4000);
  OracleVector psi0 = OracleVector::Zero(h.dim());
  psi0[0] = 1.0;
  auto ts = linspace(0, 10 / f.gamma, 11);
  auto amp = survival_amplitude(h, psi0, ts);
  auto cz = to_eigenbasis(h, psi0);
  double diag = 0;
  for (int j = 0; j < h.dim(); ++j) diag += std::norm(cz[j]) / (1 + h.energies[j] * h.energies[j]);
  for (size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(expectation(evolve(f.r, ts[i]), A) - (diag + std::norm(amp[i]))) < 1e-3);
}

TEST_CASE("equilibrium parts and approach to equilibrium") {
  const auto& f = decaying();
  auto eq = equilibrium_parts(f.r, 0.0);
  CHECK(!eq.no_ghosts);
  CHECK(eq.gamma_min == doctest::Approx(f.gamma).epsilon(1e-12));
  auto again = equilibrium_parts(eq.rho_star, 0.0);
  CHECK(again.no_ghosts);
  CHECK(pole_block_norm(again.rho_1) == 0.0);
  std::vector<double> ts, norms;
  for (int i = 0; i <= 20; ++i) {
    double t = i / f.gamma;
    ts.push_back(t);
    CHECK(std::abs(generalized_trace(equilibrium_parts(f.r, t).rho_1)) < 1e-14);
    norms.push_back(pole_block_norm(evolve(f.r, t)));
  }
  CHECK(std::abs(support::fitted_decay(ts, norms) / f.gamma - 1) < 0.01);

  // probe gap against the exact evolution at 20 / gamma
  auto A = probe(f);
  double star = expectation(eq.rho_star, A);
  auto h = discretize(f.r.model, 8000);
  OracleVector psi0 = OracleVector::Zero(h.dim());
  psi0[0] = 1.0;
  auto amp = survival_amplitude(h, psi0, {20 / f.gamma});
  auto cz = to_eigenbasis(h, psi0);
  double diag = 0;
  for (int j = 0; j < h.dim(); ++j) diag += std::norm(cz[j]) / (1 + h.energies[j] * h.energies[j]);
  CHECK(std::abs(diag + std::norm(amp[0]) - star) < 1e-3);
}

TEST_CASE("Lyapunov variables of the decaying level") {
  const auto& f = decaying();
  auto ts = linspace(0, 20 / f.gamma, 41);
  auto ly = lyapunov_Y(f.r, ts);
  for (size_t i = 0; i < ts.size(); ++i) {
    CHECK(ly.ydot[i] > 0);
    if (i > 0) {
      CHECK(ly.y[i] > ly.y[i - 1]);
      CHECK(ly.y_linear[i] >= ly.y_linear[i - 1]);
    }
  }
}

TEST_CASE("non-Hermitian observables are rejected") {
  const auto& f = decaying();
  auto A = identity_observable(f.r);
  A.a_0w = Eigen::VectorXcd::Ones(f.r.size());
  A.a_w0 = Eigen::VectorXcd::Zero(f.r.size());
  CHECK_THROWS_AS(check_hermitian(A), Error);
}
