#include <doctest.h>

#include <random>

#include "irqm/entropy.hpp"
#include "support.hpp"

using namespace irqm;

namespace {

struct Fixture {
  LiouvilleState r, star;
  double gamma = 0, density = 0, weight = 0;
};

const Fixture& decaying() {
  static Fixture f = [] {
    Fixture x;
    auto m = single_level(1.0, 0.3);
    auto p = find_pole(m);
    x.gamma = p.gamma;
    ExpandOptions o;
    o.t_max = 20 / x.gamma;
    x.r = from_pure(expand_in_gamow(m, bare_level(), o));
    x.star = equilibrium_parts(x.r, 0.0).rho_star;
    // continuum density of the bare level at the resonance energy, from the resolvent
    double e = p.pole.real();
    x.density = m.lambda * m.lambda * m.ff.f2(e) / std::norm(eta(m, e, Sheet::first));
    x.weight = x.r.ghost_block(0, 0).real();
    return x;
  }();
  return f;
}

// pole-only state plus a bound level with mixed terms
LiouvilleState random_state_with_bound(std::mt19937& rng) {
  auto r = support::random_pole_state(rng);
  int n = (int)r.ghosts.size();
  r.has_bound = true;
  r.bound_energy = 0.5;
  r.rho0 = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  r.rho_n0.resize(n);
  for (int i = 0; i < n; ++i) r.rho_n0(i) = support::random_cplx(rng);
  r.rho_0n = r.rho_n0.conjugate();
  return r;
}

}  // namespace

TEST_CASE("projector recipes") {
  auto d = build_projector(1, "default");
  CHECK(d.p(0, 0) == cplx(1.0));
  CHECK(d.q(0, 0) == cplx(1.0));
  CHECK(d.idempotent);

  auto r1 = build_projector(4, "rank1");
  CHECK((r1.p * r1.p - r1.p).norm() < 1e-14);
  CHECK((r1.q * r1.p - r1.q).norm() < 1e-14);
  CHECK(r1.idempotent);
  CHECK(build_projector(4, "naive").naive);

  Eigen::MatrixXcd half = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  try {
    build_projector(half, half);
    FAIL("expected a consistency error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::consistency);
  }
  auto loose = build_projector(half, half, false);
  CHECK(!loose.idempotent);
  CHECK(loose.residual == doctest::Approx(0.25));
  CHECK_THROWS_AS(build_projector(2, "nonsense"), Error);
}

TEST_CASE("projected trace equals the trace on random states") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = random_state_with_bound(rng);
    auto alg = algebra_of(r);
    for (const char* recipe : {"default", "half", "rank1"}) {
      auto P = build_projector(slot_count(r), recipe);
      auto pr = project(P, r);
      CHECK(std::abs(alg.trace(pr) - generalized_trace(r)) < 1e-12);
    }
  }
}

TEST_CASE("projector leaves the equilibrium part alone") {
  const auto& f = decaying();
  auto P = build_projector(slot_count(f.r), "default");
  auto ps = project(P, f.star);
  auto alg = algebra_of(f.star);
  CHECK(std::abs(alg.trace(ps) - (f.star.has_bound ? f.star.rho0 : 0.0)) < 1e-12);
  for (auto& t : ps.terms) CHECK(!alg.ghost[t.ket.label]);
}

TEST_CASE("entropy of the equilibrium state and of the naive projector vanish") {
  const auto& f = decaying();
  auto ts = linspace(0, 10 / f.gamma, 11);
  auto P = build_projector(slot_count(f.r), "default");
  for (double s : conditional_entropy(f.star, f.star, P, ts).s) CHECK(s == 0.0);
  auto naive = build_projector(slot_count(f.r), "naive");
  for (double s : conditional_entropy(f.r, f.star, naive, ts).s) CHECK(s == 0.0);
}

TEST_CASE("single ghost entropy matches the hand evaluation") {
  const auto& f = decaying();
  auto ts = linspace(0, 10 / f.gamma, 21);
  auto def = conditional_entropy(f.r, f.star, build_projector(slot_count(f.r), "default"), ts);
  auto half = conditional_entropy(f.r, f.star, build_projector(slot_count(f.r), "half"), ts);
  for (size_t i = 0; i < ts.size(); ++i) {
    double expect = -0.5 * std::exp(-2 * f.gamma * ts[i]) * f.weight * f.weight / f.density;
    CHECK(def.s[i] == doctest::Approx(expect).epsilon(1e-6));
    CHECK(half.s[i] == doctest::Approx(expect / 2).epsilon(1e-6));
    CHECK(def.neglected[i] == 0.0);
  }
}

TEST_CASE("entropy is non-positive, non-decreasing and decays at twice the slowest width") {
  const auto& f = decaying();
  std::vector<double> ts;
  for (int k = 0; k <= 40; ++k) ts.push_back((3 + 7.0 * k / 40) / f.gamma);
  double rates[2];
  int i = 0;
  for (const char* recipe : {"default", "half"}) {
    auto c = conditional_entropy(f.r, f.star, build_projector(slot_count(f.r), recipe), ts);
    std::vector<double> neg;
    for (size_t k = 0; k < ts.size(); ++k) {
      CHECK(c.s[k] <= 0);
      if (k > 0) CHECK(c.s[k] >= c.s[k - 1]);
      neg.push_back(-c.s[k]);
    }
    rates[i] = support::fitted_decay(ts, neg);
    CHECK(std::abs(rates[i] / (2 * c.gamma_min) - 1) < 0.02);
    ++i;
  }
  CHECK(rates[0] == doctest::Approx(rates[1]).epsilon(1e-6));
}

TEST_CASE("zero equilibrium density is reported") {
  std::mt19937 rng(5);
  auto r = support::random_pole_state(rng);
  auto star = equilibrium_parts(r, 0.0).rho_star;
  try {
    conditional_entropy(r, star, build_projector(slot_count(r)), {0.0});
    FAIL("expected a singular equilibrium error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_equilibrium);
  }
}
