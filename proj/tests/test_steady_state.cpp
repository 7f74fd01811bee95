#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "nimfa/error.hpp"
#include "nimfa/steady_state.hpp"

using namespace nimfa;
using doctest::Approx;

TEST_CASE("closed forms") {
  const Graph k3 = fixtures::complete(3);
  const SteadyState ss = solve(k3, RateConfig::homogeneous(k3, 1.0, 1.0));
  CHECK(ss.regime == SteadyRegime::endemic);
  CHECK((ss.v_inf - Vector::Constant(3, 0.5)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(ss.y_inf == Approx(0.5));
  CHECK(ss.residual <= 1e-10);

  const Graph e = fixtures::edge();
  const SteadyState se = solve(e, RateConfig::homogeneous(e, 2.0, 1.0));
  CHECK((se.v_inf - Vector::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-10);

  // v = 1 - 1/(tau (N - 1)) on K_N
  const Graph k6 = fixtures::complete(6);
  const SteadyState s6 = solve(k6, RateConfig::homogeneous(k6, 0.7, 1.0));
  CHECK(s6.v_inf(3) == Approx(1.0 - 1.0 / 3.5).epsilon(1e-9));

  const SteadyState ext = solve(k3, RateConfig::homogeneous(k3, 0.3, 1.0));
  CHECK(ext.regime == SteadyRegime::extinct);
  CHECK(ext.v_inf.isZero());
}

TEST_CASE("critical input is refused") {
  const Graph k3 = fixtures::complete(3);
  CHECK_THROWS_WITH_AS(solve(k3, RateConfig::homogeneous(k3, 0.5, 1.0)),
                       "at critical threshold, derivative undefined", NumericalError);
  const Graph p = fixtures::path(4);
  CHECK_THROWS_AS(solve(p, RateConfig::from_tau(p, p.degrees().cwiseInverse())), NumericalError);
}

TEST_CASE("identities") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig r = RateConfig::homogeneous(k3, 1.0, 1.0);
  const IdentityReport rep = verify_identities(k3, r, solve(k3, r));
  CHECK(rep.all_passed());
  CHECK(std::abs(rep.checks[0].value) <= 1e-8);

  const Graph p3 = fixtures::path(3);
  const RateConfig rp(p3, (Vector(3) << 1.0, 2.0, 1.0).finished(), Vector::Ones(3));
  CHECK(verify_identities(p3, rp, solve(p3, rp)).all_passed());

  const RateConfig low = RateConfig::homogeneous(k3, 0.3, 1.0);
  CHECK_THROWS_WITH_AS(verify_identities(k3, low, solve(k3, low)), "identities require endemic regime", InputError);
}

TEST_CASE("bounds") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig r = RateConfig::homogeneous(k3, 1.0, 1.0);
  const SteadyBounds b = bounds(k3, r, solve(k3, r));
  CHECK(b.informative);
  CHECK(b.lower == Approx(0.5));
  CHECK(b.upper(0) == Approx(2.0 / 3.0));
  CHECK(b.nodes_within);
  CHECK(b.y_within);

  const Graph e = fixtures::edge();
  const RateConfig re = RateConfig::homogeneous(e, 2.0, 1.0);
  const SteadyState se = solve(e, re);
  const SteadyBounds be = bounds(e, re, se);
  CHECK(be.lower == Approx(se.v_inf(0)).epsilon(1e-9));

  const Graph s4 = fixtures::star(4);
  const RateConfig rs = RateConfig::homogeneous(s4, 2.0, 1.0);
  const SteadyBounds bs = bounds(s4, rs, solve(s4, rs));
  CHECK(bs.lower == Approx(0.5));
  CHECK(bs.nodes_within);

  const SteadyBounds vac = bounds(s4, RateConfig::homogeneous(s4, 0.8, 1.0), solve(s4, RateConfig::homogeneous(s4, 0.8, 1.0)));
  CHECK_FALSE(vac.informative);
  CHECK(vac.nodes_within);
}

TEST_CASE("dichotomy on random graphs") {
  std::mt19937_64 rng(29);
  int endemic = 0;
  int extinct = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 29);
    const Graph g = fixtures::random_connected(n, 0.15, rng);
    const RateConfig r(g, fixtures::random_vector(n, 0.02, 0.7, rng), fixtures::random_vector(n, 0.3, 1.5, rng));
    SteadyState ss;
    try {
      ss = solve(g, r);
    } catch (const NumericalError&) {
      continue;  // landed in the critical band
    }
    if (ss.regime == SteadyRegime::extinct) {
      CHECK(ss.v_inf.isZero());
      ++extinct;
    } else {
      CHECK(ss.v_inf.minCoeff() > 1e-12);
      CHECK((ss.v_inf.array() <= bounds(g, r, ss).upper.array() + 1e-12).all());
      CHECK(verify_identities(g, r, ss).all_passed());
      ++endemic;
    }
  }
  CHECK(endemic > 10);
  CHECK(extinct > 10);
}

TEST_CASE("truncated continued fraction reaches the fixed point") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = fixtures::random_connected(3 + trial, 0.2, rng);
    const RateConfig r = fixtures::endemic_rates(g, 2.0 + trial % 4, rng);
    const SteadyState ss = solve(g, r);
    const Vector cf = truncated_continued_fraction(g, r, ss.iterations);
    CHECK((cf - ss.v_inf).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(nodal_residual(g, r, cf) <= 1e-9);
  }
}

TEST_CASE("uniqueness probe") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = fixtures::random_connected(5 + trial, 0.25, rng);
    const RateConfig r = fixtures::endemic_rates(g, 1.5 + trial % 3, rng);
    CHECK(uniqueness_probe(g, r, solve(g, r)) <= 1e-6);
  }
}

TEST_CASE("iteration cap") {
  const Graph g = fixtures::path(6);
  const RateConfig r = RateConfig::homogeneous(g, 1.0, 1.0);
  CHECK_THROWS_AS(solve(g, r, {1e-15, 3}), NumericalError);
}
