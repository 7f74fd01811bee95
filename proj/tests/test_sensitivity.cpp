#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "nimfa/error.hpp"
#include "nimfa/sensitivity.hpp"
#include "nimfa/spectral.hpp"

using namespace nimfa;
using doctest::Approx;

namespace {

struct Case {
  const char* name;
  Graph g;
  RateConfig r;
};

// Heterogeneous rates with lambda_max(R) = 3 on the four named graphs.
std::vector<Case> fd_cases() {
  std::mt19937_64 rng(61);
  std::vector<Case> out;
  const std::pair<const char*, Graph> graphs[] = {{"K5", fixtures::complete(5)},
                                                  {"star6", fixtures::star(6)},
                                                  {"path6", fixtures::path(6)},
                                                  {"lattice3x3", fixtures::lattice(3, 3)}};
  for (const auto& [name, g] : graphs) out.push_back({name, g, fixtures::endemic_rates(g, 3.0, rng)});
  return out;
}

RateConfig star4_concave(const Graph& g) {
  return RateConfig(g, Vector::Ones(4), (Vector(4) << 1.0, 0.5, 3.0, 3.0).finished());
}

}  // namespace

TEST_CASE("K3 closed forms") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig r = RateConfig::homogeneous(k3, 1.0, 1.0);
  const SteadyState ss = solve(k3, r);
  const SensitivitySystem sys(k3, r, ss);
  const Matrix s_expected = 5.0 * Matrix::Identity(3, 3) - Matrix::Ones(3, 3);
  CHECK((sys.s() - s_expected).cwiseAbs().maxCoeff() < 1e-9);
  const Matrix inv_expected = 0.2 * Matrix::Identity(3, 3) + 0.1 * Matrix::Ones(3, 3);
  CHECK((sys.s_inverse() - inv_expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sys.s() * inv_expected - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);

  const Matrix d1 = sys.first_derivatives();
  CHECK(d1(0, 0) == Approx(-0.3).epsilon(1e-9));
  CHECK(d1(1, 0) == Approx(-0.1).epsilon(1e-9));
  CHECK((sys.first_derivatives_tied() - Vector::Constant(3, -0.5)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(sys.second_derivatives_tied().cwiseAbs().maxCoeff() < 1e-9);

  const SchurDerivative sd = schur_derivative(k3, r, ss, 0);
  CHECK(sd.f == Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(sd.derivative == Approx(-0.3).epsilon(1e-9));
  CHECK(sd.tau_f <= 1.0);

  // FD check of the independent second derivative
  CHECK(fixtures::relative_gap(sys.second_derivative_column(0), fixtures::fd_second(k3, r, 0)) <= 1e-3);
}

TEST_CASE("single edge Schur form") {
  const Graph e = fixtures::edge();
  const RateConfig r = RateConfig::homogeneous(e, 2.0, 1.0);
  const SteadyState ss = solve(e, r);
  const SchurDerivative sd = schur_derivative(e, r, ss, 0);
  CHECK(sd.f == Approx(0.5).epsilon(1e-9));
  CHECK(sd.derivative == Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(sd.tau_f == Approx(1.0).epsilon(1e-9));
  CHECK(fixtures::fd_first(e, r, 0)(0) == Approx(-1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("tau_i f can exceed one for heterogeneous beta") {
  const Graph e = fixtures::edge();
  const RateConfig r(e, (Vector(2) << 2.0, 4.0).finished(), Vector::Ones(2));
  const SteadyState ss = solve(e, r);
  CHECK(ss.v_inf(0) == Approx(0.7).epsilon(1e-9));
  CHECK(ss.v_inf(1) == Approx(7.0 / 12.0).epsilon(1e-9));
  const SchurDerivative sd = schur_derivative(e, r, ss, 0);
  CHECK(sd.f == Approx(1.0 / 1.44).epsilon(1e-9));
  CHECK(sd.tau_f == Approx(25.0 / 18.0).epsilon(1e-9));
  CHECK(r.tau()(0) * std::pow(1.0 - ss.v_inf(0), 2) * sd.f <= 1.0);
}

TEST_CASE("S structure") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = fixtures::random_connected(3 + trial, 0.25, rng);
    const RateConfig r = fixtures::endemic_rates(g, 1.2 + 0.2 * trial, rng);
    const SteadyState ss = solve(g, r);
    const Matrix sym = symmetrized_S(g, r, ss);
    CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(full_spectrum(sym).smallest() > 1e-10);
    const SensitivitySystem sys(g, r, ss);
    CHECK(sys.s_inverse().minCoeff() >= -1e-10);
    CHECK(sys.first_derivatives().maxCoeff() <= 1e-10);
    CHECK(sys.first_derivatives_tied().maxCoeff() <= 1e-10);
    CHECK((sys.s() * sys.s_inverse() - Matrix::Identity(g.size(), g.size())).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("finite differences on the named graphs") {
  for (const auto& c : fd_cases()) {
    CAPTURE(c.name);
    const SteadyState ss = fixtures::tight_solve(c.g, c.r);
    const SensitivitySystem sys(c.g, c.r, ss);
    const Matrix d1 = sys.first_derivatives();
    const Matrix d2 = sys.second_derivatives();
    for (int i = 0; i < c.g.size(); ++i) {
      CAPTURE(i);
      CHECK(fixtures::relative_gap(d1.col(i), fixtures::fd_first(c.g, c.r, i)) <= 1e-4);
      CHECK(fixtures::relative_gap(d2.col(i), fixtures::fd_second(c.g, c.r, i), 1e-4) <= 1e-3);
      const SchurDerivative sd = schur_derivative(c.g, c.r, ss, i);
      CHECK(std::abs(sd.derivative - d1(i, i)) <= 1e-8 * std::abs(d1(i, i)));
    }
    CHECK(fixtures::relative_gap(sys.first_derivatives_tied(), fixtures::fd_first_tied(c.g, c.r)) <= 1e-4);
    CHECK(fixtures::relative_gap(sys.second_derivatives_tied(), fixtures::fd_second_tied(c.g, c.r), 1e-4) <= 1e-3);
  }
}

TEST_CASE("free-function modes") {
  const Graph g = fixtures::path(4);
  const RateConfig r = RateConfig::homogeneous(g, 2.0, 1.0);
  const SteadyState ss = solve(g, r);
  CHECK(first_derivatives(g, r, ss, DeltaMode::independent).cols() == 4);
  CHECK(first_derivatives(g, r, ss, DeltaMode::tied).cols() == 1);
  CHECK(second_derivatives(g, r, ss, DeltaMode::tied).cols() == 1);
}

TEST_CASE("M matrix consistency and sign") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = fixtures::random_connected(3 + trial, 0.3, rng);
    const RateConfig r = fixtures::endemic_rates(g, 1.5 + 0.3 * trial, rng);
    CHECK(m_matrix(g, r, solve(g, r)).consistent);
  }
  const Graph s4 = fixtures::star(4);
  const RateConfig rs = star4_concave(s4);
  const MDiagnostics star = m_matrix(s4, rs, solve(s4, rs));
  CHECK(star.consistent);
  CHECK(star.m(1, 0) < 0.0);  // concave entry
  CHECK(star.negative_entries > 0);

  const Graph lat = fixtures::lattice(3, 3);
  const RateConfig rl = RateConfig::homogeneous(lat, 1.0, 1.0);
  const MDiagnostics lm = m_matrix(lat, rl, solve(lat, rl));
  CHECK(lm.consistent);
  CHECK(lm.m.minCoeff() > 0.0);
}

TEST_CASE("concavity on a star") {
  const Graph s4 = fixtures::star(4);
  const RateConfig r = star4_concave(s4);
  const SensitivitySystem sys(s4, r, solve(s4, r));
  const double d2 = sys.second_derivative_column(0)(1);
  CHECK(d2 < 0.0);
  CHECK(d2 == Approx(fixtures::fd_second(s4, r, 0)(1)).epsilon(1e-3));

  const ConvexityReport rep = convexity_sweep(s4, r);
  CHECK(rep.verdicts[1][0] != Curvature::convex);
  CHECK(rep.max_d2(1, 0) < 0.0);
}

TEST_CASE("convex verdicts on lattice and complete graph") {
  for (const Graph& g : {fixtures::lattice(3, 3), fixtures::complete(5)}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const RateConfig r = RateConfig::homogeneous(g, beta, 1.0);
      if (lambda_max_R(g, r.tau()) < 1.1) continue;
      const ConvexityReport rep = convexity_sweep(g, r);
      CHECK(rep.evaluated_points > 0);
      for (const auto& row : rep.verdicts)
        for (Curvature c : row) CHECK(c == Curvature::convex);
    }
  }
}

TEST_CASE("tied second derivatives") {
  // Regular graph, equal beta: v = 1 - delta / (beta d) is affine in delta.
  for (const Graph& g : {fixtures::complete(5), fixtures::cycle(7), fixtures::lattice(1, 2)}) {
    const TiedSweep t = tied_convexity_sweep(g, RateConfig::homogeneous(g, 3.0 / fixtures::lambda_max_A(g), 1.0));
    CHECK(t.evaluated_points > 0);
    CHECK(std::abs(t.min_d2) <= 1e-8);
  }

  // Star with three leaves, beta = 1: the hub obeys v0 = 3 - delta - 6 / (delta + 3),
  // strictly concave in the common curing rate.
  const Graph s4 = fixtures::star(4);
  for (double delta : {0.3, 0.8, 1.5}) {
    const RateConfig r = RateConfig::homogeneous(s4, 1.0, delta);
    const SteadyState ss = fixtures::tight_solve(s4, r);
    CHECK(ss.v_inf(0) == Approx(3.0 - delta - 6.0 / (delta + 3.0)).epsilon(1e-10));
    const SensitivitySystem sys(s4, r, ss);
    CHECK(sys.first_derivatives_tied()(0) == Approx(-1.0 + 6.0 / std::pow(delta + 3.0, 2)).epsilon(1e-9));
    CHECK(sys.second_derivatives_tied()(0) == Approx(-12.0 / std::pow(delta + 3.0, 3)).epsilon(1e-8));
  }

  std::mt19937_64 rng(73);
  for (const Graph& g : {fixtures::complete(4), fixtures::star(6), fixtures::path(6), fixtures::lattice(3, 3)}) {
    const RateConfig r0 = fixtures::endemic_rates(g, 2.5, rng);
    const RateConfig r = r0.with_uniform_delta(g, r0.delta().mean() * 0.8);
    const SteadyState ss = fixtures::tight_solve(g, r);
    const SensitivitySystem sys(g, r, ss);
    CHECK(fixtures::relative_gap(sys.first_derivatives_tied(), fixtures::fd_first_tied(g, r)) <= 1e-6);
    CHECK(fixtures::relative_gap(sys.second_derivatives_tied(), fixtures::fd_second_tied(g, r), 1e-4) <= 1e-3);
  }
}

TEST_CASE("optimal curing rate") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig r = RateConfig::homogeneous(k3, 1.0, 1.0);
  const OptimalDelta o = optimal_delta(k3, r, 0, 0.3);
  CHECK(o.delta_star == Approx(1.0).epsilon(1e-7));
  CHECK(o.delta_star > o.lower_bound);
  CHECK(o.explicit_delta == Approx(o.delta_star).epsilon(1e-6));
  CHECK(o.derivative == Approx(-0.3).epsilon(1e-6));

  CHECK_THROWS_AS(optimal_delta(k3, r, 0, 1e3), NumericalError);
  CHECK_THROWS_AS(optimal_delta(k3, r, 0, -1.0), InputError);

  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = fixtures::random_connected(4 + trial, 0.4, rng);
    const RateConfig rr = fixtures::endemic_rates(g, 3.0, rng);
    const SteadyState ss = solve(g, rr);
    const double price = -0.8 * SensitivitySystem(g, rr, ss).first_derivative_column(0)(0);
    const OptimalDelta opt = optimal_delta(g, rr, 0, price);
    CHECK(opt.delta_star > opt.lower_bound);
    CHECK(opt.explicit_delta == Approx(opt.delta_star).epsilon(1e-6));
  }
}

TEST_CASE("appendix ledger") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig r = RateConfig::homogeneous(k3, 1.0, 1.0);
  const AppendixLedger led = appendix_ledger(k3, r, solve(k3, r));
  CHECK(led.all_passed());
  CHECK(led.item("b").rhs == Approx(1.2).epsilon(1e-9));
  CHECK(led.item("d").lhs == Approx(0.6).epsilon(1e-9));
  CHECK(led.item("f").applicable);

  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 14;
    const Graph g = fixtures::random_connected(n, 0.3, rng);
    const RateConfig rr = fixtures::endemic_rates(g, 1.1 + 0.2 * (trial % 10), rng);
    const AppendixLedger l = appendix_ledger(g, rr, solve(g, rr));
    for (const auto& it : l.items) {
      CAPTURE(it.id);
      if (it.applicable) CHECK(it.passed);
    }
    CHECK_FALSE(l.item("f").applicable);
  }
}

TEST_CASE("sub-threshold and critical inputs") {
  const Graph k3 = fixtures::complete(3);
  const RateConfig low = RateConfig::homogeneous(k3, 0.3, 1.0);
  CHECK_THROWS_AS(SensitivitySystem(k3, low, solve(k3, low)), InputError);
  CHECK_THROWS_AS(solve(k3, RateConfig::homogeneous(k3, 0.5, 1.0)), NumericalError);
  const RateConfig near = RateConfig::homogeneous(k3, 0.5 * (1.0 + 1e-3), 1.0);
  CHECK_NOTHROW(SensitivitySystem(k3, near, solve(k3, near)));
}
