#include "nimfa/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "nimfa/error.hpp"
#include "nimfa/spectral.hpp"

namespace nimfa {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::not_infected: return "not_infected";
    case Regime::critical: return "critical";
    case Regime::infected: return "infected";
  }
  return "unknown";
}

Regime regime_of(double lambda_max_R) {
  if (std::abs(lambda_max_R - 1.0) <= kCriticalBand) return Regime::critical;
  return lambda_max_R < 1.0 ? Regime::not_infected : Regime::infected;
}

bool ThresholdReport::all_bounds_satisfied() const {
  return std::all_of(bound_ledger.begin(), bound_ledger.end(),
                     [](const BoundEntry& e) { return !e.applicable || e.satisfied; });
}

double lambda_max_R(const Graph& g, const Vector& tau) {
  return lambda_max(build_R(g, tau)).value;
}

namespace {

BoundEntry make_entry(std::string name, double lhs, const char* relation, double rhs,
                      double tolerance, bool applicable = true) {
  BoundEntry e{std::move(name), lhs, relation, rhs, tolerance, applicable, true};
  const double slack = tolerance * std::max({1.0, std::abs(lhs), std::abs(rhs)});
  e.satisfied = e.relation == "<=" ? lhs <= rhs + slack : lhs >= rhs - slack;
  return e;
}

}  // namespace

BoundLedger verify_bounds(const Graph& g, const Vector& tau) {
  expect(tau.size() == g.size(), "tau length does not match graph size");
  const double lam_r = lambda_max_R(g, tau);
  const double lam_a = lambda_max(g.adjacency()).value;
  const WalkCounts walks = walk_counts(g);
  const Vector& d = g.degrees();
  const double n = g.size();

  const double tau_min = tau.minCoeff();
  const double tau_max = tau.maxCoeff();
  const double inv_tau_sum = tau.cwiseInverse().sum();
  const double deg_sq_over_tau = d.cwiseAbs2().cwiseQuotient(tau).sum();
  const double deg_over_tau = d.cwiseQuotient(tau).sum();

  constexpr double kTol = 1e-9;
  // Critical-surface forms assume lambda_max(R) = 1 exactly; the band
  // admits a 1e-9 relative error in that premise.
  constexpr double kCriticalTol = 1e-8;
  const bool critical = regime_of(lam_r) == Regime::critical;

  BoundLedger ledger;
  ledger.push_back(make_entry("tau_min_lower", lam_a * tau_min, "<=", lam_r, kTol));
  ledger.push_back(make_entry("tau_max_upper", lam_r, "<=", lam_a * tau_max, kTol));
  ledger.push_back(make_entry("inverse_tau_sum", lam_r, ">=", 2.0 * g.link_count() / inv_tau_sum, kTol));
  ledger.push_back(make_entry("degree_vector_walks", lam_r, ">=",
                              walks.total_length3 / deg_sq_over_tau, kTol));
  ledger.push_back(make_entry("closed_walks", lam_r * deg_over_tau, ">=", walks.closed_length3, kTol));

  ledger.push_back(make_entry("critical_tau_min", tau_min, "<=", 1.0 / lam_a, kCriticalTol, critical));
  ledger.push_back(make_entry("critical_tau_max", 1.0 / lam_a, "<=", tau_max, kCriticalTol, critical));
  ledger.push_back(make_entry("critical_degree_square", deg_sq_over_tau, ">=",
                              walks.total_length3, kCriticalTol, critical));
  ledger.push_back(make_entry("critical_closed_walks", deg_over_tau, ">=", walks.closed_length3,
                              kCriticalTol, critical));
  ledger.push_back(make_entry("critical_harmonic_mean", inv_tau_sum / n, ">=",
                              2.0 * g.link_count() / n, kCriticalTol, critical));
  return ledger;
}

ThresholdReport classify(const Graph& g, const RateConfig& rates) {
  ThresholdReport out;
  out.lambda_max_R = lambda_max_R(g, rates.tau());
  out.regime = regime_of(out.lambda_max_R);
  out.tau_min = rates.tau().minCoeff();
  out.tau_max = rates.tau().maxCoeff();
  out.bound_ledger = verify_bounds(g, rates.tau());
  return out;
}

double critical_scaling(const Graph& g, const Vector& tau0) {
  expect(tau0.size() == g.size(), "direction length does not match graph size");
  expect(tau0.allFinite() && tau0.minCoeff() > 0.0, "direction must be strictly positive");

  auto excess = [&](double s) { return lambda_max_R(g, s * tau0) - 1.0; };
  double lo = 1.0;
  double hi = 1.0;
  while (excess(lo) > 0.0) lo /= 2.0;
  while (excess(hi) <= 0.0) hi *= 2.0;
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  const double s_star = 0.5 * (lo + hi);

  const double linear = 1.0 / lambda_max_R(g, tau0);
  if (std::abs(s_star - linear) > 1e-9 * linear) {
    throw NumericalError("inconsistent", "critical scaling " + std::to_string(s_star) +
                                             " disagrees with 1/lambda_max(R) = " +
                                             std::to_string(linear));
  }
  return s_star;
}

double kn_lambda_max(const Vector& tau) {
  const auto n = tau.size();
  expect(n >= 2, "complete graph needs at least two nodes");
  expect(tau.allFinite() && tau.minCoeff() > 0.0, "tau must be strictly positive");

  // r(lambda) = sum_j 1/(tau_j + lambda) - (N-1)/lambda is negative below the
  // root and positive above it on (0, inf).
  auto r = [&](double lambda) {
    return (tau.array() + lambda).inverse().sum() - static_cast<double>(n - 1) / lambda;
  };
  double lo = 0.0;
  double hi = tau.sum() - tau.minCoeff();
  // Bisect until the bracket stops shrinking.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (r(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

KnCriticalCheck kn_critical_check(const Vector& tau) {
  expect(tau.size() >= 2, "complete graph needs at least two nodes");
  expect(tau.allFinite() && tau.minCoeff() > 0.0, "tau must be strictly positive");
  KnCriticalCheck out;
  out.sum = (tau.array() + 1.0).inverse().sum();
  out.on_surface = std::abs(out.sum - static_cast<double>(tau.size() - 1)) <= 1e-9;
  return out;
}

double kn_perturbation(double h2, int n) {
  expect(n >= 2, "complete graph needs at least two nodes");
  const double denom = 1.0 + 2.0 * (n - 1.0) / n * h2;
  if (std::abs(denom) <= 1e-12) {
    throw NumericalError("pole", "perturbation relation has a pole at h2 = " + std::to_string(h2));
  }
  return -h2 / denom;
}

}  // namespace nimfa
