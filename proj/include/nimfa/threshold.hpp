#pragma once

#include <string>
#include <vector>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"

namespace nimfa {

enum class Regime { not_infected, critical, infected };

std::string to_string(Regime r);

/// Half-width of the band around lambda_max(R) = 1 reported as critical.
inline constexpr double kCriticalBand = 1e-9;

Regime regime_of(double lambda_max_R);

/// One inequality of the bound ledger. Both sides are stored so a reader
/// can see the slack; `satisfied` is `lhs relation rhs` up to `tolerance`
/// relative to max(1, |lhs|, |rhs|). Entries that only hold on the critical
/// surface carry applicable = false elsewhere.
struct BoundEntry {
  std::string name;
  double lhs = 0.0;
  std::string relation;  // "<=" or ">="
  double rhs = 0.0;
  double tolerance = 0.0;
  bool applicable = true;
  bool satisfied = true;
};

using BoundLedger = std::vector<BoundEntry>;

struct ThresholdReport {
  double lambda_max_R = 0.0;
  Regime regime = Regime::not_infected;
  double tau_min = 0.0;
  double tau_max = 0.0;
  BoundLedger bound_ledger;

  bool all_bounds_satisfied() const;
};

/// lambda_max(R) by power iteration.
double lambda_max_R(const Graph& g, const Vector& tau);

ThresholdReport classify(const Graph& g, const RateConfig& rates);

/// Evaluates the Rayleigh-quotient bounds on lambda_max(R) and, at the
/// critical threshold, the bounds on the critical tau vector. Every side is
/// computed along an independent path: lambda_max(A) and lambda_max(R) by
/// power iteration, walk counts by matrix-vector products.
BoundLedger verify_bounds(const Graph& g, const Vector& tau);

/// Scale s* with lambda_max(R(s* tau0)) = 1, by bisection on s. Cross-checks
/// the result against 1 / lambda_max(R(tau0)) and throws NumericalError if
/// they disagree.
double critical_scaling(const Graph& g, const Vector& tau0);

/// Largest eigenvalue of R on the complete graph K_N: the positive root of
/// sum_j 1/(tau_j + lambda) = (N - 1)/lambda, bracketed by
/// (0, sum tau - tau_min].
double kn_lambda_max(const Vector& tau);

struct KnCriticalCheck {
  double sum = 0.0;  // sum_j 1/(tau_j + 1)
  bool on_surface = false;
};

/// On the complete graph, tau is critical iff sum_j 1/(tau_j + 1) = N - 1.
KnCriticalCheck kn_critical_check(const Vector& tau);

/// Deviation h1 of tau_1 from 1/(N-1) that keeps K_N critical when tau_2 is
/// perturbed by h2 and all other components stay homogeneous.
double kn_perturbation(double h2, int n);

}  // namespace nimfa
