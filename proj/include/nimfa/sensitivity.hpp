#pragma once

#include <string>
#include <vector>

#include <Eigen/LU>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"
#include "nimfa/steady_state.hpp"

namespace nimfa {

/// How the curing rates move when one is varied: only delta_i
/// (independent), or all of them together (tied).
enum class DeltaMode { independent, tied };

enum class Curvature { convex, concave, indefinite };

std::string to_string(Curvature c);

/// Linearization of the steady-state equations around an endemic V_inf:
/// S = diag(delta_j / (1 - v_j)^2) - A diag(beta), its LU factors, and S^-1.
class SensitivitySystem {
 public:
  /// Throws InputError for an extinct state and NumericalError("near_critical")
  /// when the reciprocal condition estimate of S falls below 1e-12.
  SensitivitySystem(const Graph& g, const RateConfig& rates, const SteadyState& ss);

  const Matrix& s() const noexcept { return s_; }
  const Matrix& s_inverse() const noexcept { return s_inverse_; }
  double rcond() const noexcept { return rcond_; }

  /// Columns dV/d delta_i = -(v_i / (1 - v_i)) S^-1 e_i.
  Matrix first_derivatives() const;
  /// dV/d delta along delta + h u.
  Vector first_derivatives_tied() const;

  /// Columns d^2V/d delta_i^2 = -S^-1 W_i, with W_i the second-order
  /// right-hand side built from the first derivatives.
  Matrix second_derivatives() const;
  Vector second_derivatives_tied() const;

  /// Column i of the first and second derivatives only.
  Vector first_derivative_column(int i) const;
  Vector second_derivative_column(int i) const;

  /// M_ki = (S^-1)_ki (S^-1)_ii / (1 - v_i)
  ///        - v_i sum_j (S^-1)_kj delta_j ((S^-1)_ji)^2 / (1 - v_j)^3.
  Matrix m_matrix() const;

  const Vector& v() const noexcept { return v_; }

 private:
  Vector second_rhs(const Vector& d1, const Vector& first_order_term) const;

  Vector v_;
  Vector one_minus_v_;
  Vector delta_;
  Matrix s_;
  Eigen::PartialPivLU<Matrix> lu_;
  Matrix s_inverse_;
  double rcond_ = 0.0;
};

/// S, after checking it against the generalized-Laplacian form
/// Q(1 / (tau_j (1 - v_j)^2)) diag(beta) entrywise to 1e-10.
Matrix build_S(const Graph& g, const RateConfig& rates, const SteadyState& ss);

/// diag(sqrt(beta)) Q(1 / (tau_j (1 - v_j)^2)) diag(sqrt(beta)), which is
/// similar to S and symmetric for any beta.
Matrix symmetrized_S(const Graph& g, const RateConfig& rates, const SteadyState& ss);

/// Independent mode returns an N x N matrix (column i holds dV/d delta_i);
/// tied mode returns N x 1.
Matrix first_derivatives(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                         DeltaMode mode);
Matrix second_derivatives(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                          DeltaMode mode);

struct MDiagnostics {
  Matrix m;
  Matrix scaled_d2;  // (1 - v_i)^2 / (2 v_i) * d2(k, i)
  double max_relative_gap = 0.0;  // over entries with |M_ki| > 1e-10
  bool consistent = false;        // max_relative_gap <= 1e-7
  int positive_entries = 0;
  int negative_entries = 0;
};

MDiagnostics m_matrix(const Graph& g, const RateConfig& rates, const SteadyState& ss);

struct SchurDerivative {
  double f = 0.0;           // a_i^T Q_{G\i}(1/(tau (1-v)^2))^-1 a_i
  double derivative = 0.0;  // dv_i / d delta_i by the Schur form
  double linear_solve = 0.0;  // the same entry from S^-1
  double tau_f = 0.0;         // tau_i f, reported only
};

/// Self-derivative through the node-deleted generalized Laplacian. Checks
/// f > 0, tau_i (1 - v_i)^2 f <= 1 and agreement with the linear solve to
/// 1e-8 relative; throws NumericalError if any fails. tau_i f can exceed one
/// for heterogeneous beta (single edge, beta = (2, 4), delta = 1: 25/18), so
/// it is reported without a check.
SchurDerivative schur_derivative(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                                 int i);

struct OptimalDelta {
  double delta_star = 0.0;
  double v_i = 0.0;
  double derivative = 0.0;   // dv_i/d delta_i at delta_star
  double lower_bound = 0.0;  // (1 - v_i) v_i / c_i
  double explicit_delta = 0.0;  // (1 - v_i) v_i / c_i + beta_i (1 - v_i)^2 f
};

/// Minimizer of J_i = c_i delta_i + v_i over delta_i with the other rates
/// fixed: the first sign change of c_i + dv_i/d delta_i from negative to
/// positive on a log grid across the endemic range, refined by bisection to
/// 1e-8. Throws NumericalError("no_interior_optimum") when no sign change
/// exists.
OptimalDelta optimal_delta(const Graph& g, const RateConfig& rates, int i, double price);

/// One family of identities or inequalities on S^-1, aggregated over all
/// applicable (i, j). `lhs`/`rhs` are the two sides at the worst case.
struct LedgerItem {
  std::string id;
  std::string description;
  bool applicable = true;
  bool passed = true;
  int checked = 0;
  int failures = 0;
  double worst_margin = 0.0;  // smallest (rhs - lhs) for <=, largest |lhs - rhs| for =
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AppendixLedger {
  std::vector<LedgerItem> items;
  bool all_passed() const;
  const LedgerItem& item(const std::string& id) const;
};

/// Identities and inequalities of S^-1 at an endemic state (items a-h plus
/// entrywise non-negativity). The positive-definite entry bound (f) assumes
/// a symmetric S and is only applicable when all beta are equal.
AppendixLedger appendix_ledger(const Graph& g, const RateConfig& rates, const SteadyState& ss);

struct SweepOptions {
  int points = 20;
  double low_factor = 0.5;
  double high_factor = 2.0;
  double curvature_band = 1e-8;
  /// Sweep points with lambda_max(R) below 1 + margin are skipped.
  double endemic_margin = 1e-3;
};

struct ConvexityReport {
  std::vector<std::vector<Curvature>> verdicts;  // [k][i]
  Matrix min_d2;  // smallest d2(k, i) seen across the sweep of delta_i
  Matrix max_d2;
  int evaluated_points = 0;
};

/// Sweeps each delta_i over a geometric grid between low_factor and
/// high_factor times its value (others fixed), classifying every
/// d^2 v_k / d delta_i^2 by sign with the dead-band curvature_band.
ConvexityReport convexity_sweep(const Graph& g, const RateConfig& rates, const SweepOptions& opts = {});

struct TiedSweep {
  std::vector<double> deltas;
  double min_d2 = 0.0;
  int evaluated_points = 0;
};

/// Sets every delta to a common value on a geometric grid and records the
/// smallest tied-mode second derivative. The sign is not fixed: on a star
/// with three leaves and beta = 1 the hub has d2 = -12 / (delta + 3)^3.
TiedSweep tied_convexity_sweep(const Graph& g, const RateConfig& rates,
                               const SweepOptions& opts = {});

}  // namespace nimfa
