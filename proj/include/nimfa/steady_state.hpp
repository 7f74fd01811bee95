#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"

namespace nimfa {

enum class SteadyRegime { extinct, endemic };

std::string to_string(SteadyRegime r);

/// Metastable steady state of the mean-field equations.
struct SteadyState {
  Vector v_inf;    // infection probabilities, each in [0, 1)
  Vector v_tilde;  // diag(beta) v_inf
  Vector w;        // A diag(beta) v_inf + delta
  long iterations = 0;
  double residual = 0.0;  // max_i |sum_j a_ij beta_j v_j - v_i delta_i / (1 - v_i)|
  SteadyRegime regime = SteadyRegime::extinct;
  double y_inf = 0.0;  // mean infection probability
  double lambda_max_R = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  long max_iter = 1'000'000;
};

/// max_i |sum_j a_ij beta_j v_j - v_i delta_i / (1 - v_i)|.
double nodal_residual(const Graph& g, const RateConfig& rates, const Vector& v);

/// Regime from lambda_max(R); above threshold, iterates
/// v_i <- 1 - 1/(1 + (1/delta_i) sum_j beta_j a_ij v_j) from the upper bound
/// v_i = 1 - 1/(1 + gamma_i/delta_i) until the nodal residual is below tol.
///
/// Throws NumericalError("near_critical") within 1e-9 of lambda_max(R) = 1
/// and NumericalError("no_convergence") when max_iter is exhausted.
SteadyState solve(const Graph& g, const RateConfig& rates, const SolveOptions& opts = {});

/// The same map run from an arbitrary positive start.
SteadyState iterate_from(const Graph& g, const RateConfig& rates, Vector start,
                         const SolveOptions& opts = {});

/// Continued fraction truncated after `depth` levels, with the innermost
/// level replaced by 1 + gamma_k/delta_k. Evaluated through the denominators
/// x_i = 1 + gamma_i/delta_i - (1/delta_i) sum_j beta_j a_ij / x_j, so it
/// shares no code with the fixed-point map above.
Vector truncated_continued_fraction(const Graph& g, const RateConfig& rates, long depth);

struct IdentityCheck {
  std::string name;
  double value = 0.0;      // the quantity checked (residual, or margin)
  double tolerance = 0.0;
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  int witness = -1;  // index j with d_j >= 1/(tau_j (1 - v_j))
  bool all_passed() const;
};

/// Steady-state identities: the degree-weighted constraint sum, the
/// existence of a node j with d_j >= 1/(tau_j (1 - v_j)) and the resulting
/// bound on v_j, and (I - diag(v)) w = delta. Requires the endemic regime.
IdentityReport verify_identities(const Graph& g, const RateConfig& rates, const SteadyState& ss);

/// Spectrum of the generalized Laplacian at the steady-state loading
/// q_i = 1/(tau_i (1 - v_i)), whose kernel holds diag(beta) v_inf.
struct LoadingSpectrum {
  Vector q;
  Vector eigenvalues;  // ascending
  double smallest = 0.0;
  double second = 0.0;
  double trace_sum = 0.0;         // sum over the N-1 largest eigenvalues
  double trace_sum_expected = 0.0;  // sum_i q_i
  double trace_square = 0.0;      // sum over the N-1 largest squared eigenvalues
  double trace_square_expected = 0.0;  // sum_i q_i^2 + 2L
  double orthogonality = 0.0;     // max |sum_j beta_j v_j y_j| over y with eigenvalue > 1e-7
  bool kernel_ok = false;         // |lambda_N| <= 1e-7 and lambda_{N-1} > 1e-7
  bool traces_ok = false;         // both trace sums within 1e-8 relative
  bool orthogonal_ok = false;     // orthogonality <= 1e-7
  bool passed() const { return kernel_ok && traces_ok && orthogonal_ok; }
};

LoadingSpectrum loading_spectrum(const Graph& g, const RateConfig& rates, const SteadyState& ss);

struct SteadyBounds {
  bool informative = false;  // min_k gamma_k/delta_k > 1
  double lower = 0.0;
  Vector upper;
  double y_lower = 0.0;
  double y_upper = 0.0;
  bool nodes_within = true;
  bool y_within = true;
};

SteadyBounds bounds(const Graph& g, const RateConfig& rates, const SteadyState& ss);

/// Restarts the iteration from `starts` random positive vectors and returns
/// the largest infinity-norm distance from ss.v_inf. Diagnostic only.
double uniqueness_probe(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                        int starts = 10, std::uint64_t seed = 1);

}  // namespace nimfa
