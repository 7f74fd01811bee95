#pragma once

#include <cstdint>

#include <Eigen/SparseCore>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"

namespace nimfa {

constexpr int kMaxExactNodes = 14;

/// The exact SIS chain on 2^N states. State s has bit i set when node i is
/// infected; state 0 (all healthy) is absorbing.
struct ExactChain {
  int n = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> generator;
  Vector outflow;  // -diag(generator)
  double uniformization_rate = 0.0;  // 1.1 * max outflow

  Eigen::Index states() const { return generator.rows(); }
};

/// Throws InputError("exact chain too large") for N > 14.
ExactChain build_exact_chain(const Graph& g, const RateConfig& rates);

/// Distribution over states with all probability on state s.
Vector point_distribution(const ExactChain& chain, std::uint64_t state);

/// p(t) = p0 exp(G t) by uniformization, advanced in chunks of at most 50
/// expected jumps, each truncated once the Poisson tail is below 1e-12.
Vector exact_transient(const ExactChain& chain, const Vector& p0, double t);

/// exp(G t) f, the backward counterpart: (exp(G t) f)(s) = E_s[f(X_t)].
Vector exact_backward(const ExactChain& chain, const Vector& f, double t);

/// Pr[X_i = 1] under distribution p.
Vector exact_marginals(const ExactChain& chain, const Vector& p);

/// Marginals of p restricted to the non-absorbed states and renormalized.
Vector quasi_stationary_marginals(const ExactChain& chain, const Vector& p);

struct ConditionedPrevalence {
  Vector prevalence;  // per node
  double y = 0.0;
  double survival = 0.0;  // Pr[not absorbed by the horizon]
};

/// Expected occupancy averaged over [burn_in, horizon] for paths started
/// all-infected and not absorbed by the horizon, which is the quantity the
/// simulator estimates: forward distributions weighted by backward survival,
/// integrated with Simpson's rule on `intervals` (even) subintervals.
ConditionedPrevalence conditioned_prevalence(const ExactChain& chain, double horizon, double burn_in,
                                             int intervals = 400);

struct SimEstimate {
  Vector prevalence_mean;  // per-node occupancy over [burn_in, horizon], surviving replicas
  double y_mean = 0.0;
  Vector std_error;  // per-node standard errors
  double y_std_error = 0.0;
  long replicas = 0;
  long survivors = 0;
  std::uint64_t seed = 0;
  double survival_fraction = 0.0;
};

/// Event-driven SIS simulation from the all-infected state. Replica r draws
/// from a counter-based stream keyed by seed ^ r, so the estimate depends
/// only on the arguments and not on scheduling. Replicas absorbed before the
/// horizon are excluded. Throws NumericalError("no_survivors") when every
/// replica is absorbed.
SimEstimate simulate(const Graph& g, const RateConfig& rates, double horizon, double burn_in,
                     long replicas, std::uint64_t seed);

}  // namespace nimfa
