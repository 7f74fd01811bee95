#pragma once

#include <string>

#include "nimfa/graph.hpp"

namespace nimfa {

/// Per-node infection rates beta and curing rates delta on a fixed graph,
/// with the derived effective rates tau = beta / delta and the infection
/// pressure gamma_i = sum_j a_ij beta_j. Immutable after construction.
class RateConfig {
 public:
  /// Throws InputError if lengths differ from the graph size or any rate is
  /// not strictly positive and finite.
  RateConfig(const Graph& g, Vector beta, Vector delta);

  static RateConfig homogeneous(const Graph& g, double beta, double delta);

  /// beta = tau, delta = 1. Sufficient for steady-state and threshold work,
  /// which depend on the rates only through tau up to this normalization.
  static RateConfig from_tau(const Graph& g, const Vector& tau);

  int size() const noexcept { return static_cast<int>(beta_.size()); }
  const Vector& beta() const noexcept { return beta_; }
  const Vector& delta() const noexcept { return delta_; }
  const Vector& tau() const noexcept { return tau_; }
  const Vector& gamma() const noexcept { return gamma_; }

  /// Copy with delta_i replaced.
  RateConfig with_delta(const Graph& g, int i, double delta_i) const;
  /// Copy with every delta replaced by the same value.
  RateConfig with_uniform_delta(const Graph& g, double delta) const;

 private:
  Vector beta_;
  Vector delta_;
  Vector tau_;
  Vector gamma_;
};

/// Reads {"beta": x, "delta": y} where each value is a number (broadcast) or
/// an array of N numbers.
RateConfig parse_rates_json(const Graph& g, const std::string& text);

}  // namespace nimfa
