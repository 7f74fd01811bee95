#include "nimfa/markov_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nimfa/error.hpp"
#include "nimfa/parallel.hpp"

namespace nimfa {

ExactChain build_exact_chain(const Graph& g, const RateConfig& rates) {
  const int n = g.size();
  if (n > kMaxExactNodes) throw InputError("exact chain too large");
  const Eigen::Index states = Eigen::Index{1} << n;
  const Matrix& a = g.adjacency();
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(states) * static_cast<std::size_t>(n + 1));
  ExactChain chain;
  chain.n = n;
  chain.outflow = Vector::Zero(states);
  for (Eigen::Index s = 1; s < states; ++s) {
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Index bit = Eigen::Index{1} << i;
      double rate = 0.0;
      if (s & bit) {
        rate = delta(i);
      } else {
        for (int j = 0; j < n; ++j) {
          if (s & (Eigen::Index{1} << j)) rate += beta(j) * a(i, j);
        }
      }
      if (rate > 0.0) {
        entries.emplace_back(s, s ^ bit, rate);
        out += rate;
      }
    }
    entries.emplace_back(s, s, -out);
    chain.outflow(s) = out;
  }
  chain.generator.resize(states, states);
  chain.generator.setFromTriplets(entries.begin(), entries.end());
  chain.uniformization_rate = 1.1 * chain.outflow.maxCoeff();
  return chain;
}

Vector point_distribution(const ExactChain& chain, std::uint64_t state) {
  expect(static_cast<Eigen::Index>(state) < chain.states(), "state out of range");
  Vector p = Vector::Zero(chain.states());
  p(static_cast<Eigen::Index>(state)) = 1.0;
  return p;
}

namespace {

constexpr double kMaxJumpsPerChunk = 50.0;
constexpr double kTailMass = 1e-12;

// sum_k Poisson(k; rate t) step^k(v), chunked so exp(-rate t) stays representable.
// Each chunk is divided by the Poisson mass actually summed.
template <typename Step>
Vector uniformize(const ExactChain& chain, Vector v, double t, Step step) {
  expect(std::isfinite(t) && t >= 0.0, "time must be non-negative");
  const double lambda = chain.uniformization_rate;
  if (t == 0.0 || lambda == 0.0) return v;
  const long chunks = std::max(1L, static_cast<long>(std::ceil(lambda * t / kMaxJumpsPerChunk)));
  const double mean = lambda * t / static_cast<double>(chunks);
  const long cap = static_cast<long>(mean + 40.0 * std::sqrt(mean) + 100.0);
  for (long c = 0; c < chunks; ++c) {
    double weight = std::exp(-mean);
    double mass = weight;
    Vector term = v;
    Vector acc = weight * term;
    for (long k = 1; k <= cap && 1.0 - mass > kTailMass; ++k) {
      term = step(term);
      weight *= mean / static_cast<double>(k);
      acc += weight * term;
      mass += weight;
    }
    v = acc / mass;
  }
  return v;
}

}  // namespace

Vector exact_transient(const ExactChain& chain, const Vector& p0, double t) {
  expect(p0.size() == chain.states(), "distribution length does not match the chain");
  expect((p0.array() >= 0.0).all() && std::abs(p0.sum() - 1.0) <= 1e-9,
         "initial distribution must be non-negative and sum to one");
  const double lambda = chain.uniformization_rate;
  return uniformize(chain, p0, t, [&](const Vector& p) -> Vector {
    return p + (chain.generator.transpose() * p) / lambda;
  });
}

Vector exact_backward(const ExactChain& chain, const Vector& f, double t) {
  expect(f.size() == chain.states(), "function length does not match the chain");
  const double lambda = chain.uniformization_rate;
  return uniformize(chain, f, t, [&](const Vector& x) -> Vector {
    return x + (chain.generator * x) / lambda;
  });
}

Vector exact_marginals(const ExactChain& chain, const Vector& p) {
  Vector m = Vector::Zero(chain.n);
  for (Eigen::Index s = 1; s < p.size(); ++s) {
    for (int i = 0; i < chain.n; ++i) {
      if (s & (Eigen::Index{1} << i)) m(i) += p(s);
    }
  }
  return m;
}

Vector quasi_stationary_marginals(const ExactChain& chain, const Vector& p) {
  const double alive = 1.0 - p(0);
  if (!(alive > 0.0)) throw NumericalError("absorbed", "distribution is fully absorbed");
  return exact_marginals(chain, p) / alive;
}

ConditionedPrevalence conditioned_prevalence(const ExactChain& chain, double horizon, double burn_in,
                                             int intervals) {
  expect(horizon > burn_in && burn_in >= 0.0, "need 0 <= burn_in < horizon");
  expect(intervals >= 2 && intervals % 2 == 0, "Simpson's rule needs an even interval count");
  const double h = (horizon - burn_in) / intervals;
  const Vector start = point_distribution(chain, (std::uint64_t{1} << chain.n) - 1);

  // survival[k] = Pr_s[not absorbed within k h]
  std::vector<Vector> survival;
  survival.reserve(static_cast<std::size_t>(intervals) + 1);
  Vector alive = Vector::Ones(chain.states());
  alive(0) = 0.0;
  survival.push_back(alive);
  for (int k = 1; k <= intervals; ++k) survival.push_back(exact_backward(chain, survival.back(), h));

  Vector p = exact_transient(chain, start, burn_in);
  Vector integral = Vector::Zero(chain.n);
  for (int k = 0; k <= intervals; ++k) {
    if (k > 0) p = exact_transient(chain, p, h);
    const Vector weighted = p.cwiseProduct(survival[static_cast<std::size_t>(intervals - k)]);
    const double coefficient = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    integral += coefficient * exact_marginals(chain, weighted);
  }
  integral *= h / 3.0;

  ConditionedPrevalence out;
  out.survival = exact_backward(chain, alive, horizon).dot(start);
  if (!(out.survival > 0.0)) throw NumericalError("absorbed", "survival probability is zero");
  out.prevalence = integral / ((horizon - burn_in) * out.survival);
  out.y = out.prevalence.mean();
  return out;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// splitmix64 output for (key, counter): no state beyond the counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}

  double uniform() {
    const std::uint64_t bits = mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct ReplicaResult {
  bool survived = false;
  Vector occupancy;  // fraction of [burn_in, horizon] spent infected
};

ReplicaResult run_replica(const Graph& g, const RateConfig& rates, double horizon, double burn_in,
                          std::uint64_t key) {
  const int n = g.size();
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();
  CounterRng rng(key);

  std::vector<char> infected(static_cast<std::size_t>(n), 1);
  Vector pressure = rates.gamma();
  std::vector<double> since(static_cast<std::size_t>(n), 0.0);
  ReplicaResult out;
  out.occupancy = Vector::Zero(n);

  auto credit = [&](int i, double until) {
    const double lo = std::max(since[static_cast<std::size_t>(i)], burn_in);
    const double hi = std::min(until, horizon);
    if (hi > lo) out.occupancy(i) += hi - lo;
  };

  int infected_count = n;
  double t = 0.0;
  while (true) {
    if (infected_count == 0) return out;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += infected[static_cast<std::size_t>(i)] ? delta(i) : pressure(i);
    t += -std::log(rng.uniform()) / total;
    if (t >= horizon) break;

    double target = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      target -= infected[static_cast<std::size_t>(i)] ? delta(i) : pressure(i);
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    auto& state = infected[static_cast<std::size_t>(pick)];
    const double sign = state ? -1.0 : 1.0;
    if (state) {
      credit(pick, t);
      --infected_count;
    } else {
      since[static_cast<std::size_t>(pick)] = t;
      ++infected_count;
    }
    state = static_cast<char>(!state);
    for (int j : g.neighbors(pick)) pressure(j) += sign * beta(pick);
  }
  for (int i = 0; i < n; ++i) {
    if (infected[static_cast<std::size_t>(i)]) credit(i, horizon);
  }
  out.survived = true;
  out.occupancy /= horizon - burn_in;
  return out;
}

}  // namespace

SimEstimate simulate(const Graph& g, const RateConfig& rates, double horizon, double burn_in,
                     long replicas, std::uint64_t seed) {
  expect(replicas >= 1, "replicas must be at least 1");
  expect(std::isfinite(horizon) && burn_in >= 0.0 && burn_in < horizon,
         "need 0 <= burn_in < horizon");

  std::vector<ReplicaResult> results(static_cast<std::size_t>(replicas));
  parallel_for(replicas, [&](long r) {
    results[static_cast<std::size_t>(r)] =
        run_replica(g, rates, horizon, burn_in, mix64(seed) ^ static_cast<std::uint64_t>(r));
  });

  const int n = g.size();
  SimEstimate est;
  est.replicas = replicas;
  est.seed = seed;
  Vector sum = Vector::Zero(n);
  Vector sum_sq = Vector::Zero(n);
  double y_sum = 0.0;
  double y_sum_sq = 0.0;
  for (const auto& r : results) {
    if (!r.survived) continue;
    ++est.survivors;
    sum += r.occupancy;
    sum_sq += r.occupancy.cwiseAbs2();
    const double y = r.occupancy.mean();
    y_sum += y;
    y_sum_sq += y * y;
  }
  if (est.survivors == 0) {
    throw NumericalError("no_survivors", "no surviving replicas; raise τ or shorten horizon");
  }
  const double m = static_cast<double>(est.survivors);
  est.survival_fraction = m / static_cast<double>(replicas);
  est.prevalence_mean = sum / m;
  est.y_mean = y_sum / m;
  if (est.survivors > 1) {
    const Vector var = ((sum_sq - m * est.prevalence_mean.cwiseAbs2()) / (m - 1.0)).cwiseMax(0.0);
    est.std_error = (var / m).cwiseSqrt();
    const double y_var = std::max(0.0, (y_sum_sq - m * est.y_mean * est.y_mean) / (m - 1.0));
    est.y_std_error = std::sqrt(y_var / m);
  } else {
    est.std_error = Vector::Zero(n);
  }
  return est;
}

}  // namespace nimfa
