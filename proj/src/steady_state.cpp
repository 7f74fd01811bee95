#include "nimfa/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nimfa/error.hpp"
#include "nimfa/spectral.hpp"
#include "nimfa/threshold.hpp"

namespace nimfa {

std::string to_string(SteadyRegime r) {
  return r == SteadyRegime::endemic ? "endemic" : "extinct";
}

double nodal_residual(const Graph& g, const RateConfig& rates, const Vector& v) {
  const Vector pressure = g.adjacency() * rates.beta().cwiseProduct(v);
  const Vector curing = v.cwiseProduct(rates.delta()).cwiseQuotient((1.0 - v.array()).matrix());
  return (pressure - curing).cwiseAbs().maxCoeff();
}

namespace {

void finish(const Graph& g, const RateConfig& rates, SteadyState& ss) {
  ss.v_tilde = rates.beta().cwiseProduct(ss.v_inf);
  ss.w = g.adjacency() * ss.v_tilde + rates.delta();
  ss.y_inf = ss.v_inf.mean();
}

}  // namespace

SteadyState iterate_from(const Graph& g, const RateConfig& rates, Vector start,
                         const SolveOptions& opts) {
  expect(start.size() == g.size(), "start vector length does not match graph size");
  SteadyState ss;
  ss.regime = SteadyRegime::endemic;
  Vector v = std::move(start);
  const Matrix& a = g.adjacency();
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();

  for (long it = 0;; ++it) {
    if (v.maxCoeff() >= 1.0) {
      throw NumericalError("saturated", "steady-state iterate reached v_i = 1");
    }
    const Vector pressure = a * beta.cwiseProduct(v);
    const Vector curing = v.cwiseProduct(delta).cwiseQuotient((1.0 - v.array()).matrix());
    ss.residual = (pressure - curing).cwiseAbs().maxCoeff();
    if (ss.residual <= opts.tol) {
      ss.iterations = it;
      break;
    }
    if (it >= opts.max_iter) {
      throw NumericalError("no_convergence",
                           "steady state did not converge within " + std::to_string(opts.max_iter) +
                               " iterations; last residual " + std::to_string(ss.residual));
    }
    v = (1.0 - (1.0 + pressure.cwiseQuotient(delta).array()).inverse()).matrix();
  }
  ss.v_inf = std::move(v);
  finish(g, rates, ss);
  return ss;
}

SteadyState solve(const Graph& g, const RateConfig& rates, const SolveOptions& opts) {
  const double lam = lambda_max_R(g, rates.tau());
  const Regime regime = regime_of(lam);
  if (regime == Regime::critical) {
    throw NumericalError("near_critical", "at critical threshold, derivative undefined");
  }
  if (regime == Regime::not_infected) {
    SteadyState ss;
    ss.regime = SteadyRegime::extinct;
    ss.v_inf = Vector::Zero(g.size());
    ss.lambda_max_R = lam;
    finish(g, rates, ss);
    return ss;
  }
  const Vector upper =
      (1.0 - (1.0 + rates.gamma().cwiseQuotient(rates.delta()).array()).inverse()).matrix();
  SteadyState ss = iterate_from(g, rates, upper, opts);
  ss.lambda_max_R = lam;
  if (ss.v_inf.minCoeff() <= 0.0) {
    throw NumericalError("dichotomy", "endemic steady state has a zero component");
  }
  return ss;
}

Vector truncated_continued_fraction(const Graph& g, const RateConfig& rates, long depth) {
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();
  const Vector head = (1.0 + rates.gamma().cwiseQuotient(delta).array()).matrix();
  Vector x = head;
  for (long level = 0; level < depth; ++level) {
    x = head - (g.adjacency() * beta.cwiseQuotient(x)).cwiseQuotient(delta);
  }
  return (1.0 - x.array().inverse()).matrix();
}

bool IdentityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

IdentityReport verify_identities(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  if (ss.regime != SteadyRegime::endemic) {
    throw InputError("identities require endemic regime");
  }
  const Vector& v = ss.v_inf;
  const Vector& d = g.degrees();
  const Vector one_minus_v = (1.0 - v.array()).matrix();
  const Vector q = rates.tau().cwiseProduct(one_minus_v).cwiseInverse();

  IdentityReport report;

  const double constraint = (q - d).cwiseProduct(ss.v_tilde).sum();
  report.checks.push_back({"constraint_sum", constraint, 1e-7, std::abs(constraint) <= 1e-7});

  Eigen::Index j = 0;
  const double margin = (d - q).maxCoeff(&j);
  report.witness = static_cast<int>(j);
  constexpr double kSlack = 1e-9;
  report.checks.push_back({"degree_exceeds_loading", margin, kSlack,
                           margin >= -kSlack * std::max(1.0, d(j))});

  const double cap = 1.0 - 1.0 / (rates.tau()(j) * d(j));
  report.checks.push_back({"witness_probability_cap", cap - v(j), kSlack, v(j) <= cap + kSlack});

  const double balance = (one_minus_v.cwiseProduct(ss.w) - rates.delta()).cwiseAbs().maxCoeff();
  report.checks.push_back({"w_balance", balance, 1e-9, balance <= 1e-9});
  return report;
}

LoadingSpectrum loading_spectrum(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  if (ss.regime != SteadyRegime::endemic) {
    throw InputError("identities require endemic regime");
  }
  LoadingSpectrum out;
  const Vector one_minus_v = (1.0 - ss.v_inf.array()).matrix();
  out.q = rates.tau().cwiseProduct(one_minus_v).cwiseInverse();
  const auto gl = build_generalized_laplacian(g, out.q);
  const auto spec = full_spectrum(gl.matrix, true);
  out.eigenvalues = spec.eigenvalues;
  const auto n = out.eigenvalues.size();
  out.smallest = out.eigenvalues(0);
  out.second = n > 1 ? out.eigenvalues(1) : std::numeric_limits<double>::infinity();

  const Vector upper = out.eigenvalues.tail(n - 1);
  out.trace_sum = upper.sum();
  out.trace_sum_expected = out.q.sum();
  out.trace_square = upper.squaredNorm();
  out.trace_square_expected = out.q.squaredNorm() + 2.0 * static_cast<double>(g.link_count());

  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.eigenvalues(k) > 1e-7) {
      out.orthogonality =
          std::max(out.orthogonality, std::abs(ss.v_tilde.dot(spec.eigenvectors->col(k))));
    }
  }

  auto relative = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  out.kernel_ok = std::abs(out.smallest) <= 1e-7 && out.second > 1e-7;
  out.traces_ok = relative(out.trace_sum, out.trace_sum_expected) <= 1e-8 &&
                  relative(out.trace_square, out.trace_square_expected) <= 1e-8;
  out.orthogonal_ok = out.orthogonality <= 1e-7;
  return out;
}

SteadyBounds bounds(const Graph& /*g*/, const RateConfig& rates, const SteadyState& ss) {
  const Vector ratio = rates.gamma().cwiseQuotient(rates.delta());
  const Vector one_plus = (1.0 + ratio.array()).matrix();

  SteadyBounds out;
  out.upper = (1.0 - one_plus.array().inverse()).matrix();
  out.y_upper = 1.0 - one_plus.cwiseInverse().mean();
  const double min_ratio = ratio.minCoeff();
  out.informative = ss.regime == SteadyRegime::endemic && min_ratio > 1.0;
  if (out.informative) {
    out.lower = 1.0 - 1.0 / min_ratio;
    out.y_lower = out.lower;
  }

  constexpr double kSlack = 1e-9;
  const Vector& v = ss.v_inf;
  out.nodes_within = (v.array() <= out.upper.array() + kSlack).all() && (v.array() >= -kSlack).all();
  out.y_within = ss.y_inf <= out.y_upper + kSlack;
  if (out.informative) {
    out.nodes_within = out.nodes_within && (v.array() >= out.lower - kSlack).all();
    out.y_within = out.y_within && ss.y_inf >= out.y_lower - kSlack;
  }
  return out;
}

double uniqueness_probe(const Graph& g, const RateConfig& rates, const SteadyState& ss, int starts,
                        std::uint64_t seed) {
  if (ss.regime != SteadyRegime::endemic) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  double worst = 0.0;
  for (int s = 0; s < starts; ++s) {
    Vector start(g.size());
    for (auto& x : start) x = unit(rng);
    const SteadyState other = iterate_from(g, rates, start);
    worst = std::max(worst, (other.v_inf - ss.v_inf).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace nimfa
