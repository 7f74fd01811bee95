#include "nimfa/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "nimfa/error.hpp"
#include "nimfa/spectral.hpp"
#include "nimfa/threshold.hpp"

namespace nimfa {

std::string to_string(Curvature c) {
  switch (c) {
    case Curvature::convex: return "convex";
    case Curvature::concave: return "concave";
    case Curvature::indefinite: return "indefinite";
  }
  return "unknown";
}

namespace {

void require_endemic(const SteadyState& ss) {
  if (ss.regime != SteadyRegime::endemic) {
    throw InputError("sensitivity requires an endemic steady state (sub-threshold regime excluded)");
  }
}

Vector sensitivity_loading(const RateConfig& rates, const SteadyState& ss) {
  const Vector one_minus_v = (1.0 - ss.v_inf.array()).matrix();
  return rates.tau().cwiseProduct(one_minus_v.cwiseAbs2()).cwiseInverse();
}

}  // namespace

Matrix build_S(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  require_endemic(ss);
  const Vector one_minus_v = (1.0 - ss.v_inf.array()).matrix();
  Matrix s = -g.adjacency() * rates.beta().asDiagonal();
  s.diagonal() += rates.delta().cwiseQuotient(one_minus_v.cwiseAbs2());

  const Matrix via_laplacian =
      build_generalized_laplacian(g, sensitivity_loading(rates, ss)).matrix * rates.beta().asDiagonal();
  const double gap = (s - via_laplacian).cwiseAbs().maxCoeff();
  if (gap > 1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
    throw NumericalError("inconsistent", "S disagrees with its generalized-Laplacian form by " +
                                             std::to_string(gap));
  }
  return s;
}

Matrix symmetrized_S(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  require_endemic(ss);
  const Vector root_beta = rates.beta().cwiseSqrt();
  return root_beta.asDiagonal() *
         build_generalized_laplacian(g, sensitivity_loading(rates, ss)).matrix *
         root_beta.asDiagonal();
}

SensitivitySystem::SensitivitySystem(const Graph& g, const RateConfig& rates, const SteadyState& ss)
    : v_(ss.v_inf), delta_(rates.delta()), s_(build_S(g, rates, ss)) {
  one_minus_v_ = (1.0 - v_.array()).matrix();
  lu_.compute(s_);
  rcond_ = lu_.rcond();
  if (!(rcond_ >= 1e-12)) {
    throw NumericalError("near_critical", "S is numerically singular (rcond " +
                                              std::to_string(rcond_) +
                                              "); near critical threshold");
  }
  s_inverse_ = lu_.inverse();
}

Vector SensitivitySystem::first_derivative_column(int i) const {
  Vector rhs = Vector::Zero(v_.size());
  rhs(i) = -v_(i) / one_minus_v_(i);
  return lu_.solve(rhs);
}

Matrix SensitivitySystem::first_derivatives() const {
  const Vector scale = -v_.cwiseQuotient(one_minus_v_);
  return lu_.solve(Matrix(scale.asDiagonal()));
}

Vector SensitivitySystem::first_derivatives_tied() const {
  return lu_.solve(-v_.cwiseQuotient(one_minus_v_));
}

// W_k = 2 delta_k d1_k^2 / (1 - v_k)^3 plus the first-order term; the
// second derivatives solve S d2 = -W.
Vector SensitivitySystem::second_rhs(const Vector& d1, const Vector& first_order_term) const {
  const Vector cube = one_minus_v_.array().cube().matrix();
  Vector w = (2.0 * delta_.array() * d1.array().square() / cube.array()).matrix();
  return w + first_order_term;
}

Vector SensitivitySystem::second_derivative_column(int i) const {
  const Vector d1 = first_derivative_column(i);
  Vector term = Vector::Zero(v_.size());
  term(i) = 2.0 / (one_minus_v_(i) * one_minus_v_(i)) * d1(i);
  return lu_.solve(-second_rhs(d1, term));
}

Matrix SensitivitySystem::second_derivatives() const {
  const Matrix d1 = first_derivatives();
  const auto n = v_.size();
  Matrix rhs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector term = Vector::Zero(n);
    term(i) = 2.0 / (one_minus_v_(i) * one_minus_v_(i)) * d1(i, i);
    rhs.col(i) = -second_rhs(d1.col(i), term);
  }
  return lu_.solve(rhs);
}

Vector SensitivitySystem::second_derivatives_tied() const {
  const Vector d1 = first_derivatives_tied();
  const Vector term = (2.0 * d1.array() / one_minus_v_.array().square()).matrix();
  return lu_.solve(-second_rhs(d1, term));
}

Matrix SensitivitySystem::m_matrix() const {
  const Matrix& si = s_inverse_;
  const auto n = v_.size();
  const Vector weight = delta_.cwiseQuotient(one_minus_v_.array().cube().matrix());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector col_sq = si.col(i).cwiseAbs2().cwiseProduct(weight);
    const Vector coupled = si * col_sq;
    for (Eigen::Index k = 0; k < n; ++k) {
      m(k, i) = si(k, i) * si(i, i) / one_minus_v_(i) - v_(i) * coupled(k);
    }
  }
  return m;
}

Matrix first_derivatives(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                         DeltaMode mode) {
  const SensitivitySystem sys(g, rates, ss);
  return mode == DeltaMode::independent ? sys.first_derivatives() : Matrix(sys.first_derivatives_tied());
}

Matrix second_derivatives(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                          DeltaMode mode) {
  const SensitivitySystem sys(g, rates, ss);
  return mode == DeltaMode::independent ? sys.second_derivatives()
                                        : Matrix(sys.second_derivatives_tied());
}

MDiagnostics m_matrix(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  const SensitivitySystem sys(g, rates, ss);
  MDiagnostics out;
  out.m = sys.m_matrix();
  const Matrix d2 = sys.second_derivatives();
  const Vector& v = sys.v();
  const auto n = v.size();
  out.scaled_d2.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = (1.0 - v(i)) * (1.0 - v(i)) / (2.0 * v(i));
    out.scaled_d2.col(i) = scale * d2.col(i);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mk = out.m(k, i);
      if (mk > 0.0) ++out.positive_entries;
      if (mk < 0.0) ++out.negative_entries;
      if (std::abs(mk) > 1e-10) {
        out.max_relative_gap =
            std::max(out.max_relative_gap, std::abs(out.scaled_d2(k, i) - mk) / std::abs(mk));
      }
    }
  }
  out.consistent = out.max_relative_gap <= 1e-7;
  return out;
}

SchurDerivative schur_derivative(const Graph& g, const RateConfig& rates, const SteadyState& ss,
                                 int i) {
  require_endemic(ss);
  const int n = g.size();
  if (n < 2) throw InputError("no neighbors");
  expect(i >= 0 && i < n, "node index out of range");

  const Vector& v = ss.v_inf;
  const Vector q = sensitivity_loading(rates, ss);
  Matrix reduced = -g.adjacency_without(i);
  Vector a_i(n - 1);
  for (int j = 0, r = 0; j < n; ++j) {
    if (j == i) continue;
    reduced(r, r) += q(j);
    a_i(r++) = g.adjacency()(j, i);
  }
  const Eigen::LLT<Matrix> chol(reduced);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("inconsistent", "node-deleted generalized Laplacian is not positive definite");
  }

  SchurDerivative out;
  out.f = a_i.dot(chol.solve(a_i));
  out.tau_f = rates.tau()(i) * out.f;
  const double vi = v(i);
  const double damp = (1.0 - vi) * (1.0 - vi);
  out.derivative = -(1.0 - vi) * vi / (rates.delta()(i) - rates.beta()(i) * damp * out.f);

  const SensitivitySystem sys(g, rates, ss);
  out.linear_solve = -vi / (1.0 - vi) * sys.s_inverse()(i, i);

  if (!(out.f > 0.0)) throw NumericalError("inconsistent", "Schur quadratic form is not positive");
  if (rates.tau()(i) * damp * out.f > 1.0 + 1e-12) {
    throw NumericalError("inconsistent", "tau_i (1 - v_i)^2 f exceeds one");
  }
  if (std::abs(out.derivative - out.linear_solve) > 1e-8 * std::abs(out.linear_solve)) {
    throw NumericalError("inconsistent", "Schur-form derivative disagrees with linear solve");
  }
  return out;
}

namespace {

double self_derivative(const Graph& g, const RateConfig& rates, int i) {
  const SteadyState ss = solve(g, rates, {1e-12, 1'000'000});
  if (ss.regime != SteadyRegime::endemic) {
    throw NumericalError("extinct", "configuration left the endemic regime");
  }
  const SensitivitySystem sys(g, rates, ss);
  return sys.first_derivative_column(i)(i);
}

// Largest delta_i that keeps lambda_max(R) above 1 + margin, capped at `cap`.
double endemic_ceiling(const Graph& g, const RateConfig& rates, int i, double cap, double margin) {
  auto above = [&](double di) {
    return lambda_max_R(g, rates.with_delta(g, i, di).tau()) > 1.0 + margin;
  };
  if (above(cap)) return cap;
  double lo = rates.delta()(i);
  double hi = cap;
  while (!above(lo)) lo /= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

OptimalDelta optimal_delta(const Graph& g, const RateConfig& rates, int i, double price) {
  expect(i >= 0 && i < g.size(), "node index out of range");
  expect(std::isfinite(price) && price > 0.0, "protection price must be positive");

  const double base = rates.delta()(i);
  const double lo = 1e-3 * base;
  const double hi = endemic_ceiling(g, rates, i, 1e3 * base, 1e-4);
  expect(hi > lo, "endemic range for delta_i is empty");

  auto objective_slope = [&](double di) {
    return price + self_derivative(g, rates.with_delta(g, i, di), i);
  };

  constexpr int kGrid = 64;
  double left = lo;
  double left_slope = objective_slope(lo);
  double bracket_lo = std::numeric_limits<double>::quiet_NaN();
  double bracket_hi = bracket_lo;
  for (int k = 1; k < kGrid; ++k) {
    const double right = lo * std::pow(hi / lo, static_cast<double>(k) / (kGrid - 1));
    const double right_slope = objective_slope(right);
    if (left_slope < 0.0 && right_slope >= 0.0) {
      bracket_lo = left;
      bracket_hi = right;
      break;
    }
    left = right;
    left_slope = right_slope;
  }
  if (std::isnan(bracket_lo)) {
    throw NumericalError("no_interior_optimum",
                         "no interior optimum: c_i + dv_i/d delta_i has no sign change");
  }
  while (bracket_hi - bracket_lo > 1e-8 * std::max(1.0, bracket_hi)) {
    const double mid = 0.5 * (bracket_lo + bracket_hi);
    (objective_slope(mid) < 0.0 ? bracket_lo : bracket_hi) = mid;
  }

  OptimalDelta out;
  out.delta_star = 0.5 * (bracket_lo + bracket_hi);
  const RateConfig at_star = rates.with_delta(g, i, out.delta_star);
  const SteadyState ss = solve(g, at_star, {1e-12, 1'000'000});
  const SchurDerivative schur = schur_derivative(g, at_star, ss, i);
  out.v_i = ss.v_inf(i);
  out.derivative = schur.linear_solve;
  out.lower_bound = (1.0 - out.v_i) * out.v_i / price;
  out.explicit_delta =
      out.lower_bound + at_star.beta()(i) * (1.0 - out.v_i) * (1.0 - out.v_i) * schur.f;
  if (!(out.delta_star > out.lower_bound)) {
    throw NumericalError("inconsistent", "optimal delta does not exceed (1 - v_i) v_i / c_i");
  }
  return out;
}

bool AppendixLedger::all_passed() const {
  return std::all_of(items.begin(), items.end(),
                     [](const LedgerItem& it) { return !it.applicable || it.passed; });
}

const LedgerItem& AppendixLedger::item(const std::string& id) const {
  auto it = std::find_if(items.begin(), items.end(), [&](const LedgerItem& x) { return x.id == id; });
  if (it == items.end()) throw InputError("no ledger item '" + id + "'");
  return *it;
}

namespace {

constexpr double kLedgerTol = 1e-9;

class ItemBuilder {
 public:
  ItemBuilder(std::string id, std::string description) {
    item_.id = std::move(id);
    item_.description = std::move(description);
    item_.worst_margin = std::numeric_limits<double>::infinity();
  }

  // lhs <= rhs (strict when `strict`), with relative slack for the non-strict form.
  void less(double lhs, double rhs, bool strict = false) {
    const double margin = rhs - lhs;
    const double slack = kLedgerTol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    record(strict ? margin > 0.0 : margin >= -slack, margin, lhs, rhs, margin < item_.worst_margin);
  }

  void equal(double lhs, double rhs) {
    const double gap = std::abs(lhs - rhs);
    const double slack = kLedgerTol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    const bool worse = !seen_ || gap > -item_.worst_margin;
    record(gap <= slack, -gap, lhs, rhs, worse);
  }

  LedgerItem finish(bool applicable = true) {
    item_.applicable = applicable;
    if (item_.checked == 0) item_.worst_margin = 0.0;
    return item_;
  }

 private:
  void record(bool ok, double margin, double lhs, double rhs, bool worse) {
    ++item_.checked;
    if (!ok) {
      ++item_.failures;
      item_.passed = false;
    }
    if (worse || !seen_) {
      item_.worst_margin = margin;
      item_.lhs = lhs;
      item_.rhs = rhs;
    }
    seen_ = true;
  }

  LedgerItem item_;
  bool seen_ = false;
};

}  // namespace

AppendixLedger appendix_ledger(const Graph& g, const RateConfig& rates, const SteadyState& ss) {
  const SensitivitySystem sys(g, rates, ss);
  const Matrix& si = sys.s_inverse();
  const Matrix& a = g.adjacency();
  const Vector& v = ss.v_inf;
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();
  const Vector& tau = rates.tau();
  const Vector& d = g.degrees();
  const int n = g.size();
  auto om2 = [&](int k) { return (1.0 - v(k)) * (1.0 - v(k)); };

  ItemBuilder nonneg("nonnegative", "(S^-1)_ij >= 0");
  ItemBuilder ia("a", "1 = delta_i (S^-1)_ii/(1-v_i)^2 - beta_i sum_{k!=i} (S^-1)_ik a_ki");
  ItemBuilder ib("b", "1 <= delta_i (S^-1)_ii/(1-v_i)^2");
  ItemBuilder ic("c", "v_i = sum_j delta_j v_j^2 (S^-1)_ij/(1-v_j)^2");
  ItemBuilder id("d", "delta_i v_i (S^-1)_ii/(1-v_i)^2 < 1");
  ItemBuilder ie("e", "(S^-1)_ij >= a_ij max((1-v_j)^2 tau_j (S^-1)_ii, beta_j/delta_i (1-v_i)^2 (S^-1)_jj)");
  ItemBuilder iff("f", "(S^-1)_ij <= min(((S^-1)_ii+(S^-1)_jj)/2, sqrt((S^-1)_ii (S^-1)_jj))");
  ItemBuilder ig("g", "(1-v_i)^2/delta_i <= (S^-1)_ii < (1-v_i)^2/(v_i delta_i)");
  ItemBuilder ih("h", "Hoelder bound on (S^-1)_ij for p in {1, 2}");

  for (int i = 0; i < n; ++i) {
    const double diag_scaled = delta(i) * si(i, i) / om2(i);
    double coupling = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k != i) coupling += si(i, k) * a(k, i);
    }
    ia.equal(1.0, diag_scaled - beta(i) * coupling);
    ib.less(1.0, diag_scaled);
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += delta(j) * v(j) * v(j) * si(i, j) / om2(j);
    ic.equal(v(i), row);
    id.less(v(i) * diag_scaled, 1.0, /*strict=*/true);
    ig.less(om2(i) / delta(i), si(i, i));
    ig.less(si(i, i), om2(i) / (v(i) * delta(i)), /*strict=*/true);

    for (int j = 0; j < n; ++j) {
      nonneg.less(-si(i, j), 1e-10);
      if (j != i) {
        const double lower = a(i, j) * std::max(om2(j) * tau(j) * si(i, i),
                                                beta(j) / delta(i) * om2(i) * si(j, j));
        ie.less(lower, si(i, j));
        iff.less(si(i, j), std::min(0.5 * (si(i, i) + si(j, j)), std::sqrt(si(i, i) * si(j, j))));
      }
      for (int p : {1, 2}) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k != j) sum += a(k, j) * std::pow(si(i, k), p);
        }
        const double bound = om2(j) / delta(j) *
                             ((i == j ? 1.0 : 0.0) +
                              beta(j) * std::pow(d(j), 1.0 - 1.0 / p) * std::pow(sum, 1.0 / p));
        ih.less(si(i, j), bound);
      }
    }
  }

  const bool equal_beta = (beta.array() == beta(0)).all();
  AppendixLedger out;
  out.items = {ia.finish(), ib.finish(), ic.finish(), id.finish(), ie.finish(),
               iff.finish(equal_beta), ig.finish(), ih.finish(), nonneg.finish()};
  return out;
}

ConvexityReport convexity_sweep(const Graph& g, const RateConfig& rates, const SweepOptions& opts) {
  const int n = g.size();
  ConvexityReport out;
  out.min_d2 = Matrix::Constant(n, n, std::numeric_limits<double>::infinity());
  out.max_d2 = Matrix::Constant(n, n, -std::numeric_limits<double>::infinity());

  for (int i = 0; i < n; ++i) {
    const double base = rates.delta()(i);
    for (int p = 0; p < opts.points; ++p) {
      const double frac = opts.points == 1 ? 0.0 : static_cast<double>(p) / (opts.points - 1);
      const double di = base * opts.low_factor * std::pow(opts.high_factor / opts.low_factor, frac);
      const RateConfig swept = rates.with_delta(g, i, di);
      if (lambda_max_R(g, swept.tau()) < 1.0 + opts.endemic_margin) continue;
      const SteadyState ss = solve(g, swept);
      const SensitivitySystem sys(g, swept, ss);
      const Vector col = sys.second_derivative_column(i);
      out.min_d2.col(i) = out.min_d2.col(i).cwiseMin(col);
      out.max_d2.col(i) = out.max_d2.col(i).cwiseMax(col);
      ++out.evaluated_points;
    }
  }

  out.verdicts.assign(static_cast<std::size_t>(n), std::vector<Curvature>(static_cast<std::size_t>(n)));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const bool has_concave = out.min_d2(k, i) < -opts.curvature_band;
      const bool has_convex = out.max_d2(k, i) > opts.curvature_band;
      auto& verdict = out.verdicts[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      verdict = has_concave ? (has_convex ? Curvature::indefinite : Curvature::concave)
                            : Curvature::convex;
    }
  }
  return out;
}

TiedSweep tied_convexity_sweep(const Graph& g, const RateConfig& rates, const SweepOptions& opts) {
  TiedSweep out;
  out.min_d2 = std::numeric_limits<double>::infinity();
  const double base = rates.delta().mean();
  for (int p = 0; p < opts.points; ++p) {
    const double frac = opts.points == 1 ? 0.0 : static_cast<double>(p) / (opts.points - 1);
    const double common = base * opts.low_factor * std::pow(opts.high_factor / opts.low_factor, frac);
    const RateConfig swept = rates.with_uniform_delta(g, common);
    if (lambda_max_R(g, swept.tau()) < 1.0 + opts.endemic_margin) continue;
    const SteadyState ss = solve(g, swept);
    const SensitivitySystem sys(g, swept, ss);
    out.min_d2 = std::min(out.min_d2, sys.second_derivatives_tied().minCoeff());
    out.deltas.push_back(common);
    ++out.evaluated_points;
  }
  return out;
}

}  // namespace nimfa
