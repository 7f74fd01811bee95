#include "nimfa/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "nimfa/error.hpp"

namespace nimfa {

namespace {

constexpr double kRangeSlack = 1e-9;

bool in_range(const Vector& v) {
  return (v.array() >= -kRangeSlack).all() && (v.array() <= 1.0 + kRangeSlack).all();
}

Vector rhs_unchecked(const Matrix& a, const Vector& beta, const Vector& delta, const Vector& v) {
  const Vector pressure = a * beta.cwiseProduct(v);
  return pressure - v.cwiseProduct(pressure + delta);
}

}  // namespace

Vector nimfa_rhs(const Graph& g, const RateConfig& rates, const Vector& v) {
  expect(v.size() == g.size(), "state length does not match graph size");
  if (!in_range(v)) throw InputError("state out of range");
  return rhs_unchecked(g.adjacency(), rates.beta(), rates.delta(), v);
}

double stable_step(const RateConfig& rates) {
  return 0.1 / (rates.gamma() + rates.delta()).maxCoeff();
}

Trajectory integrate(const Graph& g, const RateConfig& rates, const Vector& v0, double t_end,
                     const IntegrateOptions& opts) {
  expect(v0.size() == g.size(), "initial state length does not match graph size");
  expect(in_range(v0), "initial state out of range");
  expect(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  expect(opts.dt_hint > 0.0, "dt_hint must be positive");

  const double bound = std::min(opts.dt_hint, stable_step(rates));
  const long steps = static_cast<long>(std::ceil(t_end / bound - 1e-12));
  const double h = t_end / static_cast<double>(steps);
  const long stride =
      opts.full_resolution ? 1 : std::max(1L, (steps + opts.max_stored - 2) / (opts.max_stored - 1));

  const Matrix& a = g.adjacency();
  const Vector& beta = rates.beta();
  const Vector& delta = rates.delta();
  auto f = [&](const Vector& v) { return rhs_unchecked(a, beta, delta, v); };

  Trajectory traj;
  traj.step = h;
  traj.steps = steps;
  Vector v = v0.cwiseMax(0.0).cwiseMin(1.0);
  traj.times.push_back(0.0);
  traj.states.push_back(v);

  for (long k = 1; k <= steps; ++k) {
    const Vector k1 = f(v);
    const Vector k2 = f(v + 0.5 * h * k1);
    const Vector k3 = f(v + 0.5 * h * k2);
    const Vector k4 = f(v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!v.allFinite() || !in_range(v)) {
      throw NumericalError("unstable_step", "RK4 step left [0, 1] at t = " +
                                                std::to_string(static_cast<double>(k) * h) +
                                                "; use a smaller dt_hint");
    }
    v = v.cwiseMax(0.0).cwiseMin(1.0);
    if (k % stride == 0 || k == steps) {
      traj.times.push_back(k == steps ? t_end : static_cast<double>(k) * h);
      traj.states.push_back(v);
    }
  }
  traj.terminal_residual = f(v).cwiseAbs().maxCoeff();
  return traj;
}

}  // namespace nimfa
