#pragma once

#include <vector>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"

namespace nimfa {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double terminal_residual = 0.0;  // |dV/dt|_inf at the final time
  double step = 0.0;               // RK4 step actually used
  long steps = 0;
};

/// dv_i/dt = sum_j beta_j a_ij v_j - v_i (sum_j beta_j a_ij v_j + delta_i).
/// Throws InputError("state out of range") if a component leaves
/// [-1e-9, 1 + 1e-9].
Vector nimfa_rhs(const Graph& g, const RateConfig& rates, const Vector& v);

struct IntegrateOptions {
  double dt_hint = 0.01;
  bool full_resolution = false;
  int max_stored = 2000;
};

/// Default RK4 step bound 0.1 / max_i(gamma_i + delta_i).
double stable_step(const RateConfig& rates);

/// Classic fixed-step RK4 on [0, t_end] with step min(dt_hint, stable_step),
/// shortened so that an integer number of steps lands exactly on t_end.
/// States are clamped to [0, 1] after each step when the overshoot is below
/// 1e-9; larger overshoot throws NumericalError("unstable_step").
Trajectory integrate(const Graph& g, const RateConfig& rates, const Vector& v0, double t_end,
                     const IntegrateOptions& opts = {});

}  // namespace nimfa
