#pragma once

// Graph fixtures and independent oracles shared by the test binaries. The
// oracles deliberately avoid the library's own code paths: explicit loops
// for walk counts, a characteristic polynomial for small spectra, and
// finite differences for derivatives.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"
#include "nimfa/spectral.hpp"
#include "nimfa/steady_state.hpp"
#include "nimfa/threshold.hpp"

namespace fixtures {

using nimfa::Edge;
using nimfa::Graph;
using nimfa::Matrix;
using nimfa::RateConfig;
using nimfa::Vector;

inline Graph complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph::from_edges(n, e);
}

// Hub 0 joined to n - 1 leaves.
inline Graph star(int n) {
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return Graph::from_edges(n, e);
}

inline Graph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, e);
}

inline Graph cycle(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, e);
}

inline Graph lattice(int rows, int cols) {
  std::vector<Edge> e;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int k = r * cols + c;
      if (c + 1 < cols) e.emplace_back(k, k + 1);
      if (r + 1 < rows) e.emplace_back(k, k + cols);
    }
  }
  return Graph::from_edges(rows * cols, e);
}

inline Graph edge() { return Graph::from_edges(2, {{0, 1}}); }

// Random spanning tree plus extra edges with probability p.
inline Graph random_connected(int n, double p, std::mt19937_64& rng) {
  std::vector<std::vector<char>> present(static_cast<std::size_t>(n),
                                         std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) {
    const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    e.emplace_back(j, i);
    present[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] && coin(rng)) e.emplace_back(i, j);
    }
  }
  return Graph::from_edges(n, e);
}

inline Vector random_vector(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Random rates scaled so that lambda_max(R) equals `target`.
inline RateConfig endemic_rates(const Graph& g, double target, std::mt19937_64& rng) {
  const Vector beta = random_vector(g.size(), 0.5, 2.0, rng);
  Vector delta = random_vector(g.size(), 0.5, 2.0, rng);
  const double lam = nimfa::lambda_max_R(g, beta.cwiseQuotient(delta));
  delta *= lam / target;
  return RateConfig(g, beta, delta);
}

inline double lambda_max_A(const Graph& g) { return nimfa::full_spectrum(Matrix(g.adjacency())).largest(); }

// u^T A^3 u by summing over every walk i-j-k-l.
inline double brute_walks3(const Graph& g) {
  const Matrix& a = g.adjacency();
  const int n = g.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) total += a(i, j) * a(j, k) * a(k, l);
  return total;
}

inline int brute_triangles(const Graph& g) {
  const int n = g.size();
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) count += g.adjacent(i, j) && g.adjacent(j, k) && g.adjacent(i, k);
  return count;
}

inline Matrix naive_product(const Matrix& x, const Matrix& y) {
  Matrix z = Matrix::Zero(x.rows(), y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j)
      for (Eigen::Index k = 0; k < x.cols(); ++k) z(i, j) += x(i, k) * y(k, j);
  return z;
}

// Coefficients c_0..c_n of det(xI - M) (c_n = 1) by Faddeev-LeVerrier.
inline std::vector<double> characteristic_polynomial(const Matrix& m) {
  const auto n = m.rows();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Matrix mk = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = naive_product(m, mk) + c[static_cast<std::size_t>(n - k + 1)] * Matrix::Identity(n, n);
    c[static_cast<std::size_t>(n - k)] = -naive_product(m, mk).trace() / static_cast<double>(k);
  }
  return c;
}

inline double polynomial_at(const std::vector<double>& c, double x) {
  double y = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) y = y * x + *it;
  return y;
}

// Largest real root of a monic polynomial whose roots are all real and lie
// within [-bound, bound]: bisection from the right on the last sign change.
inline double largest_root(const std::vector<double>& c, double bound) {
  const int samples = 20000;
  double hi = bound;
  double lo = bound;
  for (int s = 1; s <= samples; ++s) {
    lo = bound - 2.0 * bound * s / samples;
    if (polynomial_at(c, lo) * polynomial_at(c, hi) <= 0.0) break;
    hi = lo;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (polynomial_at(c, mid) * polynomial_at(c, hi) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline nimfa::SteadyState tight_solve(const Graph& g, const RateConfig& r) {
  return nimfa::solve(g, r, {1e-13, 10'000'000});
}

// Central differences of v_inf in delta_i.
inline Vector fd_first(const Graph& g, const RateConfig& r, int i) {
  const double h = 1e-5 * std::max(1.0, r.delta()(i));
  const double d = r.delta()(i);
  return (tight_solve(g, r.with_delta(g, i, d + h)).v_inf - tight_solve(g, r.with_delta(g, i, d - h)).v_inf) /
         (2.0 * h);
}

inline Vector fd_second(const Graph& g, const RateConfig& r, int i) {
  const double h = 1e-3 * std::max(1.0, r.delta()(i));
  const double d = r.delta()(i);
  return (tight_solve(g, r.with_delta(g, i, d + h)).v_inf - 2.0 * tight_solve(g, r).v_inf +
          tight_solve(g, r.with_delta(g, i, d - h)).v_inf) /
         (h * h);
}

inline Vector fd_first_tied(const Graph& g, const RateConfig& r) {
  const double h = 1e-5;
  const RateConfig up(g, r.beta(), (r.delta().array() + h).matrix());
  const RateConfig down(g, r.beta(), (r.delta().array() - h).matrix());
  return (tight_solve(g, up).v_inf - tight_solve(g, down).v_inf) / (2.0 * h);
}

inline Vector fd_second_tied(const Graph& g, const RateConfig& r) {
  const double h = 1e-3;
  const RateConfig up(g, r.beta(), (r.delta().array() + h).matrix());
  const RateConfig down(g, r.beta(), (r.delta().array() - h).matrix());
  return (tight_solve(g, up).v_inf - 2.0 * tight_solve(g, r).v_inf + tight_solve(g, down).v_inf) / (h * h);
}

// max_k |x_k - y_k| / max(|y_k|, floor)
inline double relative_gap(const Vector& x, const Vector& y, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    worst = std::max(worst, std::abs(x(k) - y(k)) / std::max(std::abs(y(k)), floor));
  }
  return worst;
}

}  // namespace fixtures
