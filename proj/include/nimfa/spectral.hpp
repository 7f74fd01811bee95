#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nimfa/error.hpp"
#include "nimfa/graph.hpp"
#include "nimfa/rates.hpp"

namespace nimfa {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigenvalues of a symmetric matrix in ascending order. `eigenvectors`
/// holds orthonormal columns matching `eigenvalues` when requested.
template <typename Scalar>
struct Spectrum {
  DenseVector<Scalar> eigenvalues;
  std::optional<DenseMatrix<Scalar>> eigenvectors;
  Scalar residual{0};  // max_k |M x_k - lambda_k x_k|_inf
  int sweeps = 0;

  Scalar largest() const { return eigenvalues(eigenvalues.size() - 1); }
  Scalar smallest() const { return eigenvalues(0); }
};

template <typename Scalar>
struct DominantPair {
  Scalar value{0};
  DenseVector<Scalar> vector;  // unit norm, strictly positive
  int iterations = 0;
};

namespace detail {

template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
void check_symmetric(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  expect(m.rows() == m.cols(), "matrix must be square");
  expect(m.allFinite(), "matrix has non-finite entries");
  const Scalar scale = std::max(Scalar(1), inf_norm(m));
  const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  expect(asym <= Scalar(1e-12) * scale, "matrix is not symmetric");
}

}  // namespace detail

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps over all (p, q) pairs in row order, zeroing each off-diagonal
/// entry with one plane rotation, until the off-diagonal Frobenius mass
/// falls below machine precision relative to the whole matrix. Throws
/// InputError for asymmetric or non-finite input and NumericalError if the
/// residual bound 1e-10 * |M|_inf is not met (1000 eps for scalars coarser
/// than double).
template <typename Derived>
Spectrum<typename Derived::Scalar> full_spectrum(const Eigen::MatrixBase<Derived>& m,
                                                 bool want_vectors = false) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(m);
  const Eigen::Index n = m.rows();

  DenseMatrix<Scalar> a = (m + m.transpose()) / Scalar(2);
  DenseMatrix<Scalar> v = DenseMatrix<Scalar>::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar total = std::max(a.norm(), std::numeric_limits<Scalar>::min());

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(Scalar(2) * off) <= eps * total) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<Scalar>::min()) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        // a <- J^T a J with J = [c s; -s c] in the (p, q) plane.
        const DenseVector<Scalar> col_p = a.col(p);
        a.col(p) = c * col_p - s * a.col(q);
        a.col(q) = s * col_p + c * a.col(q);
        const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row_p = a.row(p);
        a.row(p) = c * row_p - s * a.row(q);
        a.row(q) = s * row_p + c * a.row(q);
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);

        const DenseVector<Scalar> vp = v.col(p);
        v.col(p) = c * vp - s * v.col(q);
        v.col(q) = s * vp + c * v.col(q);
      }
    }
  }
  if (sweep == kMaxSweeps) {
    throw NumericalError("no_convergence", "Jacobi eigensolver did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  Spectrum<Scalar> out;
  out.sweeps = sweep;
  out.eigenvalues.resize(n);
  DenseMatrix<Scalar> sorted(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    sorted.col(k) = v.col(src);
  }

  const DenseMatrix<Scalar> md = m;
  const DenseMatrix<Scalar> r = md * sorted - sorted * out.eigenvalues.asDiagonal();
  out.residual = n > 0 ? r.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar bound = std::max(Scalar(1e-10), Scalar(1000) * eps) * std::max(Scalar(1), detail::inf_norm(md));
  if (!(out.residual <= bound)) {
    throw NumericalError("no_convergence",
                         "Jacobi residual " + std::to_string(double(out.residual)) +
                             " exceeds tolerance");
  }
  if (want_vectors) out.eigenvectors = std::move(sorted);
  return out;
}

/// Perron root and vector of a non-negative irreducible symmetric matrix.
///
/// Power iteration on M + cI from the all-ones vector. The shift c > 0 makes
/// the Perron root strictly dominant in modulus even for bipartite
/// structure, where the spectrum of M is symmetric about zero. Stops when
/// successive Rayleigh quotients agree to `tol` and the eigen-residual is
/// below sqrt(tol); the iteration cap is 100 N.
template <typename Derived>
DominantPair<typename Derived::Scalar> lambda_max(const Eigen::MatrixBase<Derived>& m,
                                                  typename Derived::Scalar tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(m);
  const Eigen::Index n = m.rows();
  const DenseMatrix<Scalar> md = m;
  const Scalar norm = std::max(detail::inf_norm(md), std::numeric_limits<Scalar>::min());
  const Scalar shift = norm / Scalar(2) + std::max(Scalar(0), -md.diagonal().minCoeff());

  DenseVector<Scalar> x = DenseVector<Scalar>::Ones(n) / std::sqrt(Scalar(n));
  DenseVector<Scalar> mx = md * x;
  Scalar theta = x.dot(mx);
  Scalar residual = (mx - theta * x).norm();
  const long cap = 100L * static_cast<long>(n);

  for (long it = 1; it <= cap; ++it) {
    DenseVector<Scalar> y = mx + shift * x;
    x = y / y.norm();
    mx = md * x;
    const Scalar next = x.dot(mx);
    residual = (mx - next * x).norm();
    const Scalar scale = std::max(Scalar(1), std::abs(next));
    const bool settled = std::abs(next - theta) <= tol * scale;
    theta = next;
    if (settled && residual <= std::sqrt(tol) * scale) {
      DominantPair<Scalar> out{theta, x, static_cast<int>(it)};
      if (out.vector.minCoeff() <= Scalar(0)) {
        throw NumericalError("no_convergence", "Perron vector has non-positive components");
      }
      return out;
    }
  }
  throw NumericalError("no_convergence", "power iteration did not converge; last residual " +
                                             std::to_string(double(residual)));
}

/// diag(q) - A.
struct GeneralizedLaplacian {
  Vector q;
  Matrix matrix;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
};

/// R = diag(sqrt(tau)) A diag(sqrt(tau)).
Matrix build_R(const Graph& g, const RateConfig& rates);
Matrix build_R(const Graph& g, const Vector& tau);

GeneralizedLaplacian build_generalized_laplacian(const Graph& g, const Vector& q);

/// [q_i - d_i, q_i + d_i] per row.
std::vector<Interval> gerschgorin_intervals(const Graph& g, const GeneralizedLaplacian& gl);

bool in_gerschgorin_union(const std::vector<Interval>& intervals, double x, double slack = 0.0);

}  // namespace nimfa
