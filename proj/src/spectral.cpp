#include "nimfa/spectral.hpp"

namespace nimfa {

Matrix build_R(const Graph& g, const Vector& tau) {
  expect(tau.size() == g.size(), "tau length does not match graph size");
  const Vector root = tau.cwiseSqrt();
  return root.asDiagonal() * g.adjacency() * root.asDiagonal();
}

Matrix build_R(const Graph& g, const RateConfig& rates) { return build_R(g, rates.tau()); }

GeneralizedLaplacian build_generalized_laplacian(const Graph& g, const Vector& q) {
  expect(q.size() == g.size(), "loading vector length does not match graph size");
  expect(q.allFinite(), "loading vector has non-finite entries");
  GeneralizedLaplacian out;
  out.q = q;
  out.matrix = -g.adjacency();
  out.matrix.diagonal() += q;
  return out;
}

std::vector<Interval> gerschgorin_intervals(const Graph& g, const GeneralizedLaplacian& gl) {
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    out.push_back({gl.q(i) - g.degree(i), gl.q(i) + g.degree(i)});
  }
  return out;
}

bool in_gerschgorin_union(const std::vector<Interval>& intervals, double x, double slack) {
  return std::any_of(intervals.begin(), intervals.end(),
                     [&](const Interval& iv) { return iv.contains(x, slack); });
}

}  // namespace nimfa
