#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nimfa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using Edge = std::pair<int, int>;

/// Undirected, simple, connected graph stored as a dense symmetric 0/1
/// adjacency matrix. Immutable after construction.
class Graph {
 public:
  /// Builds the graph over nodes 0..n-1. Throws InputError on self-loops,
  /// duplicate edges, out-of-range ids, or a disconnected result.
  static Graph from_edges(int n, const std::vector<Edge>& edges);

  int size() const noexcept { return static_cast<int>(adjacency_.rows()); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const Vector& degrees() const noexcept { return degrees_; }
  double degree(int i) const { return degrees_(i); }
  int link_count() const noexcept { return link_count_; }
  bool adjacent(int i, int j) const { return adjacency_(i, j) != 0.0; }

  const std::vector<int>& neighbors(int i) const { return neighbors_[static_cast<std::size_t>(i)]; }

  /// Edge list with u < v, lexicographically ordered.
  std::vector<Edge> edges() const;

  /// Copy of this graph with node i (and its links) removed. The result may
  /// be disconnected, so it is returned as a bare adjacency matrix.
  Matrix adjacency_without(int i) const;

 private:
  Graph() = default;

  Matrix adjacency_;
  Vector degrees_;
  std::vector<std::vector<int>> neighbors_;
  int link_count_ = 0;
};

/// Parses "u v" lines ('#' comments, blank lines, CRLF tolerated). Node ids
/// must cover 0..max contiguously.
Graph parse_edge_list(std::string_view text);

Graph read_edge_list(const std::string& path);

std::string to_edge_list(const Graph& g);

bool is_connected(const Matrix& adjacency);

struct WalkCounts {
  double total_length3 = 0.0;   // u^T A^3 u
  double closed_length3 = 0.0;  // trace(A^3)
};

/// Walks of length three, by repeated matrix-vector products.
WalkCounts walk_counts(const Graph& g);

}  // namespace nimfa
