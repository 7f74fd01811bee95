#include "nimfa/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "nimfa/error.hpp"

namespace nimfa {

Graph Graph::from_edges(int n, const std::vector<Edge>& edges) {
  expect(n >= 1, "graph must have at least one node");
  Graph g;
  g.adjacency_ = Matrix::Zero(n, n);
  for (auto [u, v] : edges) {
    expect(u >= 0 && v >= 0 && u < n && v < n,
           "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range");
    if (u == v) throw InputError("self-loop at node " + std::to_string(u));
    if (g.adjacency_(u, v) != 0.0) {
      throw InputError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    g.adjacency_(u, v) = 1.0;
    g.adjacency_(v, u) = 1.0;
  }
  if (!is_connected(g.adjacency_)) throw InputError("disconnected graph");

  g.degrees_ = g.adjacency_.rowwise().sum();
  g.link_count_ = static_cast<int>(edges.size());
  g.neighbors_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.adjacency_(i, j) != 0.0) g.neighbors_[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return g;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(link_count_));
  for (int i = 0; i < size(); ++i) {
    for (int j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

Matrix Graph::adjacency_without(int i) const {
  const int n = size();
  expect(i >= 0 && i < n, "node index out of range");
  Matrix out(n - 1, n - 1);
  for (int r = 0, rr = 0; r < n; ++r) {
    if (r == i) continue;
    for (int c = 0, cc = 0; c < n; ++c) {
      if (c == i) continue;
      out(rr, cc++) = adjacency_(r, c);
    }
    ++rr;
  }
  return out;
}

bool is_connected(const Matrix& adjacency) {
  const auto n = adjacency.rows();
  if (n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (adjacency(u, v) != 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

namespace {

int parse_node_id(std::string_view token, int line_no) {
  int value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0) {
    throw InputError("parse error on line " + std::to_string(line_no) + ": invalid node id '" +
                     std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::set<Edge> seen;
  int max_id = -1;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto tokens = split_whitespace(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 2) {
      throw InputError("parse error on line " + std::to_string(line_no) +
                       ": expected two node ids");
    }
    const int u = parse_node_id(tokens[0], line_no);
    const int v = parse_node_id(tokens[1], line_no);
    if (u == v) throw InputError("self-loop on line " + std::to_string(line_no));
    const Edge key{std::min(u, v), std::max(u, v)};
    if (!seen.insert(key).second) {
      throw InputError("duplicate edge on line " + std::to_string(line_no));
    }
    edges.push_back(key);
    max_id = std::max({max_id, u, v});
  }
  expect(max_id >= 0, "edge list contains no edges");

  std::vector<char> present(static_cast<std::size_t>(max_id) + 1, 0);
  for (auto [u, v] : edges) {
    present[static_cast<std::size_t>(u)] = 1;
    present[static_cast<std::size_t>(v)] = 1;
  }
  for (int i = 0; i <= max_id; ++i) {
    if (!present[static_cast<std::size_t>(i)]) {
      throw InputError("node id gap: node " + std::to_string(i) + " has no edges");
    }
  }
  return Graph::from_edges(max_id + 1, edges);
}

Graph read_edge_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open edge list '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_edge_list(buffer.str());
}

std::string to_edge_list(const Graph& g) {
  std::string out;
  for (auto [u, v] : g.edges()) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

WalkCounts walk_counts(const Graph& g) {
  const Matrix& a = g.adjacency();
  const Vector ones = Vector::Ones(g.size());
  const Vector a1 = a * ones;
  const Vector a2 = a * a1;
  const Vector a3 = a * a2;

  WalkCounts out;
  out.total_length3 = a3.sum();
  // (A^3)_qq = a_q . (A^2 e_q), with A^2 e_q = A (A e_q).
  for (int q = 0; q < g.size(); ++q) {
    const Vector col2 = a * a.col(q);
    out.closed_length3 += a.col(q).dot(col2);
  }
  return out;
}

}  // namespace nimfa
