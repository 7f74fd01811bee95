#include "nimfa/rates.hpp"

#include <cmath>

#include <json.hpp>

#include "nimfa/error.hpp"

namespace nimfa {

namespace {

void check_positive(const Vector& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || v(i) <= 0.0) {
      throw InputError(std::string(name) + "[" + std::to_string(i) +
                       "] must be positive and finite");
    }
  }
}

}  // namespace

RateConfig::RateConfig(const Graph& g, Vector beta, Vector delta)
    : beta_(std::move(beta)), delta_(std::move(delta)) {
  expect(beta_.size() == g.size(), "beta has length " + std::to_string(beta_.size()) +
                                       ", graph has " + std::to_string(g.size()) + " nodes");
  expect(delta_.size() == g.size(), "delta has length " + std::to_string(delta_.size()) +
                                        ", graph has " + std::to_string(g.size()) + " nodes");
  check_positive(beta_, "beta");
  check_positive(delta_, "delta");
  tau_ = beta_.cwiseQuotient(delta_);
  gamma_ = g.adjacency() * beta_;
}

RateConfig RateConfig::homogeneous(const Graph& g, double beta, double delta) {
  return {g, Vector::Constant(g.size(), beta), Vector::Constant(g.size(), delta)};
}

RateConfig RateConfig::from_tau(const Graph& g, const Vector& tau) {
  return {g, tau, Vector::Ones(tau.size())};
}

RateConfig RateConfig::with_delta(const Graph& g, int i, double delta_i) const {
  Vector delta = delta_;
  delta(i) = delta_i;
  return {g, beta_, std::move(delta)};
}

RateConfig RateConfig::with_uniform_delta(const Graph& g, double delta) const {
  return {g, beta_, Vector::Constant(delta_.size(), delta)};
}

RateConfig parse_rates_json(const Graph& g, const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("rates file: ") + e.what());
  }
  expect(doc.is_object(), "rates file must hold a JSON object");

  auto read = [&](const char* key) {
    expect(doc.contains(key), std::string("rates file is missing \"") + key + "\"");
    const auto& node = doc.at(key);
    if (node.is_number()) return Vector::Constant(g.size(), node.get<double>()).eval();
    expect(node.is_array(), std::string("\"") + key + "\" must be a number or an array");
    Vector out(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
      expect(node[i].is_number(), std::string("\"") + key + "\" entries must be numbers");
      out(static_cast<Eigen::Index>(i)) = node[i].get<double>();
    }
    return out;
  };
  return {g, read("beta"), read("delta")};
}

}  // namespace nimfa
