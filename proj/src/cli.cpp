#include "nimfa/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "nimfa/dynamics.hpp"
#include "nimfa/error.hpp"
#include "nimfa/graph.hpp"
#include "nimfa/markov_oracle.hpp"
#include "nimfa/rates.hpp"
#include "nimfa/sensitivity.hpp"
#include "nimfa/spectral.hpp"
#include "nimfa/steady_state.hpp"
#include "nimfa/threshold.hpp"

namespace nimfa::cli {

using json = nlohmann::ordered_json;

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_value(const json& v, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        write_value(item, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(), [](const json& x) { return x.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        write_value(item, out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

json to_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

// Row-major nested arrays.
json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) throw InputError("empty entry in list '" + text + "'");
    token = token.substr(first, last - first + 1);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InputError("not a number: '" + token + "'");
    values.push_back(x);
  }
  if (values.empty()) throw InputError("empty list");
  return values;
}

Vector broadcast(const std::string& text, int n, const std::string& what) {
  const auto values = parse_list(text);
  if (values.size() == 1) return Vector::Constant(n, values[0]);
  if (static_cast<int>(values.size()) != n) {
    throw InputError(what + " needs 1 or " + std::to_string(n) + " values, got " +
                     std::to_string(values.size()));
  }
  return Eigen::Map<const Vector>(values.data(), n);
}

struct ModelOptions {
  std::string graph;
  std::string beta;
  std::string delta;
  std::string tau;
  std::string rates;

  void attach(CLI::App* app) {
    app->add_option("--graph", graph, "edge-list file")->required();
    app->add_option("--beta", beta, "infection rate(s): scalar or comma list");
    app->add_option("--delta", delta, "curing rate(s): scalar or comma list");
    app->add_option("--tau", tau, "effective rate(s); sets beta = tau, delta = 1");
    app->add_option("--rates", rates, "JSON file with beta and delta");
  }

  Graph load_graph() const { return parse_edge_list(read_text(graph)); }

  RateConfig load_rates(const Graph& g, bool allow_tau) const {
    const int sources = !rates.empty() + !tau.empty() + (!beta.empty() || !delta.empty());
    if (sources != 1) throw InputError("give exactly one of --rates, --tau, or --beta with --delta");
    if (!rates.empty()) return parse_rates_json(g, read_text(rates));
    if (!tau.empty()) {
      if (!allow_tau) {
        throw InputError("this command needs true beta and delta; bare --tau is not accepted");
      }
      return RateConfig::from_tau(g, broadcast(tau, g.size(), "--tau"));
    }
    if (beta.empty() || delta.empty()) throw InputError("--beta and --delta go together");
    return RateConfig(g, broadcast(beta, g.size(), "--beta"), broadcast(delta, g.size(), "--delta"));
  }
};

json bounds_json(const SteadyBounds& b) {
  json j;
  j["informative"] = b.informative;
  j["lower"] = b.informative ? json(b.lower) : json(nullptr);
  j["upper"] = to_json(b.upper);
  j["y_lower"] = b.informative ? json(b.y_lower) : json(nullptr);
  j["y_upper"] = b.y_upper;
  j["nodes_within"] = b.nodes_within;
  j["y_within"] = b.y_within;
  return j;
}

void cmd_steady(const ModelOptions& m, double tol, long max_iter, std::ostream& out) {
  const Graph g = m.load_graph();
  const RateConfig rates = m.load_rates(g, true);
  const SteadyState ss = solve(g, rates, {tol, max_iter});

  json doc;
  doc["regime"] = to_string(ss.regime);
  doc["v_inf"] = to_json(ss.v_inf);
  doc["y_inf"] = ss.y_inf;
  doc["iterations"] = ss.iterations;
  doc["residual"] = ss.residual;
  doc["bounds"] = bounds_json(bounds(g, rates, ss));
  doc["lambda_max_R"] = ss.lambda_max_R;
  if (ss.regime == SteadyRegime::endemic) {
    const IdentityReport report = verify_identities(g, rates, ss);
    json checks = json::array();
    for (const auto& c : report.checks) {
      checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance},
                        {"passed", c.passed}});
    }
    doc["identities"] = {{"witness", report.witness}, {"checks", checks},
                         {"all_passed", report.all_passed()}};
    const LoadingSpectrum ls = loading_spectrum(g, rates, ss);
    doc["loading_spectrum"] = {{"q", to_json(ls.q)},
                               {"eigenvalues", to_json(ls.eigenvalues)},
                               {"trace_sum", ls.trace_sum},
                               {"trace_sum_expected", ls.trace_sum_expected},
                               {"trace_square", ls.trace_square},
                               {"trace_square_expected", ls.trace_square_expected},
                               {"orthogonality", ls.orthogonality},
                               {"passed", ls.passed()}};
  }
  out << write_json(doc) << '\n';
}

void cmd_dynamics(const ModelOptions& m, double t_end, double dt, const std::string& v0_text,
                  bool full, std::ostream& out) {
  const Graph g = m.load_graph();
  const RateConfig rates = m.load_rates(g, false);
  IntegrateOptions opts;
  opts.dt_hint = dt;
  opts.full_resolution = full;
  const Trajectory traj = integrate(g, rates, broadcast(v0_text, g.size(), "--v0"), t_end, opts);

  std::string text = "t";
  for (int i = 0; i < g.size(); ++i) text += ",v" + std::to_string(i);
  text += '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    text += format_double(traj.times[k]);
    for (double x : traj.states[k]) text += "," + format_double(x);
    text += '\n';
  }
  out << text;
}

void cmd_threshold(const ModelOptions& m, const std::string& direction, std::ostream& out) {
  const Graph g = m.load_graph();
  const RateConfig rates = m.load_rates(g, true);
  const ThresholdReport report = classify(g, rates);

  json doc;
  doc["lambda_max_R"] = report.lambda_max_R;
  doc["regime"] = to_string(report.regime);
  doc["tau_min"] = report.tau_min;
  doc["tau_max"] = report.tau_max;
  if (!direction.empty()) {
    doc["s_star"] = critical_scaling(g, broadcast(direction, g.size(), "--direction"));
  }
  json ledger = json::array();
  for (const auto& e : report.bound_ledger) {
    ledger.push_back({{"name", e.name}, {"lhs", e.lhs}, {"relation", e.relation}, {"rhs", e.rhs},
                      {"tolerance", e.tolerance}, {"applicable", e.applicable},
                      {"satisfied", e.satisfied}});
  }
  doc["bound_ledger"] = ledger;
  doc["all_bounds_satisfied"] = report.all_bounds_satisfied();
  out << write_json(doc) << '\n';
}

struct SensitivityArgs {
  int node = -1;
  double price = 0.0;
  int sweep_points = 20;
};

void cmd_sensitivity(const ModelOptions& m, const SensitivityArgs& a, std::ostream& out) {
  const Graph g = m.load_graph();
  const RateConfig rates = m.load_rates(g, true);
  expect(a.node < g.size(), "--node out of range");
  expect(a.price == 0.0 || a.node >= 0, "--price needs --node");
  const SteadyState ss = solve(g, rates);
  const SensitivitySystem sys(g, rates, ss);

  json doc;
  doc["regime"] = to_string(ss.regime);
  doc["v_inf"] = to_json(ss.v_inf);
  doc["rcond"] = sys.rcond();
  doc["s_min_eigenvalue"] = full_spectrum(symmetrized_S(g, rates, ss)).smallest();
  doc["d1"] = to_json(sys.first_derivatives());
  doc["d2"] = to_json(sys.second_derivatives());
  doc["d1_tied"] = to_json(sys.first_derivatives_tied());
  doc["d2_tied"] = to_json(sys.second_derivatives_tied());

  const MDiagnostics md = m_matrix(g, rates, ss);
  doc["m_matrix"] = {{"m", to_json(md.m)},
                     {"max_relative_gap", md.max_relative_gap},
                     {"consistent", md.consistent},
                     {"positive_entries", md.positive_entries},
                     {"negative_entries", md.negative_entries}};

  json schur = json::array();
  for (int i = 0; i < g.size(); ++i) {
    if (a.node >= 0 && i != a.node) continue;
    const SchurDerivative s = schur_derivative(g, rates, ss, i);
    schur.push_back({{"node", i}, {"f", s.f}, {"tau_f", s.tau_f}, {"derivative", s.derivative},
                     {"linear_solve", s.linear_solve}});
  }
  doc["schur"] = schur;

  if (a.price != 0.0) {
    const OptimalDelta o = optimal_delta(g, rates, a.node, a.price);
    doc["optimal_delta"] = {{"node", a.node},
                            {"price", a.price},
                            {"delta_star", o.delta_star},
                            {"v_i", o.v_i},
                            {"derivative", o.derivative},
                            {"lower_bound", o.lower_bound},
                            {"explicit_delta", o.explicit_delta}};
  }

  if (a.sweep_points > 0) {
    SweepOptions opts;
    opts.points = a.sweep_points;
    const ConvexityReport c = convexity_sweep(g, rates, opts);
    json verdicts = json::array();
    for (const auto& row : c.verdicts) {
      json r = json::array();
      for (Curvature v : row) r.push_back(to_string(v));
      verdicts.push_back(r);
    }
    doc["convexity"] = {{"points", opts.points},
                        {"evaluated_points", c.evaluated_points},
                        {"low_factor", opts.low_factor},
                        {"high_factor", opts.high_factor},
                        {"verdicts", verdicts},
                        {"min_d2", to_json(c.min_d2)},
                        {"max_d2", to_json(c.max_d2)}};
    const TiedSweep t = tied_convexity_sweep(g, rates, opts);
    doc["tied_sweep"] = {{"evaluated_points", t.evaluated_points}, {"min_d2", t.min_d2}};
  }

  const AppendixLedger ledger = appendix_ledger(g, rates, ss);
  json items = json::array();
  for (const auto& it : ledger.items) {
    items.push_back({{"id", it.id},
                     {"description", it.description},
                     {"applicable", it.applicable},
                     {"passed", it.passed},
                     {"checked", it.checked},
                     {"failures", it.failures},
                     {"worst_margin", it.worst_margin},
                     {"lhs", it.lhs},
                     {"rhs", it.rhs}});
  }
  doc["appendix_ledger"] = {{"all_passed", ledger.all_passed()}, {"items", items}};
  out << write_json(doc) << '\n';
}

void cmd_kn(int n, const std::string& tau_list, const std::string& h2, std::ostream& out) {
  auto values = parse_list(tau_list);
  if (n == 0) n = static_cast<int>(values.size());
  expect(n >= 2, "--n must be at least 2");
  const Vector tau = broadcast(tau_list, n, "--tau-list");
  expect((tau.array() > 0.0).all() && tau.allFinite(), "tau must be positive and finite");

  json doc;
  doc["n"] = n;
  doc["tau"] = to_json(tau);
  const double lam = kn_lambda_max(tau);
  doc["lambda_max"] = lam;
  doc["regime"] = to_string(regime_of(lam));
  doc["convergent_lower_bound"] = (n - 1) / tau.cwiseInverse().sum();
  const KnCriticalCheck check = kn_critical_check(tau);
  doc["critical_sum"] = check.sum;
  doc["critical_target"] = n - 1;
  doc["on_surface"] = check.on_surface;
  if (!h2.empty()) {
    const double h = parse_list(h2).at(0);
    doc["perturbation"] = {{"h2", h}, {"h1", kn_perturbation(h, n)}};
  }
  out << write_json(doc) << '\n';
}

struct OracleArgs {
  long replicas = 1000;
  double horizon = 40.0;
  double burn_in = 10.0;
  std::uint64_t seed = 1;
  bool exact = false;
};

void cmd_oracle(const ModelOptions& m, const OracleArgs& a, std::ostream& out) {
  const Graph g = m.load_graph();
  const RateConfig rates = m.load_rates(g, false);
  const SimEstimate est = simulate(g, rates, a.horizon, a.burn_in, a.replicas, a.seed);

  json doc;
  doc["replicas"] = est.replicas;
  doc["seed"] = est.seed;
  doc["horizon"] = a.horizon;
  doc["burn_in"] = a.burn_in;
  doc["survivors"] = est.survivors;
  doc["survival_fraction"] = est.survival_fraction;
  doc["prevalence_mean"] = to_json(est.prevalence_mean);
  doc["stderr"] = to_json(est.std_error);
  doc["y_mean"] = est.y_mean;
  doc["y_stderr"] = est.y_std_error;

  const ThresholdReport report = classify(g, rates);
  json nimfa;
  nimfa["lambda_max_R"] = report.lambda_max_R;
  if (report.regime == Regime::critical) {
    nimfa["regime"] = to_string(report.regime);
  } else {
    const SteadyState ss = solve(g, rates);
    nimfa["regime"] = to_string(ss.regime);
    nimfa["v_inf"] = to_json(ss.v_inf);
    nimfa["y_inf"] = ss.y_inf;
    nimfa["y_gap"] = ss.y_inf - est.y_mean;
  }
  doc["nimfa"] = nimfa;

  if (a.exact) {
    const ConditionedPrevalence ref =
        conditioned_prevalence(build_exact_chain(g, rates), a.horizon, a.burn_in);
    doc["exact"] = {{"prevalence", to_json(ref.prevalence)}, {"y", ref.y}, {"survival", ref.survival}};
  }
  out << write_json(doc) << '\n';
}

json error_doc(const std::string& code, const std::string& detail) {
  return json{{"error", code}, {"detail", detail}};
}

}  // namespace

std::string write_json(const json& doc) {
  std::string out;
  write_value(doc, out, 0);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous mean-field SIS epidemics on networks", "nimfa"};
  app.require_subcommand(1);

  ModelOptions model;
  double tol = 1e-10;
  long max_iter = 1'000'000;
  auto* steady = app.add_subcommand("steady", "metastable steady state");
  model.attach(steady);
  steady->add_option("--tol", tol, "nodal residual tolerance");
  steady->add_option("--max-iter", max_iter, "iteration cap");

  double t_end = 50.0;
  double dt = 0.01;
  std::string v0 = "1";
  bool full = false;
  auto* dynamics = app.add_subcommand("dynamics", "RK4 trajectory as CSV");
  model.attach(dynamics);
  dynamics->add_option("--t-end", t_end, "final time");
  dynamics->add_option("--dt", dt, "step hint");
  dynamics->add_option("--v0", v0, "initial state: scalar or comma list");
  dynamics->add_flag("--full-resolution", full, "store every step");

  std::string direction;
  auto* threshold = app.add_subcommand("threshold", "regime, critical scaling and bound ledger");
  model.attach(threshold);
  threshold->add_option("--direction", direction, "ray tau0 for the critical scaling s*");

  SensitivityArgs sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "curing-rate derivatives");
  model.attach(sensitivity);
  sensitivity->add_option("--node", sens.node, "node for the Schur form and optimum");
  sensitivity->add_option("--price", sens.price, "protection price c_i");
  sensitivity->add_option("--sweep-points", sens.sweep_points, "convexity sweep points (0: skip)");

  int kn_n = 0;
  std::string tau_list;
  std::string h2;
  auto* kn = app.add_subcommand("kn", "complete-graph analytic solver");
  kn->add_option("--n", kn_n, "node count");
  kn->add_option("--tau-list", tau_list, "tau values: scalar or comma list")->required();
  kn->add_option("--h2", h2, "perturbation of tau_2");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "stochastic simulation against the mean field");
  model.attach(oracle);
  oracle->add_option("--replicas", oracle_args.replicas, "replica count");
  oracle->add_option("--horizon", oracle_args.horizon, "simulated time");
  oracle->add_option("--burn-in", oracle_args.burn_in, "start of the averaging window");
  oracle->add_option("--seed", oracle_args.seed, "base seed");
  oracle->add_flag("--exact", oracle_args.exact, "add the exact-chain reference (N <= 14)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    out << write_json(error_doc("usage", e.what())) << '\n';
    return kInputError;
  }

  try {
    if (steady->parsed()) cmd_steady(model, tol, max_iter, out);
    if (dynamics->parsed()) cmd_dynamics(model, t_end, dt, v0, full, out);
    if (threshold->parsed()) cmd_threshold(model, direction, out);
    if (sensitivity->parsed()) cmd_sensitivity(model, sens, out);
    if (kn->parsed()) cmd_kn(kn_n, tau_list, h2, out);
    if (oracle->parsed()) cmd_oracle(model, oracle_args, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    out << write_json(error_doc("input", e.what())) << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    out << write_json(error_doc(e.code(), e.what())) << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    out << write_json(error_doc("internal", e.what())) << '\n';
    return kNumericalError;
  }
  return kOk;
}

}  // namespace nimfa::cli
