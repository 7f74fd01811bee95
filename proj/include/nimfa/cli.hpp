#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace nimfa::cli {

/// Exit codes of `run`.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kNumericalError = 3;

/// Runs one subcommand (steady, dynamics, threshold, sensitivity, kn,
/// oracle). `args` excludes the program name. Documents go to `out`,
/// diagnostics to `err`; failures also write {"error", "detail"} to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Indented JSON with keys in insertion order and doubles printed with 17
/// significant digits; non-finite doubles become null.
std::string write_json(const nlohmann::ordered_json& doc);

}  // namespace nimfa::cli
