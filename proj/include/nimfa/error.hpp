#pragma once

#include <stdexcept>
#include <string>

namespace nimfa {

/// Malformed or inconsistent input (bad edge list, rate vector of the wrong
/// length, violated precondition). Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed: non-convergence, a singular system near the
/// critical threshold, an unstable integration step. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  /// Short machine-readable tag, e.g. "no_convergence" or "near_critical".
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void expect(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace nimfa
