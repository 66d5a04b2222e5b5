#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace obsplan {

/// Base class of every error raised by the library. `kind()` is the stable
/// machine-readable name used in CLI error reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

/// The observation has (numerically) zero probability under the belief it
/// conditions.
class ImpossibleObservation : public Error {
 public:
  ImpossibleObservation(int step, int observation)
      : Error("observation " + std::to_string(observation) + " has zero probability at step " +
              std::to_string(step)),
        step_(step),
        observation_(observation) {}
  const char* kind() const noexcept override { return "ImpossibleObservation"; }
  int step() const noexcept { return step_; }
  int observation() const noexcept { return observation_; }

 private:
  int step_;
  int observation_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double required, double budget)
      : Error(what + ": needs " + format_count(required) + ", budget is " + format_count(budget)),
        required_(required),
        budget_(budget) {}
  const char* kind() const noexcept override { return "BudgetExceeded"; }
  /// Required size. Stored as double since estimates can overflow 64 bits.
  double required() const noexcept { return required_; }
  double budget() const noexcept { return budget_; }

 private:
  static std::string format_count(double v) {
    if (v < 1e18) return std::to_string(static_cast<std::uint64_t>(v));
    return std::to_string(v);
  }
  double required_;
  double budget_;
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ParseError"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ShapeError"; }
};

/// One invariant violation found by `validate`.
struct Violation {
  std::string location;
  std::string message;
  bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(summarize(violations)), violations_(std::move(violations)) {}
  const char* kind() const noexcept override { return "ValidationError"; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string s = std::to_string(v.size()) + " model violation(s)";
    if (!v.empty()) s += "; first: " + v.front().location + ": " + v.front().message;
    return s;
  }
  std::vector<Violation> violations_;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "DimensionTooLarge"; }
};

class SizeBudgetExceeded : public Error {
 public:
  SizeBudgetExceeded(long long states, long long actions, long long horizon, const std::string& why)
      : Error("instance too large (S=" + std::to_string(states) + ", A=" + std::to_string(actions) +
              ", H=" + std::to_string(horizon) + "): " + why),
        states_(states),
        actions_(actions),
        horizon_(horizon) {}
  const char* kind() const noexcept override { return "SizeBudgetExceeded"; }
  long long states() const noexcept { return states_; }
  long long actions() const noexcept { return actions_; }
  long long horizon() const noexcept { return horizon_; }

 private:
  long long states_, actions_, horizon_;
};

class UnknownExample : public Error {
 public:
  explicit UnknownExample(const std::string& name) : Error("unknown example '" + name + "'") {}
  const char* kind() const noexcept override { return "UnknownExample"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InvalidArgument"; }
};

}  // namespace obsplan
