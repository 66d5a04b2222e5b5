#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "obsplan/model.hpp"
#include "obsplan/rng.hpp"

namespace obsplan {

/// A history-dependent (possibly randomized) policy. Implementations must be
/// safe to call concurrently from several threads.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Writes the action distribution at history.stage() into `probs` (size A).
  virtual void action_distribution(const History& history, std::span<double> probs) const = 0;
  virtual std::string tag() const { return "policy"; }
};

class DeterministicPolicy : public Policy {
 public:
  virtual int act(const History& history) const = 0;

  void action_distribution(const History& history, std::span<double> probs) const override {
    std::fill(probs.begin(), probs.end(), 0.0);
    probs[act(history)] = 1.0;
  }
};

class UniformRandomPolicy : public Policy {
 public:
  void action_distribution(const History&, std::span<double> probs) const override {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(probs.size()));
  }
  std::string tag() const override { return "uniform-random"; }
};

class FunctionPolicy : public DeterministicPolicy {
 public:
  explicit FunctionPolicy(std::function<int(const History&)> f, std::string tag = "function")
      : f_(std::move(f)), tag_(std::move(tag)) {}
  int act(const History& history) const override { return f_(history); }
  std::string tag() const override { return tag_; }

 private:
  std::function<int(const History&)> f_;
  std::string tag_;
};

/// Deterministic policy whose action is a hash of the full history. Behaves
/// like a fixed random lookup table without storing one.
class HashedPolicy : public DeterministicPolicy {
 public:
  HashedPolicy(int num_actions, std::uint64_t seed) : num_actions_(num_actions), seed_(seed) {}

  int act(const History& history) const override {
    std::uint64_t x = splitmix64(seed_);
    for (std::size_t k = 0; k < history.actions.size(); ++k) {
      x = splitmix64(x ^ (static_cast<std::uint64_t>(history.actions[k]) + 1));
      x = splitmix64(x ^ ((static_cast<std::uint64_t>(history.observations[k]) + 1) << 20));
    }
    return static_cast<int>(x % static_cast<std::uint64_t>(num_actions_));
  }
  std::string tag() const override { return "hashed:" + std::to_string(seed_); }

 private:
  int num_actions_;
  std::uint64_t seed_;
};

}  // namespace obsplan
