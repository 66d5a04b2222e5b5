#pragma once

// Exact finite-horizon planning and policy evaluation over the history tree.
//
// solve_exact memoizes the Bellman recursion on (stage, belief). Two histories
// with the same belief have the same optimal continuation, so this is the
// history-tree recursion with repeated subtrees shared. States from which no
// reward is reachable are dropped from the belief before lookup: the optimal
// value is linear in such mass (it contributes 0 under every policy), so
// V*(b) = m * V*(b restricted to live states, renormalized) where m is the
// live mass, and the argmax is unchanged.

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "obsplan/belief.hpp"
#include "obsplan/errors.hpp"
#include "obsplan/model.hpp"
#include "obsplan/parallel.hpp"
#include "obsplan/policy.hpp"
#include "obsplan/rng.hpp"

namespace obsplan {

inline constexpr double kDefaultHistoryBudget = 1e7;

/// (A*O)^(H-1), the number of full-length histories; may overflow to inf.
inline double history_count(const Pomdp& m) {
  return std::pow(static_cast<double>(m.num_actions) * m.num_observations, m.horizon - 1);
}

/// live[h][x]: some action sequence from state x at step h earns positive
/// reward with positive probability. Index h runs 1..H (entry 0 unused).
inline std::vector<std::vector<char>> live_states(const Pomdp& m) {
  const int H = m.horizon, S = m.num_states;
  std::vector<std::vector<char>> live(H + 1, std::vector<char>(S, 0));
  for (int h = H - 1; h >= 1; --h) {
    const Matrix& em = m.emission(h + 1);
    const auto& r = m.reward(h + 1);
    std::vector<char> rewarding(S, 0);
    for (int z = 0; z < S; ++z) {
      bool any = live[h + 1][z] != 0;
      for (int y = 0; y < m.num_observations && !any; ++y) any = em(z, y) > 0.0 && r[y] > 0.0;
      rewarding[z] = any;
    }
    for (int x = 0; x < S; ++x) {
      bool any = false;
      for (int a = 0; a < m.num_actions && !any; ++a) {
        auto row = m.transition(h, a).row(x);
        for (int z = 0; z < S && !any; ++z) any = row[z] > 0.0 && rewarding[z];
      }
      live[h][x] = any;
    }
  }
  return live;
}

struct ExactNode {
  int stage = 1;
  std::vector<double> belief;  // restricted to live states, renormalized
  std::vector<double> q;       // Q*_h(b, a) per action
  int action = 0;
  double value = 0.0;          // V*_h(b) = max_a q[a]
  History history;             // first history that reached this belief
};

/// Optimal value and policy. Holds a reference to the model it was solved
/// on; the model must outlive it.
class ExactSolution : public DeterministicPolicy {
 public:
  double value() const noexcept { return value_; }
  const std::vector<ExactNode>& nodes() const noexcept { return nodes_; }
  const Pomdp& model() const noexcept { return *model_; }

  /// Node reached by `history`, or nullptr when the history has probability
  /// zero or only reward-free states remain.
  const ExactNode* node_for(const History& history) const {
    const Pomdp& m = *model_;
    check_history(m, history.actions, history.observations, history.stage());
    Canonical c = canonicalize(1, m.initial_belief);
    if (c.mass <= 0.0) return nullptr;
    const ExactNode* node = find(1, c.belief);
    for (std::size_t k = 0; k < history.actions.size(); ++k) {
      if (node == nullptr) return nullptr;
      const int h = static_cast<int>(k) + 1;
      const Vec pf = push_forward(m.transition(h, history.actions[k]), node->belief);
      const Matrix& em = m.emission(h + 1);
      const int y = history.observations[k];
      double py = 0.0;
      for (int x = 0; x < m.num_states; ++x) py += pf[x] * em(x, y);
      if (!(py > kImpossibleThreshold)) return nullptr;
      c = canonicalize(h + 1, channel_bayes(em, pf, y, h + 1));
      if (c.mass <= 0.0) return nullptr;
      node = find(h + 1, c.belief);
    }
    return node;
  }

  int act(const History& history) const override {
    const ExactNode* n = node_for(history);
    return n == nullptr ? 0 : n->action;
  }

  std::string tag() const override { return "exact"; }

  Json to_json() const {
    Json nodes = Json::array();
    for (const auto& n : nodes_) {
      nodes.push_back({{"stage", n.stage},
                       {"actions", n.history.actions},
                       {"observations", n.history.observations},
                       {"action", n.action},
                       {"value", n.value},
                       {"q", n.q}});
    }
    return {{"value", value_}, {"num_nodes", nodes_.size()}, {"nodes", std::move(nodes)}};
  }

 private:
  friend ExactSolution solve_exact(const Pomdp&, double);

  struct Canonical {
    double mass = 0.0;
    Vec belief;
  };

  using Key = std::vector<std::int64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 1469598103934665603ULL;
      for (auto v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
      return static_cast<std::size_t>(h);
    }
  };

  Canonical canonicalize(int h, Vec b) const {
    const auto& live = live_[h];
    double mass = 0.0;
    for (std::size_t x = 0; x < b.size(); ++x) {
      if (!live[x]) b[x] = 0.0;
      mass += b[x];
    }
    if (!(mass > kImpossibleThreshold)) return {0.0, {}};
    for (double& p : b) p /= mass;
    return {mass, std::move(b)};
  }

  // Beliefs closer than 2^-40 per entry share a node, which absorbs rounding
  // differences between paths that reach the same posterior.
  static Key key_of(const Vec& b) {
    Key k(b.size());
    for (std::size_t x = 0; x < b.size(); ++x) k[x] = std::llround(std::ldexp(b[x], 40));
    return k;
  }

  const ExactNode* find(int h, const Vec& belief) const {
    auto it = index_[h].find(key_of(belief));
    return it == index_[h].end() ? nullptr : &nodes_[it->second];
  }

  // Value of the canonical belief at stage h; memoized.
  double solve(int h, Vec belief, History& history) {
    const Pomdp& m = *model_;
    if (h == m.horizon) return 0.0;
    Key key = key_of(belief);
    if (auto it = index_[h].find(key); it != index_[h].end()) return nodes_[it->second].value;

    const Matrix& em = m.emission(h + 1);
    const auto& r = m.reward(h + 1);
    ExactNode node;
    node.stage = h;
    node.q.assign(m.num_actions, 0.0);
    for (int a = 0; a < m.num_actions; ++a) {
      const Vec pf = push_forward(m.transition(h, a), belief);
      const Vec qy = channel_obs_dist(em, pf);
      double total = 0.0;
      for (int y = 0; y < m.num_observations; ++y) {
        if (!(qy[y] > kImpossibleThreshold)) continue;
        double cont = 0.0;
        Canonical c = canonicalize(h + 1, channel_bayes(em, pf, y, h + 1));
        if (c.mass > 0.0 && h + 1 < m.horizon) {
          history.actions.push_back(a);
          history.observations.push_back(y);
          cont = c.mass * solve(h + 1, std::move(c.belief), history);
          history.actions.pop_back();
          history.observations.pop_back();
        }
        total += qy[y] * (r[y] + cont);
      }
      node.q[a] = total;
    }
    node.action = 0;
    for (int a = 1; a < m.num_actions; ++a)
      if (node.q[a] > node.q[node.action]) node.action = a;
    node.value = node.q[node.action];
    node.belief = std::move(belief);
    node.history = history;
    if (static_cast<double>(nodes_.size()) + 1 > budget_) {
      throw BudgetExceeded("solve_exact: distinct belief nodes exceed the budget (full history tree has " +
                               std::to_string(history_count(m)) + " histories)",
                           history_count(m), budget_);
    }
    index_[h].emplace(std::move(key), nodes_.size());
    nodes_.push_back(std::move(node));
    return nodes_.back().value;
  }

  const Pomdp* model_ = nullptr;
  double budget_ = kDefaultHistoryBudget;
  double value_ = 0.0;
  std::vector<std::vector<char>> live_;
  std::vector<std::unordered_map<Key, std::size_t, KeyHash>> index_;
  std::vector<ExactNode> nodes_;
};

/// Optimal value V*_1 and an optimal deterministic policy. Argmax ties go to
/// the lowest action. `budget` caps the number of distinct belief nodes.
inline ExactSolution solve_exact(const Pomdp& m, double budget = kDefaultHistoryBudget) {
  require_valid(m);
  ExactSolution s;
  s.model_ = &m;
  s.budget_ = budget;
  s.live_ = live_states(m);
  s.index_.resize(m.horizon + 1);
  auto c = s.canonicalize(1, m.initial_belief);
  if (c.mass > 0.0) {
    History root;
    s.value_ = c.mass * s.solve(1, std::move(c.belief), root);
  }
  return s;
}

namespace detail {

struct EvalState {
  const Pomdp& m;
  const Policy& policy;
  double budget;
  double nodes = 0;
  History history;
  std::vector<double> probs;
};

// Expected reward collected after stage h given the unnormalized state
// vector alpha(x) = P(history, x_h = x).
inline double eval_from(EvalState& st, int h, const Vec& alpha) {
  const Pomdp& m = st.m;
  if (h == m.horizon) return 0.0;
  if (++st.nodes > st.budget) {
    throw BudgetExceeded("eval_policy_exact: history nodes", history_count(m), st.budget);
  }
  st.policy.action_distribution(st.history, st.probs);
  const std::vector<double> pa = st.probs;
  const Matrix& em = m.emission(h + 1);
  const auto& r = m.reward(h + 1);
  double total = 0.0;
  for (int a = 0; a < m.num_actions; ++a) {
    if (!(pa[a] > 0.0)) continue;
    Vec pf = push_forward(m.transition(h, a), alpha);
    for (double& v : pf) v *= pa[a];
    for (int y = 0; y < m.num_observations; ++y) {
      Vec next(m.num_states);
      double joint = 0.0;
      for (int x = 0; x < m.num_states; ++x) {
        next[x] = pf[x] * em(x, y);
        joint += next[x];
      }
      if (!(joint > kImpossibleThreshold)) continue;
      total += joint * r[y];
      if (h + 1 < m.horizon) {
        st.history.actions.push_back(a);
        st.history.observations.push_back(y);
        total += eval_from(st, h + 1, next);
        st.history.actions.pop_back();
        st.history.observations.pop_back();
      }
    }
  }
  return total;
}

}  // namespace detail

/// V^pi_1 by exact forward recursion over positive-probability histories.
inline double eval_policy_exact(const Pomdp& m, const Policy& policy, double budget = kDefaultHistoryBudget) {
  require_valid(m);
  detail::EvalState st{m, policy, budget, 0, {}, std::vector<double>(m.num_actions)};
  return detail::eval_from(st, 1, m.initial_belief);
}

/// One rollout drawing from `rng`: x_1 ~ b_1, a_h ~ pi, x_{h+1} ~ T_h, o_{h+1} ~ O_{h+1}.
inline Trajectory simulate(const Pomdp& m, const Policy& policy, Rng& rng) {
  Trajectory tr;
  History hist;
  std::vector<double> probs(m.num_actions);
  int x = sample_discrete(rng, m.initial_belief);
  tr.states.push_back(x);
  for (int h = 1; h < m.horizon; ++h) {
    policy.action_distribution(hist, probs);
    const int a = sample_discrete(rng, probs);
    x = sample_discrete(rng, m.transition(h, a).row(x));
    const int y = sample_discrete(rng, m.emission(h + 1).row(x));
    const double r = m.reward(h + 1)[y];
    tr.states.push_back(x);
    tr.actions.push_back(a);
    tr.observations.push_back(y);
    tr.rewards.push_back(r);
    tr.total_reward += r;
    hist.actions.push_back(a);
    hist.observations.push_back(y);
  }
  return tr;
}

inline Trajectory simulate(const Pomdp& m, const Policy& policy, std::uint64_t seed) {
  Rng rng = stream(seed, 0);
  return simulate(m, policy, rng);
}

struct ValueEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  long long samples = 0;
  double confidence = 0.99;
};

/// Hoeffding half-width for the mean of n samples in [0, H-1].
inline double hoeffding_half_width(int horizon, long long n, double confidence) {
  return (horizon - 1) * std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

/// Monte Carlo value of a policy. Episode i uses stream(seed, i), so the
/// estimate does not depend on `threads`.
inline ValueEstimate eval_policy_mc(const Pomdp& m, const Policy& policy, long long num_episodes, std::uint64_t seed,
                                    double confidence = 0.99, int threads = 1) {
  if (num_episodes < 1) throw InvalidArgument("eval_policy_mc: num_episodes must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("eval_policy_mc: confidence must be in (0, 1)");
  require_valid(m);
  std::vector<double> totals(static_cast<std::size_t>(num_episodes));
  parallel_for(totals.size(), threads, [&](std::size_t i) {
    Rng rng = stream(seed, i);
    totals[i] = simulate(m, policy, rng).total_reward;
  });
  double sum = 0.0;
  for (double t : totals) sum += t;
  return {sum / static_cast<double>(num_episodes), hoeffding_half_width(m.horizon, num_episodes, confidence),
          num_episodes, confidence};
}

}  // namespace obsplan
