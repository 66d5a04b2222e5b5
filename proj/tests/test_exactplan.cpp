#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "obsplan/exactplan.hpp"
#include "obsplan/gen.hpp"
#include "support/oracles.hpp"

using namespace obsplan;

namespace {

Pomdp zero_rewards(Pomdp m) {
  for (auto& r : m.rewards) std::fill(r.begin(), r.end(), 0.0);
  return m;
}

// Deterministic chain: state x -> x + 1 mod S regardless of action, identity
// emissions, reward 1 for observation 0.
Pomdp single_path(int S, int H) {
  Pomdp m = gen_random_observable(S, 2, H, 1.0, 0);
  m.initial_belief.assign(S, 0.0);
  m.initial_belief[0] = 1.0;
  Matrix shift(S, S);
  for (int x = 0; x < S; ++x) shift(x, (x + 1) % S) = 1.0;
  for (auto& per_action : m.transitions)
    for (auto& t : per_action) t = shift;
  for (auto& r : m.rewards) {
    std::fill(r.begin(), r.end(), 0.0);
    r[0] = 1.0;
  }
  return m;
}

}  // namespace

TEST(SolveExact, ZeroRewardsGiveZero) {
  const Pomdp m = zero_rewards(oracle::random_pomdp(3, 2, 2, 4, 1));
  EXPECT_EQ(solve_exact(m).value(), 0.0);
  EXPECT_EQ(solve_exact(gen_contraction_lb(0.2, 5)).value(), 0.0);
}

TEST(SolveExact, MatchesLiteralPolicyEnumeration) {
  // S=2, A=2, O=2, H=3: 1 + A*O = 5 decision points, 32 policies.
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Pomdp m = oracle::random_pomdp(2, 2, 2, 3, seed);
    EXPECT_NEAR(solve_exact(m).value(), oracle::enumerate_policies_value(m), 1e-12) << seed;
  }
}

TEST(SolveExact, MatchesHistoryTreeExpectimax) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Pomdp m = oracle::random_pomdp(3, 2, 3, 4, seed + 50);
    EXPECT_NEAR(solve_exact(m).value(), oracle::history_tree_value(m), 1e-10) << seed;
  }
}

TEST(SolveExact, BellmanConsistencyAtEveryNode) {
  const Pomdp m = oracle::random_pomdp(3, 3, 2, 4, 9);
  const ExactSolution sol = solve_exact(m);
  ASSERT_FALSE(sol.nodes().empty());
  for (const auto& n : sol.nodes()) {
    const double best = *std::max_element(n.q.begin(), n.q.end());
    EXPECT_EQ(n.value, best);
    EXPECT_EQ(n.q[n.action], best);
    for (int a = 0; a < n.action; ++a) EXPECT_LT(n.q[a], best);  // lowest index on ties
  }
}

TEST(SolveExact, TiesGoToLowestAction) {
  Pomdp m = gen_random_observable(2, 3, 3, 0.5, 4);
  for (auto& per_action : m.transitions)
    for (auto& t : per_action) t = per_action[0];
  const ExactSolution sol = solve_exact(m);
  for (const auto& n : sol.nodes()) EXPECT_EQ(n.action, 0);
}

TEST(SolveExact, BudgetExceededReportsHistoryCount) {
  const Pomdp m = gen_random_observable(4, 3, 6, 0.3, 1);
  try {
    solve_exact(m, 10);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.required(), std::pow(12.0, 5));
    EXPECT_EQ(e.budget(), 10.0);
  }
}

TEST(SolveExact, PolicyReproducesValue) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Pomdp m = oracle::random_pomdp(3, 2, 3, 4, seed + 7);
    const ExactSolution sol = solve_exact(m);
    EXPECT_NEAR(eval_policy_exact(m, sol), sol.value(), 1e-12);
  }
}

TEST(SolveExact, DominatesRandomPolicies) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Pomdp m = oracle::random_pomdp(3, 2, 3, 4, seed + 30);
    const double v = solve_exact(m).value();
    for (std::uint64_t k = 0; k < 100; ++k) {
      EXPECT_LE(eval_policy_exact(m, HashedPolicy(2, k)), v + 1e-12);
    }
    EXPECT_LE(eval_policy_exact(m, UniformRandomPolicy()), v + 1e-12);
  }
}

TEST(SolveExact, SolutionJsonHasNodes) {
  const Pomdp m = oracle::random_pomdp(2, 2, 2, 3, 3);
  const ExactSolution sol = solve_exact(m);
  const Json j = sol.to_json();
  EXPECT_EQ(j.at("value").get<double>(), sol.value());
  EXPECT_EQ(j.at("nodes").size(), sol.nodes().size());
}

TEST(EvalExact, ZeroRewards) {
  const Pomdp m = zero_rewards(oracle::random_pomdp(3, 2, 2, 4, 2));
  EXPECT_EQ(eval_policy_exact(m, UniformRandomPolicy()), 0.0);
}

TEST(EvalExact, MatchesHistoryTreeForFixedPolicy) {
  const Pomdp m = oracle::random_pomdp(3, 2, 3, 4, 12);
  const HashedPolicy pol(2, 5);
  // Reference: unnormalized forward recursion under the same policy.
  std::function<double(History&, const std::vector<double>&)> rec = [&](History& h, const std::vector<double>& a) {
    const int stage = h.stage();
    if (stage == m.horizon) return 0.0;
    const int act = pol.act(h);
    double v = 0.0;
    for (int y = 0; y < m.num_observations; ++y) {
      const auto next = oracle::joint_step(m, a, stage, act, y);
      const double p = oracle::total(next);
      if (p == 0.0) continue;
      h.actions.push_back(act);
      h.observations.push_back(y);
      v += p * m.rewards[stage - 1][y] + rec(h, next);
      h.actions.pop_back();
      h.observations.pop_back();
    }
    return v;
  };
  History root;
  EXPECT_NEAR(eval_policy_exact(m, pol), rec(root, m.initial_belief), 1e-12);
}

TEST(EvalMc, ZeroRewardsAndDeterministicPath) {
  const Pomdp z = zero_rewards(oracle::random_pomdp(3, 2, 2, 4, 2));
  const ValueEstimate e = eval_policy_mc(z, UniformRandomPolicy(), 500, 3);
  EXPECT_EQ(e.mean, 0.0);

  const Pomdp m = single_path(3, 7);
  const ValueEstimate d = eval_policy_mc(m, UniformRandomPolicy(), 1000, 9);
  // States 1,2,0,1,2,0 at steps 2..7: observation 0 twice.
  EXPECT_EQ(d.mean, 2.0);
  EXPECT_DOUBLE_EQ(d.half_width, 6.0 * std::sqrt(std::log(2.0 / 0.01) / 2000.0));
  EXPECT_EQ(d.samples, 1000);
}

TEST(EvalMc, AgreesWithExactWithinHalfWidth) {
  const Pomdp m = oracle::random_pomdp(3, 2, 3, 5, 21);
  const HashedPolicy pol(2, 1);
  const double exact = eval_policy_exact(m, pol);
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ValueEstimate e = eval_policy_mc(m, pol, 400, seed);
    if (std::abs(e.mean - exact) <= e.half_width) ++covered;
  }
  EXPECT_GE(covered, 99);
}

TEST(EvalMc, ThreadCountDoesNotChangeResult) {
  const Pomdp m = oracle::random_pomdp(3, 2, 3, 5, 22);
  const ValueEstimate a = eval_policy_mc(m, UniformRandomPolicy(), 3000, 5, 0.99, 1);
  const ValueEstimate b = eval_policy_mc(m, UniformRandomPolicy(), 3000, 5, 0.99, 4);
  EXPECT_EQ(a.mean, b.mean);
}

TEST(Simulate, DeterministicModelUniqueTrajectory) {
  const Pomdp m = single_path(3, 5);
  const Trajectory t = simulate(m, UniformRandomPolicy(), 123);
  EXPECT_EQ(t.states, (std::vector<int>{0, 1, 2, 0, 1}));
  EXPECT_EQ(t.observations, (std::vector<int>{1, 2, 0, 1}));
  EXPECT_EQ(t.rewards, (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(t.total_reward, 1.0);
}

TEST(Simulate, SameSeedSameTrajectory) {
  const Pomdp m = oracle::random_pomdp(4, 2, 3, 6, 5);
  const Trajectory a = simulate(m, UniformRandomPolicy(), 77), b = simulate(m, UniformRandomPolicy(), 77);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_EQ(a.total_reward, b.total_reward);
}

TEST(Simulate, RewardsFollowObservations) {
  const Pomdp m = oracle::random_pomdp(4, 2, 3, 6, 6);
  const Trajectory t = simulate(m, UniformRandomPolicy(), 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < t.observations.size(); ++k) {
    EXPECT_EQ(t.rewards[k], m.reward(static_cast<int>(k) + 2)[t.observations[k]]);
    sum += t.rewards[k];
  }
  EXPECT_EQ(t.total_reward, sum);
}

TEST(Simulate, StateFrequenciesMatchMarginals) {
  const Pomdp m = oracle::random_pomdp(3, 1, 2, 4, 8);
  const int N = 100000;
  std::vector<std::vector<double>> counts(4, std::vector<double>(3, 0.0));
  for (int s = 0; s < N; ++s) {
    const Trajectory t = simulate(m, UniformRandomPolicy(), static_cast<std::uint64_t>(s));
    for (int h = 0; h < 4; ++h) counts[h][t.states[h]] += 1;
  }
  std::vector<double> marg = m.initial_belief;
  for (int h = 0; h < 4; ++h) {
    if (h > 0) marg = push_forward(m.transition(h, 0), marg);
    for (int x = 0; x < 3; ++x) {
      const double p = marg[x], sigma = std::sqrt(p * (1 - p) / N);
      EXPECT_NEAR(counts[h][x] / N, p, 3 * sigma + 1e-12) << "h=" << h + 1 << " x=" << x;
    }
  }
}
