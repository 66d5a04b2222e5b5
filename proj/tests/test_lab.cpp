#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "obsplan/gen.hpp"
#include "obsplan/lab.hpp"
#include "support/oracles.hpp"

using namespace obsplan;

namespace {

// Expected L1 error at anchor + t by brute force: walk every history under a
// policy, computing both beliefs by summing over state sequences.
std::vector<double> curve_oracle(const Pomdp& m, const Policy& pol, int anchor, int t_max) {
  std::vector<double> sum(t_max + 1, 0.0), weight(t_max + 1, 0.0);
  const std::vector<double> uniform(m.num_states, 1.0 / m.num_states);
  std::function<void(History&, const std::vector<double>&)> rec = [&](History& h, const std::vector<double>& alpha) {
    const int stage = h.stage();
    if (stage >= anchor) {
      const int t = stage - anchor;
      const double mass = oracle::total(alpha);
      std::vector<int> wa(h.actions.begin() + (anchor - 1), h.actions.end());
      std::vector<int> wy(h.observations.begin() + (anchor - 1), h.observations.end());
      const auto b = oracle::sequence_posterior(m, m.initial_belief, 1, h.actions, h.observations);
      const auto bhat = oracle::sequence_posterior(m, anchor == 1 ? m.initial_belief : uniform, anchor, wa, wy);
      if (std::isfinite(bhat[0])) {
        double e = 0.0;
        for (int x = 0; x < m.num_states; ++x) e += std::abs(b[x] - bhat[x]);
        sum[t] += mass * e;
        weight[t] += mass;
      }
    }
    if (stage == anchor + t_max) return;
    std::vector<double> probs(m.num_actions);
    pol.action_distribution(h, probs);
    for (int a = 0; a < m.num_actions; ++a) {
      if (probs[a] == 0.0) continue;
      for (int y = 0; y < m.num_observations; ++y) {
        auto next = oracle::joint_step(m, alpha, stage, a, y);
        for (double& v : next) v *= probs[a];
        if (oracle::total(next) <= 1e-300) continue;
        h.actions.push_back(a);
        h.observations.push_back(y);
        rec(h, next);
        h.actions.pop_back();
        h.observations.pop_back();
      }
    }
  };
  History root;
  rec(root, m.initial_belief);
  for (int t = 0; t <= t_max; ++t) sum[t] /= weight[t];
  return sum;
}

}  // namespace

TEST(ContractionCurve, WindowReachingFirstStepIsExact) {
  const Pomdp m = gen_random_observable(3, 2, 6, 0.4, 3);
  for (auto method : {CurveMethod::MonteCarlo, CurveMethod::ExactTree}) {
    const auto c = contraction_curve(m, HashedPolicy(2, 1), 1, 5, {method, 300, 2, 1, 1e6});
    ASSERT_EQ(c.points.size(), 6u);
    for (const auto& p : c.points) EXPECT_NEAR(p.mean_l1, 0.0, 1e-12) << to_string(method) << " t=" << p.t;
  }
}

TEST(ContractionCurve, ExactTreeMatchesSequenceOracle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Pomdp m = oracle::random_pomdp(3, 2, 2, 6, seed + 40);
    const HashedPolicy pol(2, seed);
    const auto c = contraction_curve(m, pol, 2, 4, {CurveMethod::ExactTree, 0, 1, 1, 1e6});
    const auto ref = curve_oracle(m, pol, 2, 4);
    for (int t = 0; t <= 4; ++t) EXPECT_NEAR(c.points[t].mean_l1, ref[t], 1e-10) << "seed=" << seed << " t=" << t;
  }
  const Pomdp m = oracle::random_pomdp(3, 2, 2, 5, 77);
  const auto c = contraction_curve(m, UniformRandomPolicy(), 2, 3, {CurveMethod::ExactTree, 0, 1, 1, 1e6});
  const auto ref = curve_oracle(m, UniformRandomPolicy(), 2, 3);
  for (int t = 0; t <= 3; ++t) EXPECT_NEAR(c.points[t].mean_l1, ref[t], 1e-10) << "uniform t=" << t;
}

TEST(ContractionCurve, MonteCarloAgreesWithExactTree) {
  const Pomdp m = gen_random_observable(3, 2, 7, 0.3, 11);
  const HashedPolicy pol(2, 4);
  const auto exact = contraction_curve(m, pol, 2, 5, {CurveMethod::ExactTree, 0, 1, 1, 1e6});
  const auto mc = contraction_curve(m, pol, 2, 5, {CurveMethod::MonteCarlo, 20000, 8, 1, 0});
  for (int t = 0; t <= 5; ++t) {
    EXPECT_NEAR(mc.points[t].mean_l1, exact.points[t].mean_l1, 4.0 * mc.points[t].stderr_l1 + 1e-12) << "t=" << t;
  }
}

TEST(ContractionCurve, ThreadCountDoesNotChangeResult) {
  const Pomdp m = gen_random_observable(4, 2, 8, 0.3, 5);
  for (auto method : {CurveMethod::MonteCarlo, CurveMethod::ExactTree}) {
    const auto a = contraction_curve(m, UniformRandomPolicy(), 2, 5, {method, 1000, 3, 1, 1e7});
    const auto b = contraction_curve(m, UniformRandomPolicy(), 2, 5, {method, 1000, 3, 4, 1e7});
    EXPECT_EQ(curve_csv(a), curve_csv(b)) << to_string(method);
  }
}

TEST(ContractionCurve, StaysUnderEnvelope) {
  // Expected error is at most min(2, S (1 - gamma^4)^t) for gamma-observable
  // models; checked on the exact tree where there is no sampling noise.
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const double g = 0.3 + 0.2 * static_cast<double>(seed);
    const Pomdp m = gen_random_observable(3, 2, 8, g, seed);
    const auto c = contraction_curve(m, UniformRandomPolicy(), 2, 6, {CurveMethod::ExactTree, 0, 1, 1, 1e7});
    EXPECT_NEAR(c.gamma, g, 1e-12);
    for (const auto& p : c.points) {
      EXPECT_LE(p.mean_l1, std::min(2.0, 3.0 * std::pow(1.0 - std::pow(g, 4), p.t)) + 1e-12);
    }
  }
}

TEST(ContractionCurve, NonIncreasingOnExactTreeForFullyInformativeTail) {
  // With identity emissions the approximate belief is exact after one step.
  const Pomdp m = gen_random_observable(3, 2, 6, 1.0, 2);
  const auto c = contraction_curve(m, UniformRandomPolicy(), 3, 3, {CurveMethod::ExactTree, 0, 1, 1, 1e6});
  EXPECT_GT(c.points[0].mean_l1, 0.0);
  for (int t = 1; t <= 3; ++t) EXPECT_NEAR(c.points[t].mean_l1, 0.0, 1e-12);
}

TEST(ContractionCurve, RejectsBadArguments) {
  const Pomdp m = gen_random_observable(3, 2, 6, 0.4, 3);
  EXPECT_THROW(contraction_curve(m, UniformRandomPolicy(), 0, 3), InvalidArgument);
  EXPECT_THROW(contraction_curve(m, UniformRandomPolicy(), 2, 5), InvalidArgument);
  EXPECT_THROW(contraction_curve(m, UniformRandomPolicy(), 2, 3, {CurveMethod::MonteCarlo, 0}), InvalidArgument);
  EXPECT_THROW(contraction_curve(m, UniformRandomPolicy(), 2, 3, {CurveMethod::ExactTree, 0, 1, 1, 5}),
               BudgetExceeded);
}

TEST(DecayFit, RecoversExponentialRate) {
  ContractionCurve c;
  for (int t = 0; t <= 8; ++t) c.points.push_back({t, 1.7 * std::exp(-0.3 * t), 0.0, 100, 0});
  const DecayFit f = fit_decay_slope(c, 2, 7);
  EXPECT_EQ(f.points_used, 6);
  EXPECT_NEAR(f.slope, -0.3, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(1.7), 1e-12);
}

TEST(DecayFit, SkipsNoisyPoints) {
  ContractionCurve c;
  c.points.push_back({0, 1.0, 0.01, 10, 0});
  c.points.push_back({1, 0.5, 0.01, 10, 0});
  c.points.push_back({2, 0.01, 0.01, 10, 0});
  const DecayFit f = fit_decay_slope(c, 0, 2);
  EXPECT_EQ(f.points_used, 2);
  EXPECT_NEAR(f.slope, std::log(0.5), 1e-12);
  EXPECT_TRUE(std::isnan(fit_decay_slope(c, 2, 2).slope));
}

TEST(CurveCsv, HeaderAndRows) {
  const Pomdp m = gen_random_observable(2, 1, 4, 0.5, 1);
  const auto c = contraction_curve(m, UniformRandomPolicy(), 2, 2, {CurveMethod::MonteCarlo, 10});
  const std::string csv = curve_csv(c);
  EXPECT_EQ(csv.rfind("t,mean_l1,stderr,trials\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(InequalitySuite, CorrectUpdatePasses) {
  const auto rep = contraction_inequality_suite(1, 500);
  ASSERT_EQ(rep.checks.size(), 8u);
  for (const auto& c : rep.checks) {
    EXPECT_EQ(c.violations, 0) << c.name << " worst slack " << c.worst_slack;
    EXPECT_GT(c.evaluated, 0) << c.name;
  }
  EXPECT_TRUE(rep.passed());
  EXPECT_TRUE(rep.failures.empty());
  EXPECT_EQ(to_json(rep).at("update"), "correct");
}

TEST(InequalitySuite, ShiftedColumnUpdateIsCaught) {
  const auto rep = contraction_inequality_suite(1, 500, 1, UpdateVariant::ShiftedColumn);
  EXPECT_FALSE(rep.passed());
  ASSERT_FALSE(rep.failures.empty());
  const auto& f = rep.failures.front();
  EXPECT_GT(f.lhs, f.rhs);
  EXPECT_TRUE(f.inputs.contains("channel"));
  EXPECT_TRUE(f.inputs.contains("b_prime"));
  EXPECT_EQ(to_json(rep).at("update"), "shifted-column");
}

TEST(InequalitySuite, ThreadCountDoesNotChangeReport) {
  const auto a = contraction_inequality_suite(9, 120, 1);
  const auto b = contraction_inequality_suite(9, 120, 4);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(InequalitySuite, EqualBeliefsHaveZeroSides) {
  detail::TrialInputs in;
  in.S = 3;
  in.O = 2;
  in.channel = Matrix(3, 2);
  for (int x = 0; x < 3; ++x) {
    in.channel(x, 0) = 0.2 + 0.3 * x;
    in.channel(x, 1) = 1.0 - in.channel(x, 0);
  }
  in.kernel = Matrix(3, 3);
  for (int x = 0; x < 3; ++x) in.kernel(x, (x + 1) % 3) = 1.0;
  in.b = in.bp = {0.2, 0.5, 0.3};
  in.gamma = gamma_exact(in.channel).gamma;
  const auto out = detail::evaluate_trial(in, UpdateVariant::Correct);
  for (int k = 0; k < 7; ++k) {
    EXPECT_NEAR(out.lhs[k], k == 3 ? 1.0 : 0.0, 1e-15) << inequality_names()[k];
    EXPECT_GE(out.rhs[k] - out.lhs[k], -1e-15) << inequality_names()[k];
  }
}

TEST(DivergenceDemo, KlIncreasesAfterUnlikelyObservation) {
  const auto rep = divergence_increase_demo(0.01);
  EXPECT_TRUE(rep.increase_confirmed);
  EXPECT_LE(rep.increase.kl_before, std::log(2.0));
  EXPECT_GE(rep.increase.kl_after, 3.0);
  // Hand computation: b = (1 - 1e-4, 1e-4), observing symbol 2.
  const double e = 0.01, p0 = (1 - e * e) * e, p1 = e * e * (1 - e);
  const double z = p0 + p1;
  const double ref = p0 / z * std::log(p0 / z / e) + p1 / z * std::log(p1 / z / (1 - e));
  EXPECT_NEAR(rep.increase.kl_after, ref, 1e-12);
  EXPECT_NEAR(rep.increase.prob_observation, z, 1e-15);
}

TEST(DivergenceDemo, DecrementIsQuadraticInKl) {
  const auto rep = divergence_increase_demo(0.01, 0.25, {0.1, 0.05, 0.01});
  ASSERT_EQ(rep.decrements.size(), 3u);
  for (const auto& c : rep.decrements) {
    EXPECT_NEAR(c.kl_before, -std::log(1 - c.eps), 1e-15);
    EXPECT_GT(c.decrement, 0.0);
  }
  EXPECT_LE(rep.ratio_spread, 4.0);
}

TEST(DivergenceDemo, RejectsDegenerateEps) {
  EXPECT_THROW(divergence_increase_demo(0.0), InvalidArgument);
  EXPECT_THROW(divergence_increase_demo(0.01, 0.25, {0.1, 0.0}), InvalidArgument);
  EXPECT_THROW(divergence_increase_demo(0.01, 0.5), InvalidArgument);
  EXPECT_EQ(symmetric_channel(0.2)(1, 0), 0.2);
}
