#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obsplan/gen.hpp"
#include "obsplan/observability.hpp"
#include "obsplan/simplex.hpp"
#include "support/oracles.hpp"

using namespace obsplan;

namespace {

Matrix random_channel(Rng& rng, int S, int O, double alpha = 1.0) {
  Matrix m(S, O);
  for (int x = 0; x < S; ++x) {
    const auto row = dirichlet(rng, O, alpha);
    for (int y = 0; y < O; ++y) m(x, y) = row[y];
  }
  return m;
}

double sum_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simplex

TEST(Simplex, LowerBoundedVariable) {
  LpProblem p;
  p.num_vars = 1;
  p.cost = {1.0};
  p.rows = {{{1.0}, Sense::GreaterEqual, 3.0}};
  const LpResult r = lp_solve(p);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 3.0, 1e-12);
}

TEST(Simplex, TwoVariableMaximization) {
  LpProblem p;
  p.num_vars = 2;
  p.cost = {-1.0, -1.0};
  p.rows = {{{1.0, 1.0}, Sense::LessEqual, 1.0}};
  const LpResult r = lp_solve(p);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-12);
  for (double rc : r.reduced_costs) EXPECT_GE(rc, -1e-9);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  LpProblem inf;
  inf.num_vars = 1;
  inf.cost = {1.0};
  inf.rows = {{{1.0}, Sense::LessEqual, 1.0}, {{1.0}, Sense::GreaterEqual, 2.0}};
  EXPECT_EQ(lp_solve(inf).status, LpStatus::Infeasible);

  LpProblem unb;
  unb.num_vars = 2;
  unb.cost = {-1.0, 0.0};
  unb.rows = {{{1.0, -1.0}, Sense::LessEqual, 1.0}};
  EXPECT_EQ(lp_solve(unb).status, LpStatus::Unbounded);
}

TEST(Simplex, FreeAndBoundedVariables) {
  // min x - y  s.t. x + y = 2, x free, -1 <= y <= 1.5
  LpProblem p;
  p.num_vars = 2;
  p.cost = {1.0, -1.0};
  p.rows = {{{1.0, 1.0}, Sense::Equal, 2.0}};
  const double inf = std::numeric_limits<double>::infinity();
  p.lower = {-inf, -1.0};
  p.upper = {inf, 1.5};
  const LpResult r = lp_solve(p);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_NEAR(r.x[1], 1.5, 1e-12);
  EXPECT_NEAR(r.objective, -1.0, 1e-12);
}

TEST(Simplex, DegenerateProblemTerminates) {
  // A classic cycling example for the largest-coefficient rule.
  LpProblem p;
  p.num_vars = 4;
  p.cost = {-10.0, 57.0, 9.0, 24.0};
  p.rows = {{{0.5, -5.5, -2.5, 9.0}, Sense::LessEqual, 0.0},
            {{0.5, -1.5, -0.5, 1.0}, Sense::LessEqual, 0.0},
            {{1.0, 0.0, 0.0, 0.0}, Sense::LessEqual, 1.0}};
  const LpResult r = lp_solve(p);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-9);
}

TEST(Simplex, MatchesVertexEnumeration) {
  Rng rng = stream(12, 0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + uniform_index(rng, 2), m = 1 + uniform_index(rng, 4);
    std::vector<double> c(n);
    for (double& v : c) v = 2 * uniform01(rng) - 1;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> b(m);
    LpProblem p;
    p.num_vars = n;
    p.cost = c;
    for (int i = 0; i < m; ++i) {
      for (double& v : A[i]) v = 2 * uniform01(rng) - 1;
      b[i] = 2 * uniform01(rng) - 0.5;
      p.rows.push_back({A[i], Sense::LessEqual, b[i]});
    }
    p.upper.assign(n, 5.0);
    const double ref = oracle::lp_vertex_enumeration(c, A, b, 5.0);
    const LpResult r = lp_solve(p);
    if (std::isinf(ref)) {
      EXPECT_EQ(r.status, LpStatus::Infeasible) << trial;
      continue;
    }
    ASSERT_EQ(r.status, LpStatus::Optimal) << trial;
    EXPECT_NEAR(r.objective, ref, 1e-9) << trial;
    for (int i = 0; i < m; ++i) {
      double lhs = 0.0;
      for (int k = 0; k < n; ++k) lhs += A[i][k] * r.x[k];
      EXPECT_LE(lhs, b[i] + 1e-9);
    }
    for (double rc : r.reduced_costs) EXPECT_GE(rc, -1e-9);
    ++solved;
  }
  EXPECT_GT(solved, 100);
}

TEST(Simplex, IterationCap) {
  LpProblem p;
  p.num_vars = 2;
  p.cost = {-1.0, -1.0};
  p.rows = {{{1.0, 2.0}, Sense::LessEqual, 4.0}, {{3.0, 1.0}, Sense::LessEqual, 6.0}};
  EXPECT_EQ(lp_solve(p, 1).status, LpStatus::MaxIterations);
}

// ---------------------------------------------------------------------------
// gamma

TEST(GammaExact, IdentityMixAndNullChannels) {
  for (int S = 2; S <= 8; ++S) {
    for (double g : {0.1, 0.3, 0.5, 1.0}) {
      EXPECT_NEAR(gamma_exact(identity_mix_channel(S, g)).gamma, g, 1e-9) << S << " " << g;
      EXPECT_NEAR(gamma_exact(null_channel(S, g)).gamma, g, 1e-9) << S << " " << g;
    }
  }
}

TEST(GammaExact, BadlyScaledTwoColumnChannel) {
  // With two observations and three or more states, some mixture of the
  // outer rows reproduces an inner row, so gamma is 0. Entries near 1e-8
  // used to push the sign-pattern LP into a spurious infeasible verdict.
  const std::vector<double> p0 = {1.6766124573666526e-08, 0.35898166131912029, 3.919988038333358e-06,
                                  0.0044111010123253904,  0.91321682834376361, 0.90526179841041488,
                                  0.0015682178230851029,  0.01194967777055746};
  Matrix m(8, 2);
  for (int x = 0; x < 8; ++x) {
    m(x, 0) = p0[x];
    m(x, 1) = 1.0 - p0[x];
  }
  const GammaResult g = gamma_exact(m);
  EXPECT_NEAR(g.gamma, 0.0, 1e-12);
  EXPECT_NEAR(sum_abs(g.certificate), 1.0, 1e-9);
}

TEST(GammaExact, IdenticalRowsGiveZero) {
  Rng rng = stream(1, 1);
  Matrix m = random_channel(rng, 4, 3);
  for (int y = 0; y < 3; ++y) m(3, y) = m(1, y);
  const GammaResult g = gamma_exact(m);
  EXPECT_NEAR(g.gamma, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(g.certificate[1]) + std::abs(g.certificate[3]), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(g.certificate[0]) + std::abs(g.certificate[2]), 0.0, 1e-9);
}

TEST(GammaExact, MatchesHexagonBreakpointsOnThreeStates) {
  Rng rng = stream(2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const int O = 2 + uniform_index(rng, 5);
    const Matrix m = random_channel(rng, 3, O, trial % 2 ? 0.3 : 1.0);
    EXPECT_NEAR(gamma_exact(m).gamma, oracle::gamma_hexagon_3(m), 1e-9) << trial;
  }
}

TEST(GammaExact, TwoStateClosedForm) {
  Rng rng = stream(3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_channel(rng, 2, 4);
    double d = 0.0;
    for (int y = 0; y < 4; ++y) d += std::abs(m(0, y) - m(1, y));
    EXPECT_NEAR(gamma_exact(m).gamma, 0.5 * d, 1e-12);
  }
  EXPECT_NEAR(gamma_exact(gen_contraction_lb(0.1, 3).emissions[0]).gamma, 0.2, 1e-12);
}

TEST(GammaExact, CertificateRecomputes) {
  Rng rng = stream(4, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const int S = 2 + uniform_index(rng, 5), O = 2 + uniform_index(rng, 5);
    const Matrix m = random_channel(rng, S, O);
    const GammaResult g = gamma_exact(m);
    EXPECT_NEAR(std::accumulate(g.certificate.begin(), g.certificate.end(), 0.0), 0.0, 1e-12);
    EXPECT_NEAR(sum_abs(g.certificate), 1.0, 1e-9);
    EXPECT_NEAR(contraction_ratio(m, g.certificate), g.gamma, 1e-9);
    EXPECT_GE(g.gamma, 0.0);
    EXPECT_LE(g.gamma, 1.0 + 1e-12);
  }
}

TEST(GammaExact, PermutationInvariant) {
  Rng rng = stream(5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 3 + uniform_index(rng, 3), O = 3 + uniform_index(rng, 3);
    const Matrix m = random_channel(rng, S, O);
    std::vector<int> rp(S), cp(O);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(cp.begin(), cp.end(), rng);
    Matrix p(S, O);
    for (int x = 0; x < S; ++x)
      for (int y = 0; y < O; ++y) p(x, y) = m(rp[x], cp[y]);
    const GammaResult a = gamma_exact(m), b = gamma_exact(p);
    EXPECT_NEAR(a.gamma, b.gamma, 1e-9);
    std::vector<double> moved(S);
    for (int x = 0; x < S; ++x) moved[x] = b.certificate[x];
    std::vector<double> back(S);
    for (int x = 0; x < S; ++x) back[rp[x]] = moved[x];
    EXPECT_NEAR(contraction_ratio(m, back), a.gamma, 1e-9);
  }
}

TEST(GammaExact, ThreadCountBitExact) {
  Rng rng = stream(6, 6);
  const Matrix m = random_channel(rng, 9, 5);
  const GammaResult a = gamma_exact(m, 1), b = gamma_exact(m, 4);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.certificate, b.certificate);
}

TEST(GammaExact, LimitsAndDegenerateSizes) {
  EXPECT_THROW(gamma_exact(identity_mix_channel(15, 0.5)), DimensionTooLarge);
  EXPECT_EQ(gamma_exact(Matrix(1, 3, 1.0 / 3)).gamma, 1.0);
}

TEST(GammaMc, UpperBoundsExact) {
  Rng rng = stream(7, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const int S = 2 + uniform_index(rng, 7), O = 2 + uniform_index(rng, 6);
    const Matrix m = random_channel(rng, S, O, trial % 3 == 0 ? 0.3 : 1.0);
    const double exact = gamma_exact(m).gamma;
    const GammaResult mc = gamma_mc_upper(m, 200, static_cast<std::uint64_t>(trial));
    EXPECT_GE(mc.gamma, exact - 1e-12) << trial;
    EXPECT_NEAR(contraction_ratio(m, mc.certificate), mc.gamma, 1e-12);
  }
}

TEST(GammaMc, KnownChannels) {
  Rng rng = stream(8, 8);
  Matrix m = random_channel(rng, 5, 4);
  for (int y = 0; y < 4; ++y) m(2, y) = m(0, y);
  EXPECT_NEAR(gamma_mc_upper(m, 10, 1).gamma, 0.0, 1e-15);
  EXPECT_NEAR(gamma_mc_upper(identity_mix_channel(6, 0.5), 10, 1).gamma, 0.5, 1e-12);
  const GammaResult a = gamma_mc_upper(m, 500, 3), b = gamma_mc_upper(m, 500, 3);
  EXPECT_EQ(a.gamma, b.gamma);
}

TEST(GammaWeak, Values) {
  EXPECT_EQ(gamma_weak(Matrix::identity(4)).gamma, 2.0);
  Matrix same(3, 2, 0.5);
  EXPECT_EQ(gamma_weak(same).gamma, 0.0);
  EXPECT_THROW(gamma_weak(Matrix(1, 2, 0.5)), InvalidArgument);
}

TEST(Report, RandomObservableHasClosedFormGamma) {
  for (double g : {0.2, 0.5, 1.0}) {
    const Pomdp m = gen_random_observable(4, 2, 5, g, 3);
    const ObservabilityReport r = observability_report(m);
    EXPECT_NEAR(r.pomdp_gamma, g, 1e-9);
    EXPECT_EQ(r.method, GammaMethod::ExactLp);
    ASSERT_EQ(r.steps.size(), 4u);
    EXPECT_EQ(r.steps[0].step, 2);
    for (const auto& st : r.steps) EXPECT_NEAR(st.gamma, (*closed_form_gammas(m))[st.step - 2], 1e-9);
  }
}

TEST(Report, McIsTaggedUpperBound) {
  const Pomdp m = gen_random_observable(4, 2, 4, 0.3, 3);
  ObservabilityOptions opt;
  opt.monte_carlo = true;
  const ObservabilityReport r = observability_report(m, opt);
  EXPECT_TRUE(r.is_upper_bound());
  EXPECT_GE(r.pomdp_gamma, 0.3 - 1e-12);
  for (const auto& st : r.steps) EXPECT_EQ(st.method, GammaMethod::McUpper);
}

TEST(Report, LargeModelsNeedClosedFormOrMc) {
  const Pomdp m = gen_random_observable(16, 1, 3, 0.4, 1);
  const ObservabilityReport r = observability_report(m);
  EXPECT_EQ(r.method, GammaMethod::ClosedForm);
  EXPECT_NEAR(r.pomdp_gamma, 0.4, 1e-12);
  Pomdp bare = m;
  bare.metadata = Json::object();
  EXPECT_THROW(observability_report(bare), DimensionTooLarge);
}
