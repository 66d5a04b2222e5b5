#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "obsplan/gen.hpp"
#include "obsplan/model.hpp"
#include "support/oracles.hpp"

using namespace obsplan;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("obsplan_test_" + name)).string();
}

bool has_location(const std::vector<Violation>& v, const std::string& loc) {
  for (const auto& x : v)
    if (x.location == loc) return true;
  return false;
}

}  // namespace

TEST(Validate, GeneratedModelsAreValid) {
  EXPECT_TRUE(validate(gen_contraction_lb(0.1, 10)).empty());
  EXPECT_TRUE(validate(gen_random_observable(3, 2, 5, 0.5, 7)).empty());
  for (const auto& name : example_names()) EXPECT_TRUE(validate(gen_example(name)).empty()) << name;
}

TEST(Validate, TransitionRowOffByTenthIsOneViolation) {
  Pomdp m = gen_random_observable(3, 2, 4, 0.5, 1);
  m.transitions[0][0](0, 0) -= 0.1;
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].location, "transitions h=1 a=0 x=0");
}

TEST(Validate, RewardOutOfRange) {
  Pomdp m = gen_random_observable(2, 1, 3, 0.5, 1);
  m.rewards[0][1] = 1.5;
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].location, "rewards h=2 o=1");
}

TEST(Validate, ReportsEveryViolation) {
  Pomdp m = gen_random_observable(2, 2, 3, 0.5, 3);
  m.initial_belief[0] = -0.5;
  m.emissions[1](1, 0) += 0.2;
  m.transitions[1][1](0, 1) = std::nan("");
  const auto v = validate(m);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_TRUE(has_location(v, "initial_belief"));
  EXPECT_TRUE(has_location(v, "emissions h=3 x=1"));
  EXPECT_TRUE(has_location(v, "transitions h=2 a=1 x=0"));
}

TEST(Validate, WrongShapes) {
  Pomdp m = gen_random_observable(2, 2, 3, 0.5, 3);
  m.emissions[0] = Matrix(2, 3);
  m.rewards.pop_back();
  const auto v = validate(m);
  EXPECT_TRUE(has_location(v, "emissions h=2"));
  EXPECT_TRUE(has_location(v, "rewards"));
  EXPECT_THROW(require_valid(m), ValidationError);
}

TEST(Validate, ToleranceBoundary) {
  Pomdp m = gen_contraction_lb(0.1, 3);
  m.emissions[0](0, 0) += 5e-10;
  EXPECT_TRUE(validate(m).empty());
  m.emissions[0](0, 0) += 1e-9;
  EXPECT_EQ(validate(m).size(), 1u);
}

TEST(ModelIo, RoundTripIsExact) {
  for (const auto& name : example_names()) {
    const Pomdp m = gen_example(name);
    const std::string path = temp_path("roundtrip.json");
    save(m, path);
    const Pomdp back = load(path);
    EXPECT_EQ(back.horizon, m.horizon);
    EXPECT_EQ(back.initial_belief, m.initial_belief) << name;
    EXPECT_EQ(back.transitions.size(), m.transitions.size());
    for (std::size_t i = 0; i < m.transitions.size(); ++i)
      for (std::size_t a = 0; a < m.transitions[i].size(); ++a) EXPECT_TRUE(back.transitions[i][a] == m.transitions[i][a]);
    for (std::size_t i = 0; i < m.emissions.size(); ++i) EXPECT_TRUE(back.emissions[i] == m.emissions[i]) << name;
    EXPECT_EQ(back.rewards, m.rewards);
    EXPECT_EQ(back.metadata, m.metadata);
    std::remove(path.c_str());
  }
}

TEST(ModelIo, RoundTripRandomModelsBitExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Pomdp m = oracle::random_pomdp(3, 2, 4, 4, seed);
    const Pomdp back = pomdp_from_json(Json::parse(to_json(m).dump()));
    EXPECT_EQ(to_json(back), to_json(m)) << seed;
  }
}

TEST(ModelIo, TruncatedFileIsParseError) {
  const std::string path = temp_path("truncated.json");
  const std::string text = to_json(gen_example("divergence-increase")).dump();
  std::ofstream(path) << text.substr(0, text.size() / 2);
  EXPECT_THROW(load(path), ParseError);
  std::remove(path.c_str());
}

TEST(ModelIo, MissingFileIsParseError) { EXPECT_THROW(load("/nonexistent/dir/model.json"), ParseError); }

TEST(ModelIo, EmissionWithTooFewColumnsNamesPath) {
  Json j = to_json(gen_random_observable(3, 1, 3, 0.5, 2));
  j["emissions"][1][2].erase(0);
  try {
    pomdp_from_json(j);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("emissions[1][2]"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, StateRewardsRejected) {
  Json j = to_json(gen_example("divergence-increase"));
  j["state_rewards"] = Json::array({Json::array({0.0, 1.0})});
  EXPECT_THROW(pomdp_from_json(j), ParseError);
  Json k = to_json(gen_example("divergence-increase"));
  k["rewards"] = Json::array({Json::array({Json::array({0.0, 1.0})})});
  EXPECT_ANY_THROW(pomdp_from_json(k));
}

TEST(ModelIo, NearStochasticRowsRenormalized) {
  Json j = to_json(gen_contraction_lb(0.1, 3));
  j["emissions"][0][0] = Json::array({0.6 + 4e-10, 0.4});
  const Pomdp m = pomdp_from_json(j);
  EXPECT_NEAR(m.emissions[0](0, 0) + m.emissions[0](0, 1), 1.0, 1e-15);
  j["emissions"][0][0] = Json::array({0.6 + 4e-9, 0.4});
  EXPECT_THROW(pomdp_from_json(j), ValidationError);
}

TEST(ModelIo, StepAccessorsUseOneBasedSteps) {
  Pomdp m = gen_random_observable(2, 2, 4, 0.5, 9);
  EXPECT_EQ(&m.transition(1, 1), &m.transitions[0][1]);
  EXPECT_EQ(&m.emission(2), &m.emissions[0]);
  EXPECT_EQ(&m.reward(4), &m.rewards[2]);
}

TEST(HistoryWindowTest, WindowOfTakesSuffix) {
  History h{{0, 1, 1}, {2, 0, 1}};
  const HistoryWindow w = window_of(h, 2);
  EXPECT_EQ(w.stage, 4);
  EXPECT_EQ(w.actions, (std::vector<int>{1, 1}));
  EXPECT_EQ(w.observations, (std::vector<int>{0, 1}));
  EXPECT_EQ(window_of(h, 10).length(), 3);
}
