#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "gattaca/errors.hpp"
#include "gattaca/evaluation.hpp"
#include "support/fixtures.hpp"
#include "support/gradient_check.hpp"

namespace gattaca {
namespace {

NetworkState bits(const char* b) { return NetworkState::from_bits(b); }

struct Fixture {
  BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  PartialAssignment target = parse_assignment(net, "x2=0");
  PAStateRegistry registry = [] {
    PAStateRegistry r;
    for (const char* s : {"000", "011", "110", "111"}) r.add(NetworkState::from_bits(s), Provenance::kI1, 1.0, 0);
    return r;
  }();
  ControlEnvironment env{net, {}, target, registry};
  BdqNetwork agent{network_dims(env, testing::tiny_dims(0, 0, 0)), structure_graph(net).edges, 1};
};

void zero_all(BdqNetwork& net) {
  for (Param* p : net.parameters()) p->value.setZero();
}

// Makes the greedy policy flip perturbable node `choice - 1` in branch 0.
void prefer(BdqNetwork& net, std::uint32_t choice) {
  zero_all(net);
  net.branch_heads()[0].layers().back().bias.value(0, choice) = 1.0;
}

TEST(Recovery, ZeroAgentStallsUntilCap) {
  Fixture s;
  zero_all(s.agent);
  RngStream rng(1, "recover");
  const RecoveryOutcome o = recover_strategy(s.agent, s.env, bits("011"), rng);
  EXPECT_FALSE(o.success);
  EXPECT_EQ(o.length, 100u);
  for (const auto& flips : o.strategy) EXPECT_TRUE(flips.empty());
}

TEST(Recovery, OneFlipStrategy) {
  Fixture s;
  // perturbable nodes are x1 and x3; choice 2 flips x3
  prefer(s.agent, 2);
  RngStream rng(2, "recover");
  const RecoveryOutcome o = recover_strategy(s.agent, s.env, bits("011"), rng);
  EXPECT_TRUE(o.success);
  EXPECT_EQ(o.length, 1u);
  EXPECT_EQ(o.strategy[0], (std::vector<std::size_t>{2}));
  EXPECT_EQ(o.visited.back(), bits("000"));
  EXPECT_THROW(recover_strategy(s.agent, s.env, bits("000"), rng), ConfigError);
}

TEST(Evaluate, DeterministicEnvironmentRepeatsExactly) {
  Fixture s;
  prefer(s.agent, 2);
  const EvaluationReport r = evaluate(s.agent, s.env, {bits("011")}, kDefaultRepeats, RngStream(3, "evaluate"));
  ASSERT_EQ(r.records.size(), 10u);
  for (const auto& rec : r.records) {
    EXPECT_TRUE(rec.success);
    EXPECT_EQ(rec.length, 1u);
  }
  EXPECT_DOUBLE_EQ(r.overall_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.success_rate, 1.0);
  EXPECT_THROW(evaluate(s.agent, s.env, {}, 10, RngStream(3, "evaluate")), ConfigError);
}

TEST(Evaluate, FailuresAreExcludedFromMeans) {
  Fixture s;
  prefer(s.agent, 2);
  // from 110 flipping x3 lands in 111, which flipping x3 again returns to 110
  const EvaluationReport r = evaluate(s.agent, s.env, {bits("011"), bits("110")}, 3, RngStream(4, "evaluate"));
  ASSERT_EQ(r.sources.size(), 2u);
  EXPECT_DOUBLE_EQ(r.sources[0].mean_length, 1.0);
  EXPECT_TRUE(std::isnan(r.sources[1].mean_length));
  EXPECT_DOUBLE_EQ(r.overall_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.success_rate, 0.5);
  EXPECT_EQ(r.sources_without_success, 1u);

  const auto json = nlohmann::json::parse(report_json(r));
  EXPECT_TRUE(json["sources"][1]["mean_length"].is_null());
}

TEST(Evaluate, OverallMeanIsUnweighted) {
  EvaluationReport r;
  SourceSummary a;
  a.source = bits("011");
  a.repeats = 10;
  a.successes = 10;
  a.mean_length = 3.0;
  r.sources.push_back(a);
  SourceSummary b = a;
  b.source = bits("110");
  b.mean_length = 1.0;
  r.sources.push_back(b);

  const std::map<NetworkState, double> oracle{{bits("011"), 1.0}, {bits("110"), 1.0}};
  const GapReport g = compare_to_oracle(r, oracle);
  EXPECT_EQ(g.compared, 2u);
  EXPECT_EQ(g.flagged, 1u);
  EXPECT_EQ(g.max_gap, std::optional<double>(2.0));
  EXPECT_TRUE(r.sources[0].flagged);
  EXPECT_FALSE(r.sources[1].flagged);
  EXPECT_EQ(r.sources[1].gap, std::optional<double>(0.0));
}

TEST(Report, CsvLayout) {
  EvaluationReport r;
  r.model = "three";
  r.condition = "x1=0";
  r.records.push_back({bits("011"), 0, true, 1});
  r.records.push_back({bits("011"), 1, false, 100});
  EXPECT_EQ(report_csv(r), "model,condition,source_hex,repeat,success,length\nthree,x1=0,3,0,1,1\nthree,x1=0,3,1,0,100\n");
}

}  // namespace
}  // namespace gattaca
