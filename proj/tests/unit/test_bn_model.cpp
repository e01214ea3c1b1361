#include <gtest/gtest.h>

#include <algorithm>

#include "gattaca/bn_model.hpp"
#include "gattaca/errors.hpp"
#include "gattaca/rng.hpp"
#include "support/fixtures.hpp"
#include "support/random_networks.hpp"

namespace gattaca {
namespace {

TEST(ParseBnet, ThreeNodeExample) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  ASSERT_EQ(net.size(), 3u);
  EXPECT_EQ(net.name(0), "x1");
  EXPECT_EQ(net.parents(0), (std::vector<std::size_t>{0}));
  EXPECT_EQ(net.parents(1), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(net.parents(2), (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(net.is_input(0));
  EXPECT_FALSE(net.is_input(1));
  EXPECT_EQ(net.input_nodes(), (std::vector<std::size_t>{0}));
}

TEST(ParseBnet, ConstantNode) {
  const BooleanNetwork net = parse_bnet("targets, factors\na, 1\n");
  ASSERT_EQ(net.size(), 1u);
  EXPECT_TRUE(net.parents(0).empty());
  EXPECT_TRUE(net.predictor(0).is_constant());
}

TEST(ParseBnet, ContradictionHasNoParents) {
  const BooleanNetwork net = parse_bnet("targets, factors\na, a & !a\n");
  EXPECT_TRUE(net.parents(0).empty());
  EXPECT_FALSE(net.update_value(0, NetworkState::from_bits("1")));
}

TEST(ParseBnet, UndeclaredVariablesBecomeInputs) {
  const BooleanNetwork net = parse_bnet("targets, factors\na, b & !c\n");
  ASSERT_EQ(net.size(), 3u);
  EXPECT_EQ(net.name(1), "b");
  EXPECT_EQ(net.name(2), "c");
  EXPECT_TRUE(net.is_input(1));
  EXPECT_TRUE(net.is_input(2));
  EXPECT_EQ(net.parents(1), (std::vector<std::size_t>{1}));
}

TEST(ParseBnet, ErrorsCarryPosition) {
  try {
    parse_bnet("targets, factors\na, b &\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GE(e.column(), 6u);
  }
  EXPECT_THROW(parse_bnet(""), ParseError);
  EXPECT_THROW(parse_bnet("targets, factors\na, 1\na, 0\n"), ParseError);
  EXPECT_THROW(parse_bnet("targets, factors\na, (b | c\n"), ParseError);
  EXPECT_THROW(parse_bnet("targets, factors\na b\n"), ParseError);
}

TEST(EvalExpr, Examples) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  EXPECT_TRUE(eval_expr(net.predictor(1), NetworkState::from_bits("001")));
  EXPECT_FALSE(eval_expr(net.predictor(2), NetworkState::from_bits("110")));
  EXPECT_FALSE(eval_expr(BooleanExpr::constant(false), NetworkState::from_bits("111")));
}

TEST(EssentialInputs, Examples) {
  const auto x = [](std::size_t i) { return BooleanExpr::variable(i); };
  EXPECT_EQ(essential_inputs(BooleanExpr::disjunction(x(1), x(3)), 4), (std::vector<std::size_t>{1, 3}));
  EXPECT_TRUE(essential_inputs(BooleanExpr::conjunction(x(2), BooleanExpr::negate(x(2))), 4).empty());
  const BooleanExpr redundant = BooleanExpr::disjunction(BooleanExpr::conjunction(x(1), x(2)),
                                                         BooleanExpr::conjunction(x(1), BooleanExpr::negate(x(2))));
  EXPECT_EQ(essential_inputs(redundant, 4), (std::vector<std::size_t>{1}));
  EXPECT_EQ(essential_inputs_sampled(redundant, 4), (std::vector<std::size_t>{1}));
}

TEST(EssentialInputs, RefusesWideExpressions) {
  BooleanExpr e = BooleanExpr::variable(0);
  for (std::size_t i = 1; i <= kMaxExactVariables; ++i) e = BooleanExpr::disjunction(e, BooleanExpr::variable(i));
  EXPECT_THROW(essential_inputs(e, kMaxExactVariables + 1), ConfigError);
}

TEST(StructureGraph, Examples) {
  const StructureGraph g = structure_graph(parse_bnet(testing::kThreeNodeModel));
  const std::vector<StructureGraph::Edge> expected{{0, 0}, {0, 1}, {2, 1}, {1, 2}, {2, 2}};
  EXPECT_EQ(g.edges, expected);
  EXPECT_TRUE(structure_graph(parse_bnet("targets, factors\na, 1\n")).edges.empty());
  EXPECT_EQ(structure_graph(parse_bnet("targets, factors\na, b\nb, c\nc, 0\n")).edges.size(), 2u);
}

TEST(Restrict, PinsInputsOnly) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  PartialAssignment env;
  env.pin(0, false);
  const BooleanNetwork r = restrict_network(net, env);
  EXPECT_TRUE(r.predictor(0).is_constant());
  EXPECT_FALSE(r.update_value(0, NetworkState::from_bits("111")));
  EXPECT_EQ(restrict_network(net, {}).to_bnet(), net.to_bnet());

  PartialAssignment bad;
  bad.pin(1, true);
  EXPECT_THROW(restrict_network(net, bad), ConfigError);
}

TEST(Assignment, ParseAndAlign) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  const PartialAssignment a = parse_assignment(net, "x1=0, x3=1");
  EXPECT_EQ(a.size(), 2u);
  EXPECT_TRUE(a.aligns(NetworkState::from_bits("011")));
  EXPECT_FALSE(a.aligns(NetworkState::from_bits("110")));
  EXPECT_EQ(format_assignment(net, a), "x1=0,x3=1");
  EXPECT_TRUE(parse_assignment(net, "").empty());
  EXPECT_THROW(parse_assignment(net, "x9=1"), ConfigError);
  EXPECT_THROW(parse_assignment(net, "x1=2"), ConfigError);
}

// Truth tables survive a round trip through the text format.
TEST(ParseBnet, RoundTripPreservesSemantics) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const BooleanNetwork net = testing::random_network(7, 2, 3, seed);
    const BooleanNetwork back = parse_bnet(net.to_bnet());
    ASSERT_EQ(back.size(), net.size());
    for (std::uint32_t v = 0; v < 128; ++v) {
      NetworkState s(7);
      for (std::size_t i = 0; i < 7; ++i) s.set(i, ((v >> i) & 1U) != 0);
      for (std::size_t i = 0; i < 7; ++i) ASSERT_EQ(back.update_value(i, s), net.update_value(i, s));
    }
    EXPECT_EQ(back.model_hash(), net.model_hash());
  }
}

// Flipping a non-essential variable never changes the predictor.
TEST(EssentialInputs, NonEssentialFlipsAreInvisible) {
  RngStream rng(3, "essential");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const BooleanNetwork net = testing::random_network(8, 1, 4, seed);
    for (std::size_t i = 0; i < net.size(); ++i) {
      const auto& pa = net.parents(i);
      for (int trial = 0; trial < 50; ++trial) {
        NetworkState s(8);
        for (std::size_t j = 0; j < 8; ++j) s.set(j, rng.bernoulli(0.5));
        const bool base = net.update_value(i, s);
        for (std::size_t j = 0; j < 8; ++j) {
          if (std::find(pa.begin(), pa.end(), j) != pa.end()) continue;
          NetworkState t = s;
          t.flip(j);
          ASSERT_EQ(net.update_value(i, t), base);
        }
      }
    }
  }
}

}  // namespace
}  // namespace gattaca
