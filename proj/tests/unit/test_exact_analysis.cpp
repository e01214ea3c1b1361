#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gattaca/dynamics.hpp"
#include "gattaca/errors.hpp"
#include "gattaca/exact_analysis.hpp"
#include "support/fixtures.hpp"
#include "support/random_networks.hpp"

namespace gattaca {
namespace {

NetworkState bits(const char* b) { return NetworkState::from_bits(b); }

std::vector<NetworkState> states_of(const ExplicitStg& stg, const std::vector<std::uint32_t>& idx) {
  std::vector<NetworkState> out;
  for (const auto i : idx) out.push_back(stg.state_at(i));
  std::sort(out.begin(), out.end());
  return out;
}

class ThreeNodeStg : public ::testing::Test {
 protected:
  BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  ExplicitStg stg = build_stg(net, {});
  std::vector<Attractor> attractors = attractors_exact(stg);
  BasinAnalysis basins{stg, attractors};

  std::size_t attractor_containing(const char* b) const {
    const std::uint32_t idx = *stg.index_of(bits(b));
    return static_cast<std::size_t>(basins.attractor_of(idx));
  }
};

TEST_F(ThreeNodeStg, StateSpace) {
  EXPECT_EQ(stg.state_count(), 8u);
  PartialAssignment env;
  env.pin(0, true);
  EXPECT_EQ(build_stg(net, env).state_count(), 4u);
  EXPECT_EQ(build_stg(parse_bnet("targets, factors\na, !a\n"), {}).state_count(), 2u);
}

TEST_F(ThreeNodeStg, FourFixedPoints) {
  ASSERT_EQ(attractors.size(), 4u);
  std::vector<NetworkState> found;
  for (const auto& a : attractors) {
    ASSERT_TRUE(a.is_fixed_point());
    found.push_back(stg.state_at(a.states[0]));
  }
  std::sort(found.begin(), found.end());
  EXPECT_EQ(found, (std::vector<NetworkState>{bits("000"), bits("011"), bits("110"), bits("111")}));
}

TEST(Attractors, SmallCases) {
  const ExplicitStg neg = build_stg(parse_bnet("targets, factors\na, !a\n"), {});
  const auto a = attractors_exact(neg);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].states.size(), 2u);
  EXPECT_EQ(attractors_exact(build_stg(parse_bnet("targets, factors\na, 1\nb, 0\n"), {})).size(), 1u);
}

TEST(Attractors, RefusesTooManyFreeNodes) {
  std::string text = "targets, factors\n";
  for (int i = 0; i < 30; ++i) text += "v" + std::to_string(i) + ", !v" + std::to_string(i) + "\n";
  EXPECT_THROW(build_stg(parse_bnet(text), {}), CapacityError);
}

TEST_F(ThreeNodeStg, StrongBasinOfZero) {
  const std::size_t zero = attractor_containing("000");
  EXPECT_EQ(states_of(stg, basins.strong_basin(zero)), (std::vector<NetworkState>{bits("000"), bits("010")}));
  EXPECT_EQ(states_of(stg, strong_basin(stg, attractors, zero)), states_of(stg, basins.strong_basin(zero)));
  // 001 reaches both 000 and 011
  EXPECT_EQ(basins.strong_owner(*stg.index_of(bits("001"))), -1);
}

TEST_F(ThreeNodeStg, BasinsPartitionAndCover) {
  std::vector<int> owners(stg.state_count(), 0);
  std::vector<int> weak(stg.state_count(), 0);
  for (std::size_t a = 0; a < attractors.size(); ++a) {
    for (const auto s : basins.strong_basin(a)) ++owners[s];
    for (const auto s : basins.weak_basin(a)) ++weak[s];
    for (const auto s : attractors[a].states) EXPECT_TRUE(basins.in_weak_basin(s, a));
  }
  for (std::size_t s = 0; s < stg.state_count(); ++s) {
    EXPECT_LE(owners[s], 1);
    EXPECT_GE(weak[s], 1);
  }
}

TEST_F(ThreeNodeStg, OracleLengths) {
  PartialAssignment target;
  target.pin(1, false);
  const OracleResult from_011 = min_control_oracle(stg, attractors, basins, attractor_containing("011"), target, 5);
  ASSERT_TRUE(from_011.length.has_value());
  EXPECT_EQ(*from_011.length, 1u);
  ASSERT_EQ(from_011.strategy.size(), 1u);
  EXPECT_EQ(from_011.strategy[0].flips, (std::vector<std::size_t>{2}));

  const OracleResult from_111 = min_control_oracle(stg, attractors, basins, attractor_containing("111"), target, 5);
  EXPECT_EQ(from_111.length, std::optional<std::size_t>(1));

  const OracleResult aligned = min_control_oracle(stg, attractors, basins, attractor_containing("000"), target, 5);
  EXPECT_EQ(aligned.length, std::optional<std::size_t>(0));
  EXPECT_TRUE(aligned.strategy.empty());

  EXPECT_TRUE(is_target_attractor(stg, attractors[attractor_containing("000")], target));
  EXPECT_FALSE(is_target_attractor(stg, attractors[attractor_containing("110")], target));
}

TEST(Stationary, SmallCases) {
  const std::vector<ChainTransition> single{{0, 0, 1.0}};
  const auto fp = solve_stationary(1, single);
  ASSERT_EQ(fp.probability.size(), 1u);
  EXPECT_DOUBLE_EQ(fp.probability[0], 1.0);

  const ExplicitStg neg = build_stg(parse_bnet("targets, factors\na, !a\n"), {});
  const auto d = stationary_distribution(neg, attractors_exact(neg)[0]);
  EXPECT_NEAR(d.probability[0], 0.5, 1e-12);
  EXPECT_NEAR(d.probability[1], 0.5, 1e-12);
  EXPECT_EQ(pseudo_attractor_exact(d).size(), 2u);
}

TEST(Stationary, ThresholdSelection) {
  const StationaryDistribution d{{0, 1, 2}, {0.5, 0.3, 0.2}};
  EXPECT_EQ(pseudo_attractor_exact(d), (std::vector<std::uint32_t>{0}));
  const StationaryDistribution u{{0, 1, 2}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  EXPECT_EQ(pseudo_attractor_exact(u).size(), 3u);
  EXPECT_EQ(states_above(d, 0.3), (std::vector<std::uint32_t>{0, 1}));
}

// Three-state birth-death chain with a closed-form distribution.
TEST(Stationary, BirthDeathChain) {
  const std::vector<ChainTransition> t{{0, 1, 0.5}, {0, 0, 0.5}, {1, 0, 0.25}, {1, 2, 0.25},
                                       {1, 1, 0.5}, {2, 1, 0.5}, {2, 2, 0.5}};
  const auto d = solve_stationary(3, t);
  EXPECT_NEAR(d.probability[0], 0.25, 1e-12);
  EXPECT_NEAR(d.probability[1], 0.5, 1e-12);
  EXPECT_NEAR(d.probability[2], 0.25, 1e-12);
}

TEST(Stationary, PowerIterationAgreesWithDirectSolve) {
  const std::size_t size = 5000;
  const auto chain = testing::random_chain(size, 4, 17);
  const auto d = solve_stationary(size, chain);
  ASSERT_EQ(d.probability.size(), size);
  EXPECT_NEAR(std::accumulate(d.probability.begin(), d.probability.end(), 0.0), 1.0, 1e-9);
  // residual of pi P = pi
  std::vector<double> next(size, 0.0);
  for (const auto& e : chain) next[e.to] += d.probability[e.from] * e.probability;
  double residual = 0.0;
  for (std::size_t i = 0; i < size; ++i) residual += std::abs(next[i] - d.probability[i]);
  EXPECT_LT(residual, 1e-9);
}

TEST(Acpl, Arithmetic) {
  AcplInputs single;
  single.conditions.push_back({"c", {"a", "b"}, {"t"}});
  single.cpl[{"a", "t"}] = 1;
  single.cpl[{"b", "t"}] = 1;
  EXPECT_DOUBLE_EQ(acpl_reference(single).mean, 1.0);

  AcplInputs two;
  two.conditions.push_back({"c1", {"a"}, {"t1"}});
  two.conditions.push_back({"c2", {"b"}, {"t2"}});
  two.cpl[{"a", "t1"}] = 1;
  two.cpl[{"b", "t2"}] = 2;
  EXPECT_DOUBLE_EQ(acpl_reference(two).mean, 1.5);

  // c2 has no target: one switch plus the best route from the other condition
  AcplInputs cross;
  cross.conditions.push_back({"c1", {"a"}, {"t1"}});
  cross.conditions.push_back({"c2", {"b"}, {}});
  cross.cpl[{"a", "t1"}] = 2;
  cross.cpl[{"b", "t1"}] = 0;
  const AcplResult r = acpl_reference(cross);
  ASSERT_EQ(r.condition_means.size(), 2u);
  EXPECT_DOUBLE_EQ(r.condition_means[1], 1.0);
  EXPECT_DOUBLE_EQ(r.mean, 1.5);

  AcplInputs none;
  none.conditions.push_back({"c", {"a"}, {}});
  EXPECT_THROW(acpl_reference(none), ConfigError);
}

TEST(ControlReference, ThreeNodeTarget) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  PartialAssignment target;
  target.pin(1, false);
  const ControlReference ref = control_reference(net, {}, target, 5);
  ASSERT_EQ(ref.sources.size(), 3u);
  for (const auto& s : ref.sources) EXPECT_EQ(s.length, std::optional<double>(1.0));
  EXPECT_DOUBLE_EQ(ref.acpl.mean, 1.0);
}

TEST(ControlReference, ConditionSwitch) {
  const BooleanNetwork net = parse_bnet(testing::kSwitchModel);
  const PartialAssignment target = parse_assignment(net, "x5=1");
  const ControlReference joint = control_reference(net, {}, target, 5);
  EXPECT_DOUBLE_EQ(joint.acpl.mean, 1.0);
  const ControlReference split = control_reference(net, {}, target, 5, kDefaultMaxFreeNodes, true);
  EXPECT_DOUBLE_EQ(split.acpl.mean, 1.0);
  bool any_switch = false;
  for (const auto& s : split.sources) any_switch = any_switch || s.switched;
  EXPECT_TRUE(any_switch);
}

TEST(ControlReference, NoTargetAnywhere) {
  const BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
  PartialAssignment env;
  env.pin(0, true);
  PartialAssignment target;
  target.pin(1, false);
  EXPECT_THROW(control_reference(net, env, target, 5), EmptyResultError);
}

// Attractors are exactly the states whose forward closure is their own attractor.
TEST(Attractors, MatchReachFixpoints) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const BooleanNetwork net = testing::random_network(8, 0, 3, seed);
    const ExplicitStg stg = build_stg(net, {});
    const auto attractors = attractors_exact(stg);
    std::vector<int> member(stg.state_count(), -1);
    for (std::size_t a = 0; a < attractors.size(); ++a) {
      for (const auto s : attractors[a].states) member[s] = static_cast<int>(a);
    }
    for (std::uint32_t s = 0; s < stg.state_count(); ++s) {
      const auto reach = reach_set(net, stg.state_at(s));
      bool closed = true;
      for (const auto& t : reach) {
        const auto back = reach_set(net, t);
        if (!back.count(stg.state_at(s))) {
          closed = false;
          break;
        }
      }
      ASSERT_EQ(closed, member[s] >= 0) << "seed " << seed << " state " << s;
      if (closed) ASSERT_EQ(reach.size(), attractors[static_cast<std::size_t>(member[s])].states.size());
    }
  }
}

TEST(Oracle, MonotoneInFlipBudget) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const BooleanNetwork net = testing::random_network(7, 0, 3, seed);
    const ExplicitStg stg = build_stg(net, {});
    const auto attractors = attractors_exact(stg);
    const BasinAnalysis basins(stg, attractors);
    PartialAssignment target;
    target.pin(6, true);
    for (std::size_t a = 0; a < attractors.size(); ++a) {
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t flips = 1; flips <= 5; ++flips) {
        const auto r = min_control_oracle(stg, attractors, basins, a, target, flips);
        const double len = r.length ? static_cast<double>(*r.length) : std::numeric_limits<double>::infinity();
        ASSERT_LE(len, previous);
        previous = len;
      }
    }
  }
}

}  // namespace
}  // namespace gattaca
