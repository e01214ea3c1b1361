#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "gattaca/dynamics.hpp"
#include "gattaca/errors.hpp"
#include "support/fixtures.hpp"
#include "support/random_networks.hpp"

namespace gattaca {
namespace {

NetworkState bits(const char* b) { return NetworkState::from_bits(b); }

class ThreeNode : public ::testing::Test {
 protected:
  BooleanNetwork net = parse_bnet(testing::kThreeNodeModel);
};

TEST_F(ThreeNode, Successors) {
  EXPECT_EQ(async_successors(net, bits("001")), (std::vector<NetworkState>{bits("000"), bits("001"), bits("011")}));
  EXPECT_EQ(async_successors(net, bits("000")), (std::vector<NetworkState>{bits("000")}));
  const BooleanNetwork neg = parse_bnet("targets, factors\na, !a\n");
  EXPECT_EQ(async_successors(neg, bits("0")), (std::vector<NetworkState>{bits("1")}));
}

TEST_F(ThreeNode, StepFromOneZeroZero) {
  RngStream rng(1, "step");
  std::size_t moved = 0;
  for (int i = 0; i < 3000; ++i) {
    const NetworkState next = async_step(net, bits("100"), rng);
    if (next == bits("110")) {
      ++moved;
    } else {
      ASSERT_EQ(next, bits("100"));
    }
  }
  // one node in three moves the state
  EXPECT_NEAR(static_cast<double>(moved) / 3000.0, 1.0 / 3.0, 0.04);
}

TEST_F(ThreeNode, FixedPointNeverMoves) {
  RngStream rng(2, "fp");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(async_step(net, bits("011"), rng), bits("011"));
}

TEST_F(ThreeNode, SeededStepsRepeat) {
  RngStream a(9, "s");
  RngStream b(9, "s");
  const Trajectory ta = simulate(net, bits("101"), 200, a, true);
  const Trajectory tb = simulate(net, bits("101"), 200, b, true);
  EXPECT_EQ(ta.states, tb.states);
  EXPECT_EQ(a.counter(), b.counter());
}

TEST_F(ThreeNode, Simulate) {
  RngStream rng(4, "sim");
  const Trajectory t0 = simulate(net, bits("010"), 0, rng, true);
  ASSERT_EQ(t0.states.size(), 1u);
  EXPECT_EQ(t0.states[0], bits("010"));

  const Trajectory t = simulate(net, bits("010"), 500, rng, true);
  ASSERT_EQ(t.states.size(), 501u);
  EXPECT_EQ(t.states.back(), bits("000"));
  std::uint64_t total = 0;
  for (const auto& [s, c] : t.visits) total += c;
  EXPECT_EQ(total, 501u);

  const Trajectory quiet = simulate(net, bits("010"), 500, rng, false);
  ASSERT_EQ(quiet.states.size(), 1u);
  EXPECT_EQ(quiet.states[0], bits("000"));
}

TEST_F(ThreeNode, Perturb) {
  const std::vector<std::size_t> third{2};
  EXPECT_EQ(perturb(bits("011"), third), bits("010"));
  EXPECT_EQ(perturb(bits("011"), {}), bits("011"));
  const std::vector<std::size_t> two{0, 2};
  EXPECT_EQ(perturb(perturb(bits("110"), two), two), bits("110"));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(perturb(bits("011"), bad), ConfigError);
}

TEST_F(ThreeNode, ReachSet) {
  EXPECT_EQ(reach_set(net, bits("000")).size(), 1u);
  const auto r = reach_set(net, bits("101"));
  const std::unordered_set<NetworkState> expected{bits("101"), bits("111"), bits("100"), bits("110")};
  EXPECT_EQ(r, expected);
  EXPECT_THROW(reach_set(net, bits("101"), 2), CapacityError);
}

TEST_F(ThreeNode, TrajectoryCsv) {
  RngStream rng(4, "csv");
  std::ostringstream out;
  write_trajectory_csv(out, simulate(net, bits("000"), 2, rng, true));
  EXPECT_EQ(out.str(), "step,state_hex\n0,0\n1,0\n2,0\n");
}

TEST(Dynamics, ReachSetIsClosed) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const BooleanNetwork net = testing::random_network(9, 1, 3, seed);
    const NetworkState start(9);
    const auto r = reach_set(net, start);
    for (const NetworkState& s : r) {
      for (const NetworkState& t : async_successors(net, s)) ASSERT_TRUE(r.count(t)) << "seed " << seed;
    }
  }
}

TEST(Dynamics, StepsStayInSuccessorSetAndKeepPins) {
  RngStream rng(11, "prop");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BooleanNetwork net = testing::random_network(10, 2, 3, seed);
    PartialAssignment env;
    env.pin(0, true);
    env.pin(1, false);
    const BooleanNetwork r = restrict_network(net, env);
    NetworkState s = random_state(10, env, rng);
    for (int i = 0; i < 500; ++i) {
      const auto succ = async_successors(r, s);
      const NetworkState t = async_step(r, s, rng);
      ASSERT_TRUE(t == s || std::binary_search(succ.begin(), succ.end(), t));
      ASSERT_TRUE(env.aligns(t));
      s = t;
    }
  }
}

TEST(Dynamics, PerturbDistanceEqualsFlipCount) {
  RngStream rng(5, "flips");
  for (int trial = 0; trial < 200; ++trial) {
    const NetworkState s = random_state(40, {}, rng);
    std::vector<std::size_t> flips;
    for (std::size_t i = 0; i < 40; ++i) {
      if (rng.bernoulli(0.2)) flips.push_back(i);
    }
    EXPECT_EQ(s.hamming_distance(perturb(s, flips)), flips.size());
  }
}

}  // namespace
}  // namespace gattaca
