#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/network_state.hpp"
#include "gattaca/rng.hpp"

namespace gattaca {

struct Trajectory {
  /// Every visited state when recording, otherwise only the final state.
  std::vector<NetworkState> states;
  std::unordered_map<NetworkState, std::uint64_t> visits;
};

/// post(s): states reachable by one asynchronous update, sorted and
/// deduplicated. Contains s itself iff some update is a no-op.
std::vector<NetworkState> async_successors(const BooleanNetwork& net, const NetworkState& s);

/// One asynchronous update of a uniformly drawn node (no-op draws included).
NetworkState async_step(const BooleanNetwork& net, const NetworkState& s, RngStream& rng);

/// Applies async_step `steps` times starting from s0.
Trajectory simulate(const BooleanNetwork& net, const NetworkState& s0, std::uint64_t steps, RngStream& rng,
                    bool record);

/// Inverts exactly the listed bits.
NetworkState perturb(NetworkState s, std::span<const std::size_t> flips);

inline constexpr std::size_t kDefaultReachCap = std::size_t{1} << 24;

/// Forward closure of post from s. Throws CapacityError past cap states.
std::unordered_set<NetworkState> reach_set(const BooleanNetwork& net, const NetworkState& s,
                                           std::size_t cap = kDefaultReachCap);

/// Uniform state over the free nodes with env's pins applied.
NetworkState random_state(std::size_t node_count, const PartialAssignment& env, RngStream& rng);

/// CSV "step,state_hex", one row per recorded state.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace gattaca
