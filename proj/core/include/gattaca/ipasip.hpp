#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/network_state.hpp"
#include "gattaca/rng.hpp"

namespace gattaca {

/// Hyperparameters of the pseudo-attractor identification procedure.
struct PasipConfig {
  std::uint64_t burn_in = 200;              // n0
  std::uint64_t count_window = 1000;        // n1
  std::uint64_t fixed_point_dwell = 1000;   // n2
  std::uint64_t history_size = 10000;       // n3
  std::uint64_t offline_checkpoint = 1'000'000;  // d1
  std::uint64_t online_checkpoint = 1'000'000;   // d2
  unsigned dominance_percent = 5;           // k1
  unsigned history_percent = 15;            // k2
  std::size_t trajectories = 100;           // k

  /// Throws ConfigError on non-positive counts or percentages outside (0, 100].
  void validate() const;
};

enum class Provenance { kI1, kI2, kII1, kII2, kII3, kExact };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view text);

/// Growing, deduplicated set of pseudo-attractor states with provenance.
class PAStateRegistry {
 public:
  struct Entry {
    NetworkState state;
    Provenance provenance;
    double visit_share;       // share of the deciding window spent in the state
    std::uint64_t step_found;  // step index inside the run that found it
  };

  /// Adds the state unless present; returns true when newly added. The
  /// provenance of an existing entry is never changed.
  bool add(const NetworkState& state, Provenance provenance, double visit_share, std::uint64_t step_found);

  bool contains(const NetworkState& state) const { return index_.count(state) != 0; }
  const Entry* find(const NetworkState& state) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// JSON array of {state_hex, provenance, visit_share, step_found}.
  std::string to_json() const;
  static PAStateRegistry from_json(std::string_view text, std::size_t node_count);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<NetworkState, std::size_t> index_;
};

/// Offline scan over cfg.trajectories random starts (inputs pinned per env).
///
/// Each trajectory discards the burn-in, then inspects consecutive counting
/// windows of n1 steps. The first window holding a state visited at least
/// k1% of the time registers all such states (I-1) and ends the trajectory.
/// If d1 steps pass without such a window, the most visited state over those
/// d1 steps is registered (I-2) and the trajectory ends. The merged registry
/// is sorted by state value.
PAStateRegistry phase1_scan(const BooleanNetwork& net, const PartialAssignment& env, const PasipConfig& cfg,
                            const RngStream& rng);

/// Online detection during training (Steps II-1..II-3).
class OnlineDetector {
 public:
  explicit OnlineDetector(PasipConfig cfg);

  /// Feeds one visited state. Registers and returns a new PA state when one
  /// of the checkpoints fires. Visiting a registered state discards all
  /// windows.
  std::optional<NetworkState> observe(const NetworkState& s, PAStateRegistry& registry, const BooleanNetwork& net);

  /// Drops all windows (e.g. after the environment is reset).
  void reset();

  std::uint64_t dwell() const noexcept { return dwell_; }
  std::size_t history_length() const noexcept { return history_.size(); }
  std::uint64_t steps_without_dominance() const noexcept { return big_window_length_; }
  std::uint64_t steps_observed() const noexcept { return steps_; }

 private:
  PasipConfig cfg_;
  std::uint64_t steps_ = 0;
  // II-1
  std::optional<NetworkState> last_;
  std::uint64_t dwell_ = 0;
  // II-2
  std::deque<NetworkState> history_;
  // II-3
  std::unordered_map<NetworkState, std::uint64_t> sub_window_;
  std::uint64_t sub_window_length_ = 0;
  std::uint64_t sub_window_max_ = 0;
  std::unordered_map<NetworkState, std::uint64_t> big_window_;
  std::uint64_t big_window_length_ = 0;
};

/// Free function form of OnlineDetector::observe.
std::optional<NetworkState> detector_observe(OnlineDetector& det, const NetworkState& s, PAStateRegistry& registry,
                                             const BooleanNetwork& net);

/// Lets the network evolve from s0 until it sits in a registered PA state
/// (possibly one registered on the way). Throws EnvironmentFault when the
/// step budget runs out.
NetworkState evolve_to_pa(const BooleanNetwork& net, const NetworkState& s0, PAStateRegistry& registry,
                          OnlineDetector& det, RngStream& rng, std::uint64_t budget);

/// Largest possible number of states with stationary probability >= k% in
/// an attractor: 100/k - 1 when k divides 100 and the attractor has more
/// than 100/k states (or its size is unknown), otherwise floor(100/k).
std::size_t pa_size_bound(unsigned k_percent, std::optional<std::size_t> attractor_size = std::nullopt);

}  // namespace gattaca
