#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/network_state.hpp"

namespace gattaca {

inline constexpr std::size_t kDefaultMaxFreeNodes = 24;

/// Complete asynchronous state transition graph over the states consistent
/// with an environmental condition.
///
/// State index bit j holds free node free_nodes()[j]. Successor lists are
/// exactly async_successors (sorted by index), so a state lists itself iff
/// one of its updates is a no-op.
class ExplicitStg {
 public:
  const BooleanNetwork& network() const noexcept { return network_; }
  const PartialAssignment& environment() const noexcept { return env_; }
  const std::vector<std::size_t>& free_nodes() const noexcept { return free_nodes_; }
  std::size_t state_count() const noexcept { return offsets_.size() - 1; }

  NetworkState state_at(std::uint32_t index) const;
  /// Index of s; nullopt if s disagrees with the environment.
  std::optional<std::uint32_t> index_of(const NetworkState& s) const;

  std::span<const std::uint32_t> successors(std::uint32_t index) const {
    return {successors_.data() + offsets_[index], successors_.data() + offsets_[index + 1]};
  }
  std::span<const std::uint32_t> predecessors(std::uint32_t index) const {
    return {predecessors_.data() + pred_offsets_[index], predecessors_.data() + pred_offsets_[index + 1]};
  }

  /// Bit mask over the index space for node i; zero for pinned nodes.
  std::uint32_t index_mask(std::size_t node) const;

 private:
  friend ExplicitStg build_stg(const BooleanNetwork& net, const PartialAssignment& env, std::size_t max_free_nodes);
  ExplicitStg(BooleanNetwork network, PartialAssignment env) : network_(std::move(network)), env_(std::move(env)) {}

  BooleanNetwork network_;
  PartialAssignment env_;
  std::vector<std::size_t> free_nodes_;
  std::vector<std::int32_t> node_to_bit_;
  NetworkState base_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> successors_;
  std::vector<std::uint64_t> pred_offsets_;
  std::vector<std::uint32_t> predecessors_;
};

/// Builds the STG of restrict_network(net, env). Throws CapacityError when
/// more than max_free_nodes nodes are unpinned.
ExplicitStg build_stg(const BooleanNetwork& net, const PartialAssignment& env,
                      std::size_t max_free_nodes = kDefaultMaxFreeNodes);

struct Attractor {
  std::vector<std::uint32_t> states;  // sorted STG indices
  bool is_fixed_point() const noexcept { return states.size() == 1; }
};

/// All bottom SCCs, ordered by their smallest state index.
std::vector<Attractor> attractors_exact(const ExplicitStg& stg);

struct StationaryDistribution {
  std::vector<std::uint32_t> states;
  std::vector<double> probability;
};

/// One weighted edge of a finite Markov chain over local indices.
struct ChainTransition {
  std::uint32_t from;
  std::uint32_t to;
  double probability;
};

inline constexpr std::size_t kDirectSolveLimit = 4096;

/// Stationary distribution of an irreducible chain on `size` states: a
/// direct linear solve up to kDirectSolveLimit states, lazy power iteration
/// to a 1e-12 residual beyond. States are labelled 0..size-1.
StationaryDistribution solve_stationary(std::size_t size, std::span<const ChainTransition> transitions);

/// Stationary distribution of the attractor-restricted chain with uniform
/// node choice (stutter mass included).
StationaryDistribution stationary_distribution(const ExplicitStg& stg, const Attractor& attractor);

/// { s : pi(s) >= threshold } with a 1e-9 relative tolerance on threshold.
std::vector<std::uint32_t> states_above(const StationaryDistribution& dist, double threshold);

/// Pseudo-attractor: states with stationary probability at least 1/|A|.
std::vector<std::uint32_t> pseudo_attractor_exact(const StationaryDistribution& dist);

enum class BasinMode { kStrong, kWeak };

/// Per-state attractor reachability.
class BasinAnalysis {
 public:
  BasinAnalysis(const ExplicitStg& stg, const std::vector<Attractor>& attractors);

  std::size_t attractor_count() const noexcept { return weak_.size(); }
  bool in_weak_basin(std::uint32_t state, std::size_t attractor) const { return weak_[attractor][state] != 0; }
  /// The unique attractor reachable from state, or -1.
  std::int32_t strong_owner(std::uint32_t state) const { return sole_[state]; }
  /// Attractor whose states include this one, or -1.
  std::int32_t attractor_of(std::uint32_t state) const { return member_[state]; }

  std::vector<std::uint32_t> strong_basin(std::size_t attractor) const;
  std::vector<std::uint32_t> weak_basin(std::size_t attractor) const;

 private:
  std::vector<std::vector<std::uint8_t>> weak_;
  std::vector<std::int32_t> sole_;
  std::vector<std::int32_t> member_;
};

std::vector<std::uint32_t> strong_basin(const ExplicitStg& stg, const std::vector<Attractor>& attractors,
                                        std::size_t attractor);

struct ControlStep {
  std::uint32_t from_state;
  std::vector<std::size_t> flips;  // node indices, ascending
  std::uint32_t landing_state;
  std::size_t next_attractor;
};

struct OracleResult {
  /// Interventions of a minimal strategy; nullopt when none exists.
  std::optional<std::size_t> length;
  std::vector<ControlStep> strategy;
};

/// True iff some state of the attractor aligns with the target.
bool is_target_attractor(const ExplicitStg& stg, const Attractor& attractor, const PartialAssignment& target);

/// Minimal attractor-target control by BFS over the attractor meta-graph.
/// An edge A -> B exists iff flipping at most max_flips non-target free
/// nodes of some state of A lands in B's strong (or weak) basin.
OracleResult min_control_oracle(const ExplicitStg& stg, const std::vector<Attractor>& attractors,
                                const BasinAnalysis& basins, std::size_t source, const PartialAssignment& target,
                                std::size_t max_flips, BasinMode mode = BasinMode::kStrong);

/// Inputs of the average control path length reference.
struct AcplInputs {
  struct Condition {
    std::string name;
    std::vector<std::string> sources;
    std::vector<std::string> targets;
  };
  std::vector<Condition> conditions;
  /// cpl(source, target); a missing pair means no strategy exists.
  std::map<std::pair<std::string, std::string>, double> cpl;
};

struct AcplResult {
  double mean = 0.0;
  std::vector<double> condition_means;  // NaN for skipped conditions
  std::size_t unreachable_sources = 0;
};

/// Mean over conditions of the mean over sources of the shortest control
/// length, charging one extra action for switching to another condition
/// when the source's own condition has no target attractor. Sources with no
/// finite route are excluded and counted. Throws ConfigError when no
/// condition has a target attractor or a condition has no source.
AcplResult acpl_reference(const AcplInputs& inputs);

struct SourceControl {
  std::string condition;        // formatted environmental condition
  NetworkState representative;  // smallest state of the source attractor
  std::size_t attractor_size = 0;
  std::optional<double> length;  // switch penalty included; nullopt: no strategy
  bool switched = false;         // requires a change of environmental condition
  std::vector<ControlStep> strategy;  // within the (final) condition
};

struct ControlReference {
  std::vector<SourceControl> sources;
  AcplInputs inputs;
  AcplResult acpl;
};

inline constexpr std::size_t kMaxEnumeratedConditions = 4096;

/// Exact control lengths from every source attractor and their ACPL.
///
/// With per_condition unset, one STG over the states consistent with env is
/// analysed; unpinned inputs are ordinary flippable nodes. With per_condition
/// set, every assignment of the unpinned inputs is analysed separately, and a
/// source whose condition has no target attractor may switch to another
/// condition for one extra action; the switched state must then reach a
/// unique attractor. Throws EmptyResultError when no target attractor exists.
ControlReference control_reference(const BooleanNetwork& net, const PartialAssignment& env,
                                   const PartialAssignment& target, std::size_t max_flips,
                                   std::size_t max_free_nodes = kDefaultMaxFreeNodes, bool per_condition = false);

}  // namespace gattaca
