#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/ipasip.hpp"
#include "gattaca/neural.hpp"
#include "gattaca/rng.hpp"

namespace gattaca {

struct EnvConfig {
  std::size_t max_actions = 100;
  std::size_t branches = 5;
  bool perturb_inputs = true;
  std::uint64_t evolve_budget = 0;  // 0: twice the online checkpoint d2
  PasipConfig pasip;
};

/// One choice per branch: 0 is the no-op, k >= 1 selects perturbable node k-1.
struct Action {
  std::vector<std::uint32_t> choices;
};

struct StepResult {
  NetworkState next;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  bool aborted = false;  // evolution budget exhausted; not a real transition
  std::vector<std::size_t> flips;
};

/// Episodic control task over pseudo-attractor states.
class ControlEnvironment {
 public:
  ControlEnvironment(const BooleanNetwork& net, PartialAssignment env, PartialAssignment target,
                     PAStateRegistry registry, EnvConfig cfg = {});

  /// Uniform choice among registered states not aligned with the target.
  /// Throws EnvironmentFault when every registered state is aligned.
  NetworkState reset(RngStream& rng);
  /// Starts an episode from a given registered, misaligned state.
  NetworkState reset_to(const NetworkState& source);

  StepResult step(const Action& action, RngStream& rng);

  /// Distinct flipped nodes of an action, ascending.
  std::vector<std::size_t> flip_set(const Action& action) const;
  static double reward(bool aligned, std::size_t flips) {
    return 21.0 + (aligned ? 100.0 : 0.0) - static_cast<double>(flips);
  }

  std::vector<NetworkState> misaligned_states() const;

  const BooleanNetwork& dynamics() const noexcept { return dynamics_; }
  const PartialAssignment& environment() const noexcept { return env_; }
  const PartialAssignment& target() const noexcept { return target_; }
  const PAStateRegistry& registry() const noexcept { return registry_; }
  PAStateRegistry& registry() noexcept { return registry_; }
  const std::vector<std::size_t>& perturbable() const noexcept { return perturbable_; }
  std::size_t action_count() const noexcept { return perturbable_.size() + 1; }
  std::size_t branches() const noexcept { return cfg_.branches; }
  const EnvConfig& config() const noexcept { return cfg_; }

  const NetworkState& current() const { return *current_; }
  std::size_t actions_taken() const noexcept { return counter_; }
  bool active() const noexcept { return active_; }

 private:
  BooleanNetwork dynamics_;
  PartialAssignment env_;
  PartialAssignment target_;
  PAStateRegistry registry_;
  OnlineDetector detector_;
  EnvConfig cfg_;
  std::vector<std::size_t> perturbable_;
  std::optional<NetworkState> current_;
  std::size_t counter_ = 0;
  bool active_ = false;
};

/// Linear interpolation from start to end over `horizon` steps, then flat.
struct LinearSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t horizon = 1'000'000;

  double value(std::uint64_t step) const;
};
using EpsilonSchedule = LinearSchedule;

/// Per-branch epsilon-greedy choice.
Action select_action(const BdqNetwork& net, const NetworkState& state, double epsilon, RngStream& rng);

/// Greedy action (lowest index on ties).
Action greedy_action(const BdqNetwork& net, const NetworkState& state);

struct Transition {
  NetworkState state;
  std::vector<std::uint32_t> action;
  double reward = 0.0;
  NetworkState next_state;
  bool terminal = false;
};

/// Proportional prioritized replay on a sum tree; a ring buffer once full.
class PrioritizedReplay {
 public:
  PrioritizedReplay(std::size_t capacity, double alpha, double priority_floor = 1e-6);

  void push(Transition t);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const Transition& at(std::size_t index) const { return items_.at(index); }

  struct Sample {
    std::vector<std::size_t> indices;
    std::vector<double> weights;  // importance weights, max-normalised
  };
  /// Stratified proportional sampling. Throws ConfigError when fewer than
  /// `batch` items are stored.
  Sample sample(std::size_t batch, double beta, RngStream& rng) const;

  /// Sets priority (|td| + floor)^alpha for each index.
  void update_priorities(const std::vector<std::size_t>& indices, const std::vector<double>& td_errors);

  /// Stored priority (already raised to alpha).
  double priority(std::size_t index) const { return tree_[leaf_base_ + index]; }
  double total_priority() const { return tree_[1]; }

 private:
  void set(std::size_t index, double p);
  std::size_t find(double mass) const;

  std::size_t capacity_;
  double alpha_;
  double floor_;
  double max_priority_ = 1.0;
  std::size_t next_ = 0;
  std::size_t leaf_base_ = 1;
  std::vector<double> tree_;
  std::vector<Transition> items_;
};

struct TrainConfig {
  std::uint64_t steps = 1'000'000;
  std::size_t batch_size = 128;
  double gamma = 0.99;
  std::size_t replay_capacity = 1'000'000;
  double per_alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  double priority_floor = 1e-6;
  double tau = 0.01;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t epsilon_horizon = 1'000'000;
  std::uint64_t warmup = 1000;
  std::uint64_t update_every = 1;
  AdamConfig adam;
  EnvConfig env;
  BdqDims network;  // layer widths; nodes/actions/branches are filled in

  void validate() const;
};

struct LogRow {
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  std::uint64_t episode_length = 0;
  std::optional<bool> episode_success;  // set on the step that ends an episode
  std::optional<double> loss;           // set on steps with a gradient update
  double epsilon = 0.0;
  double beta = 0.0;
  std::size_t registry_size = 0;
};

struct TrainResult {
  BdqNetwork online;
  BdqNetwork target;
  PAStateRegistry registry;
  std::vector<LogRow> log;
  std::uint64_t aborted_steps = 0;
};

/// Network shape used for a given environment.
BdqDims network_dims(const ControlEnvironment& env, BdqDims widths);

/// Trains a branching dueling Q agent. The registry is expected to come from
/// phase1_scan and may grow while training.
TrainResult train(const BooleanNetwork& net, const PartialAssignment& env, const PartialAssignment& target,
                  PAStateRegistry registry, const TrainConfig& cfg, std::uint64_t seed);

std::string training_log_csv(const std::vector<LogRow>& log);
std::uint64_t training_log_hash(const std::vector<LogRow>& log);

}  // namespace gattaca
