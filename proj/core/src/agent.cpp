#include "gattaca/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gattaca/dynamics.hpp"
#include "gattaca/errors.hpp"

namespace gattaca {

// ---------------------------------------------------------------------------
// Environment

ControlEnvironment::ControlEnvironment(const BooleanNetwork& net, PartialAssignment env, PartialAssignment target,
                                       PAStateRegistry registry, EnvConfig cfg)
    : dynamics_(restrict_network(net, env)),
      env_(std::move(env)),
      target_(std::move(target)),
      registry_(std::move(registry)),
      detector_(cfg.pasip),
      cfg_(cfg) {
  if (cfg_.branches == 0) throw ConfigError("at least one action branch is required");
  if (cfg_.max_actions == 0) throw ConfigError("episodes need at least one action");
  if (cfg_.evolve_budget == 0) cfg_.evolve_budget = 2 * cfg_.pasip.online_checkpoint;
  for (const auto& [node, value] : target_.pins()) {
    if (node >= net.size()) throw ConfigError("target references an unknown node");
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (target_.contains(i)) continue;
    if (!cfg_.perturb_inputs && net.is_input(i)) continue;
    perturbable_.push_back(i);
  }
}

std::vector<NetworkState> ControlEnvironment::misaligned_states() const {
  std::vector<NetworkState> out;
  for (const auto& e : registry_.entries()) {
    if (!target_.aligns(e.state)) out.push_back(e.state);
  }
  return out;
}

NetworkState ControlEnvironment::reset(RngStream& rng) {
  const auto candidates = misaligned_states();
  if (candidates.empty()) throw EnvironmentFault("every known pseudo-attractor state already aligns with the target");
  return reset_to(candidates[rng.uniform_index(candidates.size())]);
}

NetworkState ControlEnvironment::reset_to(const NetworkState& source) {
  if (!registry_.contains(source)) throw ConfigError("source " + source.to_hex() + " is not a registered PA state");
  if (target_.aligns(source)) throw ConfigError("source " + source.to_hex() + " already aligns with the target");
  current_ = source;
  counter_ = 0;
  active_ = true;
  detector_.reset();
  return source;
}

std::vector<std::size_t> ControlEnvironment::flip_set(const Action& action) const {
  if (action.choices.size() != cfg_.branches) throw ConfigError("action has the wrong number of branches");
  std::vector<std::size_t> flips;
  for (std::uint32_t c : action.choices) {
    if (c > perturbable_.size()) throw ConfigError("action choice out of range");
    if (c != 0) flips.push_back(perturbable_[c - 1]);
  }
  std::sort(flips.begin(), flips.end());
  flips.erase(std::unique(flips.begin(), flips.end()), flips.end());
  return flips;
}

StepResult ControlEnvironment::step(const Action& action, RngStream& rng) {
  if (!active_) throw ConfigError("step called without an active episode");
  StepResult r;
  r.flips = flip_set(action);
  ++counter_;
  const NetworkState perturbed = perturb(*current_, r.flips);
  try {
    r.next = evolve_to_pa(dynamics_, perturbed, registry_, detector_, rng, cfg_.evolve_budget);
  } catch (const EnvironmentFault&) {
    r.next = perturbed;
    r.aborted = true;
    r.done = true;
    active_ = false;
    return r;
  }
  r.success = target_.aligns(r.next);
  r.reward = reward(r.success, r.flips.size());
  r.done = r.success || counter_ >= cfg_.max_actions;
  current_ = r.next;
  if (r.done) active_ = false;
  return r;
}

// ---------------------------------------------------------------------------
// Policy

double LinearSchedule::value(std::uint64_t step) const {
  if (horizon == 0 || step >= horizon) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(horizon);
  return start + (end - start) * frac;
}

Action select_action(const BdqNetwork& net, const NetworkState& state, double epsilon, RngStream& rng) {
  const std::size_t branches = net.dims().branches;
  const std::size_t actions = net.dims().actions;
  Action a;
  a.choices.assign(branches, 0);
  std::vector<bool> greedy(branches, false);
  bool any_greedy = false;
  for (std::size_t d = 0; d < branches; ++d) {
    if (rng.uniform01() < epsilon) {
      a.choices[d] = static_cast<std::uint32_t>(rng.uniform_index(actions));
    } else {
      greedy[d] = true;
      any_greedy = true;
    }
  }
  if (any_greedy) {
    const Matrix q = net.q_values(state_features(state));
    const auto best = branch_argmax(q, branches, actions);
    for (std::size_t d = 0; d < branches; ++d) {
      if (greedy[d]) a.choices[d] = static_cast<std::uint32_t>(best[d]);
    }
  }
  return a;
}

Action greedy_action(const BdqNetwork& net, const NetworkState& state) {
  const Matrix q = net.q_values(state_features(state));
  Action a;
  for (std::size_t best : branch_argmax(q, net.dims().branches, net.dims().actions)) {
    a.choices.push_back(static_cast<std::uint32_t>(best));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Replay

PrioritizedReplay::PrioritizedReplay(std::size_t capacity, double alpha, double priority_floor)
    : capacity_(capacity), alpha_(alpha), floor_(priority_floor) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("priority exponent must be non-negative");
  if (!(priority_floor > 0.0)) throw ConfigError("priority floor must be positive");
  while (leaf_base_ < capacity) leaf_base_ <<= 1;
}

void PrioritizedReplay::set(std::size_t index, double p) {
  std::size_t node = leaf_base_ + index;
  tree_[node] = p;
  for (node >>= 1; node >= 1; node >>= 1) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

void PrioritizedReplay::push(Transition t) {
  if (tree_.empty()) tree_.assign(2 * leaf_base_, 0.0);
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  set(next_, std::pow(max_priority_, alpha_));
  next_ = (next_ + 1) % capacity_;
}

std::size_t PrioritizedReplay::find(double mass) const {
  std::size_t node = 1;
  while (node < leaf_base_) {
    if (mass < tree_[2 * node] || tree_[2 * node + 1] <= 0.0) {
      node = 2 * node;
    } else {
      mass -= tree_[2 * node];
      node = 2 * node + 1;
    }
  }
  return std::min(node - leaf_base_, items_.size() - 1);
}

PrioritizedReplay::Sample PrioritizedReplay::sample(std::size_t batch, double beta, RngStream& rng) const {
  if (batch == 0 || items_.size() < batch) throw ConfigError("replay buffer holds fewer items than the batch size");
  const double total = tree_[1];
  const double segment = total / static_cast<double>(batch);
  const double n = static_cast<double>(items_.size());
  Sample s;
  s.indices.reserve(batch);
  s.weights.reserve(batch);
  double max_w = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const double mass = (static_cast<double>(i) + rng.uniform01()) * segment;
    const std::size_t idx = find(mass);
    const double prob = tree_[leaf_base_ + idx] / total;
    const double w = std::pow(n * prob, -beta);
    s.indices.push_back(idx);
    s.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (double& w : s.weights) w /= max_w;
  return s;
}

void PrioritizedReplay::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& td_errors) {
  if (indices.size() != td_errors.size()) throw ConfigError("priority update size mismatch");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= items_.size()) throw ConfigError("priority update index out of range");
    const double raw = std::abs(td_errors[i]) + floor_;
    max_priority_ = std::max(max_priority_, raw);
    set(indices[i], std::pow(raw, alpha_));
  }
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (update_every == 0) throw ConfigError("update_every must be positive");
  if (replay_capacity < batch_size) throw ConfigError("replay capacity is smaller than the batch size");
  if (env.branches == 0) throw ConfigError("at least one action branch is required");
}

BdqDims network_dims(const ControlEnvironment& env, BdqDims widths) {
  widths.nodes = env.dynamics().size();
  widths.branches = env.branches();
  widths.actions = env.action_count();
  return widths;
}

namespace {

ReplayBatch make_batch(const PrioritizedReplay& replay, const PrioritizedReplay::Sample& sample, std::size_t nodes) {
  ReplayBatch b;
  const auto rows = static_cast<Eigen::Index>(sample.indices.size());
  b.states.resize(rows, static_cast<Eigen::Index>(nodes));
  b.next_states.resize(rows, static_cast<Eigen::Index>(nodes));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Transition& t = replay.at(sample.indices[static_cast<std::size_t>(r)]);
    b.states.row(r) = state_features(t.state);
    b.next_states.row(r) = state_features(t.next_state);
    b.actions.push_back(t.action);
    b.rewards.push_back(t.reward);
    b.terminal.push_back(t.terminal ? 1 : 0);
  }
  b.weights = sample.weights;
  return b;
}

}  // namespace

TrainResult train(const BooleanNetwork& net, const PartialAssignment& env, const PartialAssignment& target,
                  PAStateRegistry registry, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ControlEnvironment environment(net, env, target, std::move(registry), cfg.env);
  const BdqDims dims = network_dims(environment, cfg.network);
  const auto edges = structure_graph(net).edges;

  const RngStream root(seed, "train");
  RngStream init_rng = root.substream("init");
  RngStream env_rng = root.substream("env");
  RngStream policy_rng = root.substream("policy");
  RngStream replay_rng = root.substream("replay");

  BdqNetwork online(dims, edges, init_rng());
  BdqNetwork target_net = online;
  Adam adam(cfg.adam);
  PrioritizedReplay replay(cfg.replay_capacity, cfg.per_alpha, cfg.priority_floor);
  const EpsilonSchedule eps{cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_horizon};
  const LinearSchedule beta{cfg.beta_start, cfg.beta_end, cfg.steps};

  std::vector<LogRow> log;
  log.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(cfg.steps, 1u << 24)));
  std::uint64_t episode = 0;
  std::uint64_t episode_length = 0;
  std::uint64_t aborted = 0;
  std::optional<NetworkState> state;
  for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
    if (!state) state = environment.reset(env_rng);
    LogRow row;
    row.step = step;
    row.episode = episode;
    row.epsilon = eps.value(step - 1);
    row.beta = beta.value(step - 1);

    const Action action = select_action(online, *state, row.epsilon, policy_rng);
    const StepResult res = environment.step(action, env_rng);
    ++episode_length;
    if (res.aborted) {
      ++aborted;
    } else {
      replay.push({*state, action.choices, res.reward, res.next, res.done});
    }

    if (replay.size() >= std::max<std::uint64_t>(cfg.warmup, cfg.batch_size) && step % cfg.update_every == 0) {
      const auto sample = replay.sample(cfg.batch_size, row.beta, replay_rng);
      const ReplayBatch batch = make_batch(replay, sample, dims.nodes);
      const LossResult loss = backward_and_step(batch, online, target_net, cfg.gamma, adam);
      replay.update_priorities(sample.indices, loss.td_errors);
      soft_update(target_net, online, cfg.tau);
      row.loss = loss.loss;
    }

    row.episode_length = episode_length;
    row.registry_size = environment.registry().size();
    if (res.done) {
      row.episode_success = res.success;
      ++episode;
      episode_length = 0;
      state.reset();
    } else {
      state = res.next;
    }
    log.push_back(row);
  }
  return {std::move(online), std::move(target_net), environment.registry(), std::move(log), aborted};
}

std::string training_log_csv(const std::vector<LogRow>& log) {
  std::ostringstream out;
  out << "step,episode,ep_len,ep_success,loss,epsilon,beta,registry_size\n";
  char buf[64];
  for (const LogRow& r : log) {
    out << r.step << ',' << r.episode << ',' << r.episode_length << ',';
    if (r.episode_success) out << (*r.episode_success ? 1 : 0);
    out << ',';
    if (r.loss) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.loss);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g", r.epsilon);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", r.beta);
    out << buf << ',' << r.registry_size << '\n';
  }
  return out.str();
}

std::uint64_t training_log_hash(const std::vector<LogRow>& log) { return fnv1a64(training_log_csv(log)); }

}  // namespace gattaca
