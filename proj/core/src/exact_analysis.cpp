#include "gattaca/exact_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "gattaca/errors.hpp"

namespace gattaca {

// ---------------------------------------------------------------------------
// ExplicitStg

NetworkState ExplicitStg::state_at(std::uint32_t index) const {
  NetworkState s = base_;
  for (std::size_t j = 0; j < free_nodes_.size(); ++j) {
    if ((index >> j) & 1U) s.set(free_nodes_[j], true);
  }
  return s;
}

std::optional<std::uint32_t> ExplicitStg::index_of(const NetworkState& s) const {
  if (s.size() != network_.size() || !env_.aligns(s)) return std::nullopt;
  std::uint32_t index = 0;
  for (std::size_t j = 0; j < free_nodes_.size(); ++j) {
    if (s.get(free_nodes_[j])) index |= std::uint32_t{1} << j;
  }
  return index;
}

std::uint32_t ExplicitStg::index_mask(std::size_t node) const {
  const std::int32_t bit = node_to_bit_.at(node);
  return bit < 0 ? 0U : std::uint32_t{1} << bit;
}

ExplicitStg build_stg(const BooleanNetwork& net, const PartialAssignment& env, std::size_t max_free_nodes) {
  ExplicitStg stg(restrict_network(net, env), env);
  const BooleanNetwork& dyn = stg.network_;
  const std::size_t n = dyn.size();
  stg.node_to_bit_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!env.contains(i)) {
      stg.node_to_bit_[i] = static_cast<std::int32_t>(stg.free_nodes_.size());
      stg.free_nodes_.push_back(i);
    }
  }
  const std::size_t free = stg.free_nodes_.size();
  if (free > max_free_nodes || free > 31) {
    throw CapacityError(std::to_string(free) + " free nodes exceed the explicit-analysis ceiling of " +
                        std::to_string(std::min<std::size_t>(max_free_nodes, 31)));
  }
  stg.base_ = NetworkState(n);
  env.apply(stg.base_);

  const std::uint64_t count = std::uint64_t{1} << free;
  stg.offsets_.assign(count + 1, 0);
  stg.successors_.reserve(count * 2);
  // pinned nodes carry constant predictors equal to their pin, so they only stutter
  const bool pinned_stutter = free < n;
  std::vector<std::uint32_t> local;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const auto index = static_cast<std::uint32_t>(idx);
    const NetworkState s = stg.state_at(index);
    local.clear();
    bool self = pinned_stutter;
    for (std::size_t j = 0; j < free; ++j) {
      const std::size_t node = stg.free_nodes_[j];
      if (dyn.update_value(node, s) != s.get(node)) {
        local.push_back(index ^ (std::uint32_t{1} << j));
      } else {
        self = true;
      }
    }
    if (self) local.push_back(index);
    std::sort(local.begin(), local.end());
    stg.successors_.insert(stg.successors_.end(), local.begin(), local.end());
    stg.offsets_[idx + 1] = stg.successors_.size();
  }

  std::vector<std::uint64_t> in_degree(count + 1, 0);
  for (std::uint32_t t : stg.successors_) ++in_degree[t + 1];
  std::partial_sum(in_degree.begin(), in_degree.end(), in_degree.begin());
  stg.pred_offsets_ = in_degree;
  stg.predecessors_.resize(stg.successors_.size());
  std::vector<std::uint64_t> cursor(in_degree.begin(), in_degree.end() - 1);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    for (std::uint32_t t : stg.successors(static_cast<std::uint32_t>(idx))) {
      stg.predecessors_[cursor[t]++] = static_cast<std::uint32_t>(idx);
    }
  }
  return stg;
}

// ---------------------------------------------------------------------------
// Attractors: iterative Tarjan, then keep SCCs without outgoing edges.

std::vector<Attractor> attractors_exact(const ExplicitStg& stg) {
  const std::size_t count = stg.state_count();
  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> order(count, kUnvisited);
  std::vector<std::uint32_t> low(count, 0);
  std::vector<std::uint32_t> component(count, kUnvisited);
  std::vector<std::uint8_t> on_stack(count, 0);
  std::vector<std::uint32_t> stack;
  struct Frame {
    std::uint32_t node;
    std::size_t next_edge;
  };
  std::vector<Frame> call;
  std::uint32_t counter = 0;
  std::uint32_t components = 0;
  std::vector<std::vector<std::uint32_t>> members;

  for (std::uint32_t root = 0; root < count; ++root) {
    if (order[root] != kUnvisited) continue;
    call.push_back({root, 0});
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto succ = stg.successors(f.node);
      if (f.next_edge < succ.size()) {
        const std::uint32_t w = succ[f.next_edge++];
        if (order[w] == kUnvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], order[w]);
        }
        continue;
      }
      const std::uint32_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] == order[v]) {
        std::vector<std::uint32_t> scc;
        std::uint32_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component[w] = components;
          scc.push_back(w);
        } while (w != v);
        members.push_back(std::move(scc));
        ++components;
      }
    }
  }

  std::vector<Attractor> out;
  for (std::uint32_t c = 0; c < components; ++c) {
    bool bottom = true;
    for (std::uint32_t s : members[c]) {
      for (std::uint32_t t : stg.successors(s)) {
        if (component[t] != c) {
          bottom = false;
          break;
        }
      }
      if (!bottom) break;
    }
    if (bottom) {
      Attractor a{std::move(members[c])};
      std::sort(a.states.begin(), a.states.end());
      out.push_back(std::move(a));
    }
  }
  std::sort(out.begin(), out.end(), [](const Attractor& a, const Attractor& b) { return a.states[0] < b.states[0]; });
  return out;
}

// ---------------------------------------------------------------------------
// Stationary distributions

namespace {

double balance_residual(std::size_t size, std::span<const ChainTransition> transitions, const std::vector<double>& pi) {
  std::vector<double> next(size, 0.0);
  for (const ChainTransition& t : transitions) next[t.to] += pi[t.from] * t.probability;
  double residual = 0.0;
  for (std::size_t i = 0; i < size; ++i) residual += std::abs(next[i] - pi[i]);
  return residual;
}

}  // namespace

StationaryDistribution solve_stationary(std::size_t size, std::span<const ChainTransition> transitions) {
  StationaryDistribution dist;
  dist.states.resize(size);
  std::iota(dist.states.begin(), dist.states.end(), 0U);
  if (size == 0) throw ConfigError("stationary distribution of an empty chain");
  if (size == 1) {
    dist.probability = {1.0};
    return dist;
  }
  std::vector<double> pi(size, 0.0);
  if (size <= kDirectSolveLimit) {
    // pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (const ChainTransition& t : transitions) a(t.to, t.from) += t.probability;
    a.diagonal().array() -= 1.0;
    a.row(static_cast<Eigen::Index>(size) - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    rhs(static_cast<Eigen::Index>(size) - 1) = 1.0;
    const Eigen::VectorXd x = a.fullPivLu().solve(rhs);
    for (std::size_t i = 0; i < size; ++i) pi[i] = x(static_cast<Eigen::Index>(i));
  } else {
    // lazy chain (P + I) / 2 shares pi and is aperiodic
    std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(size));
    std::vector<double> next(size);
    constexpr std::size_t kMaxIterations = 10'000'000;
    bool converged = false;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
      for (std::size_t i = 0; i < size; ++i) next[i] = 0.5 * pi[i];
      for (const ChainTransition& t : transitions) next[t.to] += 0.5 * pi[t.from] * t.probability;
      double delta = 0.0;
      for (std::size_t i = 0; i < size; ++i) delta += std::abs(next[i] - pi[i]);
      pi.swap(next);
      if (delta < 1e-13) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("power iteration did not converge");
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) {
    if (!std::isfinite(p)) throw NumericalError("non-finite stationary probability");
    p /= total;
  }
  const double residual = balance_residual(size, transitions, pi);
  if (!(residual <= 1e-10)) {
    throw NumericalError("stationary distribution residual " + std::to_string(residual) + " too large");
  }
  dist.probability = std::move(pi);
  return dist;
}

StationaryDistribution stationary_distribution(const ExplicitStg& stg, const Attractor& attractor) {
  const std::size_t m = attractor.states.size();
  const double unit = 1.0 / static_cast<double>(stg.network().size());
  std::vector<ChainTransition> transitions;
  for (std::size_t k = 0; k < m; ++k) {
    const std::uint32_t s = attractor.states[k];
    double leave = 0.0;
    for (std::uint32_t t : stg.successors(s)) {
      if (t == s) continue;
      const auto it = std::lower_bound(attractor.states.begin(), attractor.states.end(), t);
      if (it == attractor.states.end() || *it != t) throw ConfigError("attractor is not closed under successors");
      const auto local = static_cast<std::uint32_t>(it - attractor.states.begin());
      // each non-trivial successor differs in exactly one node
      transitions.push_back({static_cast<std::uint32_t>(k), local, unit});
      leave += unit;
    }
    transitions.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k), 1.0 - leave});
  }
  StationaryDistribution dist = solve_stationary(m, transitions);
  dist.states = attractor.states;
  return dist;
}

std::vector<std::uint32_t> states_above(const StationaryDistribution& dist, double threshold) {
  std::vector<std::uint32_t> out;
  const double cut = threshold * (1.0 - 1e-9);
  for (std::size_t k = 0; k < dist.states.size(); ++k) {
    if (dist.probability[k] >= cut) out.push_back(dist.states[k]);
  }
  return out;
}

std::vector<std::uint32_t> pseudo_attractor_exact(const StationaryDistribution& dist) {
  return states_above(dist, 1.0 / static_cast<double>(dist.states.size()));
}

// ---------------------------------------------------------------------------
// Basins

BasinAnalysis::BasinAnalysis(const ExplicitStg& stg, const std::vector<Attractor>& attractors) {
  const std::size_t count = stg.state_count();
  sole_.assign(count, -1);
  member_.assign(count, -1);
  std::vector<std::uint32_t> reach_count(count, 0);
  weak_.assign(attractors.size(), std::vector<std::uint8_t>(count, 0));
  std::deque<std::uint32_t> queue;
  for (std::size_t a = 0; a < attractors.size(); ++a) {
    auto& mark = weak_[a];
    for (std::uint32_t s : attractors[a].states) {
      member_[s] = static_cast<std::int32_t>(a);
      mark[s] = 1;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const std::uint32_t s = queue.front();
      queue.pop_front();
      for (std::uint32_t p : stg.predecessors(s)) {
        if (!mark[p]) {
          mark[p] = 1;
          queue.push_back(p);
        }
      }
    }
    for (std::uint32_t s = 0; s < count; ++s) {
      if (mark[s]) {
        ++reach_count[s];
        sole_[s] = static_cast<std::int32_t>(a);
      }
    }
  }
  for (std::uint32_t s = 0; s < count; ++s) {
    if (reach_count[s] != 1) sole_[s] = -1;
  }
}

std::vector<std::uint32_t> BasinAnalysis::strong_basin(std::size_t attractor) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < sole_.size(); ++s) {
    if (sole_[s] == static_cast<std::int32_t>(attractor)) out.push_back(s);
  }
  return out;
}

std::vector<std::uint32_t> BasinAnalysis::weak_basin(std::size_t attractor) const {
  std::vector<std::uint32_t> out;
  const auto& mark = weak_.at(attractor);
  for (std::uint32_t s = 0; s < mark.size(); ++s) {
    if (mark[s]) out.push_back(s);
  }
  return out;
}

std::vector<std::uint32_t> strong_basin(const ExplicitStg& stg, const std::vector<Attractor>& attractors,
                                        std::size_t attractor) {
  return BasinAnalysis(stg, attractors).strong_basin(attractor);
}

// ---------------------------------------------------------------------------
// Control oracle

bool is_target_attractor(const ExplicitStg& stg, const Attractor& attractor, const PartialAssignment& target) {
  return std::any_of(attractor.states.begin(), attractor.states.end(),
                     [&](std::uint32_t s) { return target.aligns(stg.state_at(s)); });
}

namespace {

/// Calls visit(mask, nodes) for every subset of `bits` with 1..max_size members.
template <typename Visit>
void for_each_flip_set(const std::vector<std::pair<std::size_t, std::uint32_t>>& bits, std::size_t max_size,
                       Visit&& visit) {
  const std::size_t m = bits.size();
  std::vector<std::size_t> pick;
  for (std::size_t k = 1; k <= std::min(max_size, m); ++k) {
    pick.resize(k);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      std::uint32_t mask = 0;
      for (std::size_t p : pick) mask |= bits[p].second;
      if (!visit(mask, pick)) return;
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
}

}  // namespace

OracleResult min_control_oracle(const ExplicitStg& stg, const std::vector<Attractor>& attractors,
                                const BasinAnalysis& basins, std::size_t source, const PartialAssignment& target,
                                std::size_t max_flips, BasinMode mode) {
  if (max_flips == 0) throw ConfigError("max_flips must be at least 1");
  if (source >= attractors.size()) throw ConfigError("source attractor out of range");
  std::vector<std::uint8_t> is_target(attractors.size());
  for (std::size_t a = 0; a < attractors.size(); ++a) is_target[a] = is_target_attractor(stg, attractors[a], target);

  OracleResult result;
  if (is_target[source]) {
    result.length = 0;
    return result;
  }

  std::vector<std::pair<std::size_t, std::uint32_t>> flip_bits;
  for (std::size_t node : stg.free_nodes()) {
    if (!target.contains(node)) flip_bits.emplace_back(node, stg.index_mask(node));
  }

  struct Parent {
    std::size_t attractor;
    ControlStep step;
  };
  std::vector<std::optional<Parent>> parent(attractors.size());
  std::vector<std::uint8_t> seen(attractors.size(), 0);
  std::deque<std::size_t> queue{source};
  seen[source] = 1;
  std::optional<std::size_t> found;

  while (!queue.empty() && !found) {
    const std::size_t a = queue.front();
    queue.pop_front();
    for (std::uint32_t s : attractors[a].states) {
      for_each_flip_set(flip_bits, max_flips, [&](std::uint32_t mask, const std::vector<std::size_t>& pick) {
        const std::uint32_t landing = s ^ mask;
        auto consider = [&](std::size_t b) {
          if (seen[b]) return;
          seen[b] = 1;
          ControlStep step{s, {}, landing, b};
          for (std::size_t p : pick) step.flips.push_back(flip_bits[p].first);
          parent[b] = Parent{a, std::move(step)};
          if (is_target[b] && !found) found = b;
          queue.push_back(b);
        };
        if (mode == BasinMode::kStrong) {
          const std::int32_t owner = basins.strong_owner(landing);
          if (owner >= 0) consider(static_cast<std::size_t>(owner));
        } else {
          for (std::size_t b = 0; b < basins.attractor_count(); ++b) {
            if (basins.in_weak_basin(landing, b)) consider(b);
          }
        }
        return !found.has_value();
      });
      if (found) break;
    }
  }

  if (!found) return result;
  std::vector<ControlStep> steps;
  for (std::size_t b = *found; b != source; b = parent[b]->attractor) steps.push_back(parent[b]->step);
  std::reverse(steps.begin(), steps.end());
  result.length = steps.size();
  result.strategy = std::move(steps);
  return result;
}

// ---------------------------------------------------------------------------
// ACPL reference

AcplResult acpl_reference(const AcplInputs& inputs) {
  const auto& conds = inputs.conditions;
  if (conds.empty()) throw ConfigError("ACPL needs at least one environmental condition");
  if (std::none_of(conds.begin(), conds.end(), [](const auto& c) { return !c.targets.empty(); })) {
    throw ConfigError("no target attractor exists in any environmental condition");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto best_to = [&](const std::string& s, const AcplInputs::Condition& c) {
    double best = kInf;
    for (const std::string& t : c.targets) {
      auto it = inputs.cpl.find({s, t});
      if (it != inputs.cpl.end()) best = std::min(best, it->second);
    }
    return best;
  };

  AcplResult result;
  double outer_sum = 0.0;
  std::size_t outer_count = 0;
  for (std::size_t e = 0; e < conds.size(); ++e) {
    if (conds[e].sources.empty()) {
      throw ConfigError("environmental condition '" + conds[e].name + "' has no source attractor");
    }
    double inner_sum = 0.0;
    std::size_t inner_count = 0;
    for (const std::string& s : conds[e].sources) {
      double length = kInf;
      if (!conds[e].targets.empty()) {
        length = best_to(s, conds[e]);
      } else {
        for (std::size_t other = 0; other < conds.size(); ++other) {
          if (other == e || conds[other].targets.empty()) continue;
          length = std::min(length, 1.0 + best_to(s, conds[other]));
        }
      }
      if (std::isinf(length)) {
        ++result.unreachable_sources;
        continue;
      }
      inner_sum += length;
      ++inner_count;
    }
    if (inner_count == 0) {
      result.condition_means.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double mean = inner_sum / static_cast<double>(inner_count);
    result.condition_means.push_back(mean);
    outer_sum += mean;
    ++outer_count;
  }
  result.mean = outer_count == 0 ? std::numeric_limits<double>::quiet_NaN() : outer_sum / static_cast<double>(outer_count);
  return result;
}

// ---------------------------------------------------------------------------
// Control reference over one or all environmental conditions

namespace {

struct ConditionAnalysis {
  PartialAssignment env;
  std::string name;
  ExplicitStg stg;
  std::vector<Attractor> attractors;
  BasinAnalysis basins;
  std::vector<std::uint8_t> aligned;
};

ConditionAnalysis analyse_condition(const BooleanNetwork& net, PartialAssignment env, const PartialAssignment& target,
                                    std::size_t max_free_nodes) {
  ExplicitStg stg = build_stg(net, env, max_free_nodes);
  std::vector<Attractor> attractors = attractors_exact(stg);
  BasinAnalysis basins(stg, attractors);
  std::vector<std::uint8_t> aligned;
  for (const Attractor& a : attractors) aligned.push_back(is_target_attractor(stg, a, target) ? 1 : 0);
  std::string name = format_assignment(net, env);
  return {std::move(env), std::move(name), std::move(stg), std::move(attractors), std::move(basins),
          std::move(aligned)};
}

bool has_target(const ConditionAnalysis& c) {
  return std::any_of(c.aligned.begin(), c.aligned.end(), [](std::uint8_t x) { return x != 0; });
}

std::string source_name(const ConditionAnalysis& c, std::size_t attractor) {
  return c.name + "|" + c.stg.state_at(c.attractors[attractor].states.front()).to_hex();
}

std::string target_group(const ConditionAnalysis& c) { return c.name + "|target"; }

}  // namespace

ControlReference control_reference(const BooleanNetwork& net, const PartialAssignment& env,
                                   const PartialAssignment& target, std::size_t max_flips,
                                   std::size_t max_free_nodes, bool per_condition) {
  std::vector<ConditionAnalysis> conds;
  if (!per_condition) {
    conds.push_back(analyse_condition(net, env, target, max_free_nodes));
  } else {
    std::vector<std::size_t> free_inputs;
    for (std::size_t i : net.input_nodes()) {
      if (!env.contains(i)) free_inputs.push_back(i);
    }
    if (free_inputs.size() >= 31 || (std::size_t{1} << free_inputs.size()) > kMaxEnumeratedConditions) {
      throw CapacityError("too many unpinned inputs to enumerate environmental conditions");
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << free_inputs.size()); ++mask) {
      PartialAssignment e = env;
      for (std::size_t j = 0; j < free_inputs.size(); ++j) e.pin(free_inputs[j], ((mask >> j) & 1U) != 0);
      conds.push_back(analyse_condition(net, std::move(e), target, max_free_nodes));
    }
  }
  if (std::none_of(conds.begin(), conds.end(), has_target)) {
    throw EmptyResultError("no attractor aligns with the target in any environmental condition");
  }

  ControlReference ref;
  for (const ConditionAnalysis& c : conds) {
    AcplInputs::Condition entry{c.name, {}, {}};
    if (has_target(c)) entry.targets.push_back(target_group(c));
    for (std::size_t a = 0; a < c.attractors.size(); ++a) {
      if (c.aligned[a]) continue;
      SourceControl sc;
      sc.condition = c.name;
      sc.representative = c.stg.state_at(c.attractors[a].states.front());
      sc.attractor_size = c.attractors[a].states.size();
      const std::string name = source_name(c, a);
      entry.sources.push_back(name);

      if (has_target(c)) {
        OracleResult r = min_control_oracle(c.stg, c.attractors, c.basins, a, target, max_flips);
        if (r.length) {
          sc.length = static_cast<double>(*r.length);
          sc.strategy = std::move(r.strategy);
          ref.inputs.cpl[{name, target_group(c)}] = sc.length.value();
        }
      } else {
        for (const ConditionAnalysis& other : conds) {
          if (&other == &c || !has_target(other)) continue;
          std::optional<double> best;
          std::vector<ControlStep> best_strategy;
          for (std::uint32_t s : c.attractors[a].states) {
            NetworkState switched = c.stg.state_at(s);
            other.env.apply(switched);
            const std::int32_t owner = other.basins.strong_owner(*other.stg.index_of(switched));
            if (owner < 0) continue;
            const auto b = static_cast<std::size_t>(owner);
            OracleResult r = min_control_oracle(other.stg, other.attractors, other.basins, b, target, max_flips);
            if (r.length && (!best || static_cast<double>(*r.length) < *best)) {
              best = static_cast<double>(*r.length);
              best_strategy = std::move(r.strategy);
            }
          }
          if (!best) continue;
          ref.inputs.cpl[{name, target_group(other)}] = *best;
          if (!sc.length || 1.0 + *best < *sc.length) {
            sc.length = 1.0 + *best;
            sc.switched = true;
            sc.strategy = std::move(best_strategy);
          }
        }
      }
      ref.sources.push_back(std::move(sc));
    }
    if (!entry.sources.empty()) ref.inputs.conditions.push_back(std::move(entry));
  }
  if (ref.inputs.conditions.empty()) {
    ref.acpl.mean = 0.0;
  } else {
    ref.acpl = acpl_reference(ref.inputs);
  }
  return ref;
}

}  // namespace gattaca
