#include "gattaca/ipasip.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "gattaca/dynamics.hpp"
#include "gattaca/errors.hpp"

namespace gattaca {

void PasipConfig::validate() const {
  if (burn_in == 0 && count_window == 0) throw ConfigError("n0 and n1 cannot both be zero");
  if (count_window == 0 || fixed_point_dwell == 0 || history_size == 0 || offline_checkpoint == 0 ||
      online_checkpoint == 0 || trajectories == 0) {
    throw ConfigError("iPASIP counts (n1, n2, n3, d1, d2, k) must be positive");
  }
  if (dominance_percent == 0 || dominance_percent > 100 || history_percent == 0 || history_percent > 100) {
    throw ConfigError("iPASIP thresholds k1 and k2 must lie in (0, 100]");
  }
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kI1:
      return "I-1";
    case Provenance::kI2:
      return "I-2";
    case Provenance::kII1:
      return "II-1";
    case Provenance::kII2:
      return "II-2";
    case Provenance::kII3:
      return "II-3";
    case Provenance::kExact:
      return "exact";
  }
  return "?";
}

Provenance provenance_from_string(std::string_view text) {
  for (Provenance p : {Provenance::kI1, Provenance::kI2, Provenance::kII1, Provenance::kII2, Provenance::kII3,
                       Provenance::kExact}) {
    if (to_string(p) == text) return p;
  }
  throw ConfigError("unknown provenance '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Registry

bool PAStateRegistry::add(const NetworkState& state, Provenance provenance, double visit_share,
                          std::uint64_t step_found) {
  if (index_.count(state) != 0) return false;
  index_.emplace(state, entries_.size());
  entries_.push_back({state, provenance, visit_share, step_found});
  return true;
}

const PAStateRegistry::Entry* PAStateRegistry::find(const NetworkState& state) const {
  auto it = index_.find(state);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::string PAStateRegistry::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Entry& e : entries_) {
    arr.push_back({{"state_hex", e.state.to_hex()},
                   {"provenance", std::string(to_string(e.provenance))},
                   {"visit_share", e.visit_share},
                   {"step_found", e.step_found}});
  }
  return arr.dump(2) + "\n";
}

PAStateRegistry PAStateRegistry::from_json(std::string_view text, std::size_t node_count) {
  PAStateRegistry reg;
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw ConfigError("registry file must hold a JSON array");
  for (const auto& item : arr) {
    reg.add(NetworkState::from_hex(item.at("state_hex").get<std::string>(), node_count),
            provenance_from_string(item.at("provenance").get<std::string>()), item.at("visit_share").get<double>(),
            item.at("step_found").get<std::uint64_t>());
  }
  return reg;
}

// ---------------------------------------------------------------------------
// Phase I

namespace {

/// Most visited state; ties go to the smaller state so results do not
/// depend on hash-map iteration order.
std::pair<NetworkState, std::uint64_t> most_visited(const std::unordered_map<NetworkState, std::uint64_t>& counts) {
  const std::pair<const NetworkState, std::uint64_t>* best = nullptr;
  for (const auto& kv : counts) {
    if (best == nullptr || kv.second > best->second || (kv.second == best->second && kv.first < best->first)) {
      best = &kv;
    }
  }
  return {best->first, best->second};
}

std::vector<std::pair<NetworkState, std::uint64_t>> dominant_states(
    const std::unordered_map<NetworkState, std::uint64_t>& counts, std::uint64_t window, unsigned percent,
    bool strict) {
  std::vector<std::pair<NetworkState, std::uint64_t>> out;
  for (const auto& [state, count] : counts) {
    const std::uint64_t lhs = count * 100;
    const std::uint64_t rhs = static_cast<std::uint64_t>(percent) * window;
    if (strict ? lhs > rhs : lhs >= rhs) out.emplace_back(state, count);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

struct Candidate {
  PAStateRegistry::Entry entry;
  std::size_t trajectory;
};

void scan_trajectory(const BooleanNetwork& dyn, const PartialAssignment& env, const PasipConfig& cfg, RngStream rng,
                     std::size_t trajectory, std::vector<Candidate>& out) {
  NetworkState s = random_state(dyn.size(), env, rng);
  for (std::uint64_t k = 0; k < cfg.burn_in; ++k) s = async_step(dyn, s, rng);

  std::unordered_map<NetworkState, std::uint64_t> window;
  std::unordered_map<NetworkState, std::uint64_t> large;
  std::uint64_t window_length = 0;
  std::uint64_t large_length = 0;
  std::uint64_t step = cfg.burn_in;
  while (true) {
    s = async_step(dyn, s, rng);
    ++step;
    ++window[s];
    ++window_length;
    ++large[s];
    ++large_length;
    if (window_length == cfg.count_window) {
      const auto dominant = dominant_states(window, window_length, cfg.dominance_percent, false);
      if (!dominant.empty()) {
        for (const auto& [state, count] : dominant) {
          out.push_back({{state, Provenance::kI1, static_cast<double>(count) / static_cast<double>(window_length), step},
                         trajectory});
        }
        return;
      }
      window.clear();
      window_length = 0;
    }
    if (large_length >= cfg.offline_checkpoint) {
      const auto [state, count] = most_visited(large);
      out.push_back({{state, Provenance::kI2, static_cast<double>(count) / static_cast<double>(large_length), step},
                     trajectory});
      return;
    }
  }
}

}  // namespace

PAStateRegistry phase1_scan(const BooleanNetwork& net, const PartialAssignment& env, const PasipConfig& cfg,
                            const RngStream& rng) {
  cfg.validate();
  const BooleanNetwork dyn = restrict_network(net, env);
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < cfg.trajectories; ++t) {
    scan_trajectory(dyn, env, cfg, rng.substream("phase1/" + std::to_string(t)), t, candidates);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.entry.state < b.entry.state; });
  PAStateRegistry registry;
  for (const Candidate& c : candidates) {
    registry.add(c.entry.state, c.entry.provenance, c.entry.visit_share, c.entry.step_found);
  }
  return registry;
}

// ---------------------------------------------------------------------------
// Phase II

OnlineDetector::OnlineDetector(PasipConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void OnlineDetector::reset() {
  last_.reset();
  dwell_ = 0;
  history_.clear();
  sub_window_.clear();
  sub_window_length_ = 0;
  sub_window_max_ = 0;
  big_window_.clear();
  big_window_length_ = 0;
}

std::optional<NetworkState> OnlineDetector::observe(const NetworkState& s, PAStateRegistry& registry,
                                                    const BooleanNetwork& net) {
  ++steps_;
  if (registry.contains(s)) {
    reset();
    return std::nullopt;
  }

  // II-1: long dwell in one state, confirmed analytically
  if (last_ && *last_ == s) {
    ++dwell_;
  } else {
    last_ = s;
    dwell_ = 1;
  }
  if (dwell_ >= cfg_.fixed_point_dwell) {
    if (net.is_fixed_point(s)) {
      registry.add(s, Provenance::kII1, 1.0, steps_);
      reset();
      return s;
    }
    dwell_ = 0;
  }

  // II-2: frequently revisited states within a full history buffer
  history_.push_back(s);
  if (history_.size() >= cfg_.history_size) {
    std::unordered_map<NetworkState, std::uint64_t> counts;
    for (const NetworkState& h : history_) ++counts[h];
    const auto frequent = dominant_states(counts, history_.size(), cfg_.history_percent, true);
    const double window = static_cast<double>(history_.size());
    history_.clear();
    if (!frequent.empty()) {
      for (const auto& [state, count] : frequent) {
        registry.add(state, Provenance::kII2, static_cast<double>(count) / window, steps_);
      }
      const NetworkState first = frequent.front().first;
      reset();
      return first;
    }
  }

  // II-3: no dominating state for d2 steps
  const std::uint64_t c = ++sub_window_[s];
  sub_window_max_ = std::max(sub_window_max_, c);
  ++sub_window_length_;
  ++big_window_[s];
  ++big_window_length_;
  if (sub_window_length_ == cfg_.count_window) {
    if (sub_window_max_ * 100 >= static_cast<std::uint64_t>(cfg_.dominance_percent) * sub_window_length_) {
      big_window_.clear();
      big_window_length_ = 0;
    }
    sub_window_.clear();
    sub_window_length_ = 0;
    sub_window_max_ = 0;
  }
  if (big_window_length_ >= cfg_.online_checkpoint) {
    const auto [state, count] = most_visited(big_window_);
    registry.add(state, Provenance::kII3, static_cast<double>(count) / static_cast<double>(big_window_length_),
                 steps_);
    reset();
    return state;
  }
  return std::nullopt;
}

std::optional<NetworkState> detector_observe(OnlineDetector& det, const NetworkState& s, PAStateRegistry& registry,
                                             const BooleanNetwork& net) {
  return det.observe(s, registry, net);
}

NetworkState evolve_to_pa(const BooleanNetwork& net, const NetworkState& s0, PAStateRegistry& registry,
                          OnlineDetector& det, RngStream& rng, std::uint64_t budget) {
  if (budget == 0) throw ConfigError("evolution budget must be at least one step");
  if (registry.contains(s0)) return s0;
  NetworkState s = s0;
  for (std::uint64_t k = 0; k < budget; ++k) {
    s = async_step(net, s, rng);
    det.observe(s, registry, net);
    if (registry.contains(s)) return s;
  }
  throw EnvironmentFault("no pseudo-attractor state reached within " + std::to_string(budget) + " steps");
}

std::size_t pa_size_bound(unsigned k_percent, std::optional<std::size_t> attractor_size) {
  if (k_percent == 0 || k_percent > 100) throw ConfigError("k must lie in [1, 100]");
  const std::size_t quotient = 100 / k_percent;
  if (100 % k_percent == 0 && (!attractor_size || *attractor_size > quotient)) return quotient - 1;
  return quotient;
}

}  // namespace gattaca
