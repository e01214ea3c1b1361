#include "gattaca/dynamics.hpp"

#include <algorithm>
#include <deque>

#include "gattaca/errors.hpp"

namespace gattaca {

std::vector<NetworkState> async_successors(const BooleanNetwork& net, const NetworkState& s) {
  std::vector<NetworkState> out;
  out.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    NetworkState next = s;
    next.set(i, net.update_value(i, s));
    out.push_back(next);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

NetworkState async_step(const BooleanNetwork& net, const NetworkState& s, RngStream& rng) {
  const std::size_t i = rng.uniform_index(net.size());
  NetworkState next = s;
  next.set(i, net.update_value(i, s));
  return next;
}

Trajectory simulate(const BooleanNetwork& net, const NetworkState& s0, std::uint64_t steps, RngStream& rng,
                    bool record) {
  Trajectory t;
  NetworkState current = s0;
  if (record) {
    t.states.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(steps + 1, std::uint64_t{1} << 22)));
    t.states.push_back(current);
    ++t.visits[current];
  }
  for (std::uint64_t k = 0; k < steps; ++k) {
    current = async_step(net, current, rng);
    if (record) {
      t.states.push_back(current);
      ++t.visits[current];
    }
  }
  if (!record) {
    t.states.push_back(current);
    t.visits[current] = 1;
  }
  return t;
}

NetworkState perturb(NetworkState s, std::span<const std::size_t> flips) {
  for (std::size_t i : flips) {
    if (i >= s.size()) throw ConfigError("perturbation index " + std::to_string(i) + " out of range");
    s.flip(i);
  }
  return s;
}

std::unordered_set<NetworkState> reach_set(const BooleanNetwork& net, const NetworkState& s, std::size_t cap) {
  std::unordered_set<NetworkState> seen{s};
  std::deque<NetworkState> frontier{s};
  while (!frontier.empty()) {
    const NetworkState cur = frontier.front();
    frontier.pop_front();
    for (std::size_t i = 0; i < net.size(); ++i) {
      NetworkState next = cur;
      next.set(i, net.update_value(i, cur));
      if (seen.insert(next).second) {
        if (seen.size() > cap) {
          throw CapacityError("reachable set exceeds cap of " + std::to_string(cap) + " states");
        }
        frontier.push_back(next);
      }
    }
  }
  return seen;
}

NetworkState random_state(std::size_t node_count, const PartialAssignment& env, RngStream& rng) {
  NetworkState s(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!env.contains(i)) s.set(i, rng.bernoulli(0.5));
  }
  env.apply(s);
  return s;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,state_hex\n";
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    out << k << ',' << trajectory.states[k].to_hex() << '\n';
  }
}

}  // namespace gattaca
