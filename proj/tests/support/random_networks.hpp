#pragma once

// Seeded generators for property tests: random Boolean networks and random
// irreducible Markov chains.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/exact_analysis.hpp"

namespace gattaca::testing {

/// Sum of products over the given parents for every true row of `table`.
inline BooleanExpr expr_from_table(const std::vector<std::size_t>& parents, const std::vector<bool>& table) {
  const bool all_true = std::all_of(table.begin(), table.end(), [](bool b) { return b; });
  const bool all_false = std::none_of(table.begin(), table.end(), [](bool b) { return b; });
  if (all_true || all_false) return BooleanExpr::constant(all_true);
  std::optional<BooleanExpr> sum;
  for (std::size_t row = 0; row < table.size(); ++row) {
    if (!table[row]) continue;
    std::optional<BooleanExpr> product;
    for (std::size_t j = 0; j < parents.size(); ++j) {
      BooleanExpr lit = BooleanExpr::variable(parents[j]);
      if (((row >> j) & 1U) == 0) lit = BooleanExpr::negate(std::move(lit));
      product = product ? BooleanExpr::conjunction(std::move(*product), std::move(lit)) : std::move(lit);
    }
    sum = sum ? BooleanExpr::disjunction(std::move(*sum), std::move(*product)) : std::move(*product);
  }
  return *sum;
}

/// n nodes; the first `inputs` are identity inputs, the others read 1..max_parents
/// random parents through a random truth table.
inline BooleanNetwork random_network(std::size_t n, std::size_t inputs, std::size_t max_parents, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::string> names;
  std::vector<BooleanExpr> predictors;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < inputs) {
      predictors.push_back(BooleanExpr::variable(i));
      continue;
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::shuffle(pool.begin(), pool.end(), gen);
    const std::size_t k = 1 + std::uniform_int_distribution<std::size_t>(0, std::min(max_parents, n) - 1)(gen);
    std::vector<std::size_t> parents(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(parents.begin(), parents.end());
    std::vector<bool> table(std::size_t{1} << k);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t r = 0; r < table.size(); ++r) table[r] = coin(gen);
    predictors.push_back(expr_from_table(parents, table));
  }
  return BooleanNetwork(std::move(names), std::move(predictors));
}

/// Irreducible chain on `size` states in the style of asynchronous dynamics:
/// every state has `slots` equally likely moves (one of them along a
/// Hamiltonian cycle, the others random targets or stutters).
inline std::vector<ChainTransition> random_chain(std::size_t size, std::size_t slots, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> order(size);
  std::iota(order.begin(), order.end(), 0U);
  std::shuffle(order.begin(), order.end(), gen);
  std::vector<std::uint32_t> next(size);
  for (std::size_t i = 0; i < size; ++i) next[order[i]] = order[(i + 1) % size];
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(size - 1));
  std::bernoulli_distribution stutter(0.3);
  const double p = 1.0 / static_cast<double>(slots);
  std::vector<ChainTransition> out;
  for (std::uint32_t s = 0; s < size; ++s) {
    out.push_back({s, next[s], p});
    for (std::size_t k = 1; k < slots; ++k) out.push_back({s, stutter(gen) ? s : pick(gen), p});
  }
  return out;
}

}  // namespace gattaca::testing
