#pragma once

// Central finite-difference checks shared by the unit tests and the
// acceptance suite.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gattaca/bn_model.hpp"
#include "gattaca/neural.hpp"

namespace gattaca::testing {

/// Small network shape that keeps every layer type but runs in microseconds.
inline BdqDims tiny_dims(std::size_t nodes, std::size_t branches, std::size_t actions) {
  BdqDims d;
  d.nodes = nodes;
  d.branches = branches;
  d.actions = actions;
  d.conv_width = 4;
  d.kernel_hidden = 5;
  d.trunk = {8, 6};
  d.head = {5, 4};
  return d;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  return m;
}

/// Worst normwise relative error over tensors between the analytic gradient
/// already stored in params and central differences of `loss`.
inline double max_gradient_error(const std::vector<Param*>& params, const std::function<double()>& loss,
                                 double step = 1e-5) {
  double worst = 0.0;
  for (Param* p : params) {
    Matrix numeric(p->value.rows(), p->value.cols());
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& w = p->value.data()[i];
      const double keep = w;
      w = keep + step;
      const double up = loss();
      w = keep - step;
      const double down = loss();
      w = keep;
      numeric.data()[i] = (up - down) / (2.0 * step);
    }
    const double scale = std::max({p->grad.norm(), numeric.norm(), 1e-8});
    worst = std::max(worst, (p->grad - numeric).norm() / scale);
  }
  return worst;
}

/// Random biases keep pre-activations off the ReLU kink at exactly zero,
/// where a dead hidden row and zero-initialised biases would otherwise put them.
inline void randomize_biases(Mlp& mlp, std::mt19937_64& gen) {
  for (Dense& d : mlp.layers()) d.bias.value = random_matrix(1, d.bias.value.cols(), gen, 0.5);
}

inline void randomize_biases(BdqNetwork& net, std::mt19937_64& gen) {
  for (GraphConv& c : net.conv()) {
    c.inner.bias.value = random_matrix(1, c.inner.bias.value.cols(), gen, 0.5);
    c.outer.bias.value = random_matrix(1, c.outer.bias.value.cols(), gen, 0.5);
  }
  randomize_biases(net.trunk(), gen);
  randomize_biases(net.value_head(), gen);
  for (Mlp& head : net.branch_heads()) randomize_biases(head, gen);
}

/// Random edge list over n nodes with self-loops allowed.
inline std::vector<Edge> random_edges(std::size_t n, std::mt19937_64& gen) {
  std::vector<Edge> edges;
  std::bernoulli_distribution coin(0.4);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      if (coin(gen)) edges.push_back({s, t});
    }
  }
  return edges;
}

/// Random replay batch of 0/1 states with rewards in the task's range.
inline ReplayBatch random_batch(std::size_t size, const BdqDims& dims, std::mt19937_64& gen) {
  ReplayBatch b;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::uint32_t> action(0, static_cast<std::uint32_t>(dims.actions - 1));
  std::uniform_real_distribution<double> reward(16.0, 121.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  b.states.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(dims.nodes));
  b.next_states.resizeLike(b.states);
  for (Eigen::Index i = 0; i < b.states.size(); ++i) {
    b.states.data()[i] = coin(gen) ? 1.0 : 0.0;
    b.next_states.data()[i] = coin(gen) ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < size; ++i) {
    std::vector<std::uint32_t> a(dims.branches);
    for (auto& c : a) c = action(gen);
    b.actions.push_back(std::move(a));
    b.rewards.push_back(reward(gen));
    b.terminal.push_back(coin(gen) ? 1 : 0);
    b.weights.push_back(weight(gen));
  }
  return b;
}

}  // namespace gattaca::testing
