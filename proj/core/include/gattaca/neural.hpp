#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gattaca/bn_model.hpp"

namespace gattaca {

/// Row-major dense matrix; batches are stored one item per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Tensor = Matrix;
using Edge = StructureGraph::Edge;

struct Param {
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// y = x W + b with W stored in x out.
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t in, std::size_t out, std::mt19937_64& gen);

  std::size_t in_features() const noexcept { return static_cast<std::size_t>(weight.value.rows()); }
  std::size_t out_features() const noexcept { return static_cast<std::size_t>(weight.value.cols()); }

  Matrix forward(const Matrix& x) const;
  /// Accumulates parameter gradients for input x and returns dL/dx.
  Matrix backward(const Matrix& x, const Matrix& dy);

  void collect(std::vector<Param*>& out) { out.push_back(&weight); out.push_back(&bias); }

  Param weight;
  Param bias;
};

struct MlpCache {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

/// Stack of dense layers. Hidden layers use ReLU; the optional final output
/// layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, std::mt19937_64& gen);

  std::size_t out_features() const noexcept { return layers_.back().out_features(); }

  Matrix forward(const Matrix& x, MlpCache* cache = nullptr) const;
  Matrix backward(const MlpCache& cache, const Matrix& dy);

  void collect(std::vector<Param*>& out);
  std::vector<Dense>& layers() noexcept { return layers_; }

 private:
  std::vector<Dense> layers_;
  bool linear_output_ = false;
};

struct GraphConvCache {
  Matrix x;
  Matrix z;
  Matrix hidden_pre;
  Matrix hidden;
};

/// Edge-conditioned graph convolution. Node features of a batch item are laid
/// out node-major in one row: x[b, v * f + c]. For every node v the output is
/// the sum over its in-neighbours u (ascending) of
/// kernel(x_v || x_u - x_v), where the kernel is a one-hidden-layer ReLU
/// perceptron. Nodes without in-neighbours output zero.
class GraphConv {
 public:
  GraphConv() = default;
  GraphConv(std::size_t node_count, std::size_t in_features, std::size_t out_features, std::size_t hidden,
            std::vector<Edge> edges, std::mt19937_64& gen);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t in_features() const noexcept { return in_features_; }
  std::size_t out_features() const noexcept { return outer.out_features(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  Matrix forward(const Matrix& x, GraphConvCache* cache = nullptr) const;
  Matrix backward(const GraphConvCache& cache, const Matrix& dy);

  void collect(std::vector<Param*>& out) { inner.collect(out); outer.collect(out); }

  Dense inner;  // 2f -> hidden
  Dense outer;  // hidden -> f'

 private:
  std::size_t node_count_ = 0;
  std::size_t in_features_ = 0;
  std::vector<Edge> edges_;  // sorted by target, then source
};

struct BdqDims {
  std::size_t nodes = 0;
  std::size_t branches = 5;
  std::size_t actions = 0;  // per branch: perturbable nodes + no-op
  std::size_t conv_layers = 3;
  std::size_t conv_width = 64;
  std::size_t kernel_hidden = 64;
  std::vector<std::size_t> trunk{1024, 512, 256};
  std::vector<std::size_t> head{256, 512, 512};

  bool operator==(const BdqDims&) const = default;
};

struct BdqCache {
  std::vector<GraphConvCache> conv;
  MlpCache trunk;
  MlpCache value;
  std::vector<MlpCache> branch;
};

/// Branching dueling Q-network over graph-convolved node features.
class BdqNetwork {
 public:
  BdqNetwork(BdqDims dims, std::vector<Edge> edges, std::uint64_t seed);

  const BdqDims& dims() const noexcept { return dims_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Q values for a batch of node-feature rows (B x nodes); the result is
  /// B x (branches * actions) with branch d occupying columns
  /// [d * actions, (d + 1) * actions).
  Matrix q_values(const Matrix& features, BdqCache* cache = nullptr) const;

  /// Accumulates parameter gradients given dL/dQ for the cached batch.
  void backward(const BdqCache& cache, const Matrix& dq);

  std::vector<Param*> parameters();
  std::vector<const Param*> parameters() const;
  void zero_grad();
  std::size_t parameter_count() const;

  std::vector<GraphConv>& conv() noexcept { return conv_; }
  Mlp& trunk() noexcept { return trunk_; }
  Mlp& value_head() noexcept { return value_; }
  std::vector<Mlp>& branch_heads() noexcept { return branches_; }

 private:
  BdqDims dims_;
  std::vector<Edge> edges_;
  std::vector<GraphConv> conv_;
  Mlp trunk_;
  Mlp value_;
  std::vector<Mlp> branches_;
};

/// Node features of one state: a 1 x n row of 0/1 values.
Matrix state_features(const NetworkState& s);

/// Per-branch action values of one state as a branches x actions matrix.
Matrix bdq_forward(const BdqNetwork& net, const Matrix& state_features);

/// Index of the largest entry of each branch row; ties go to the lowest index.
std::vector<std::size_t> branch_argmax(const Matrix& q_row, std::size_t branches, std::size_t actions);

struct ReplayBatch {
  Matrix states;                                  // B x n
  Matrix next_states;                             // B x n
  std::vector<std::vector<std::uint32_t>> actions;  // B x branches
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminal;
  std::vector<double> weights;  // importance weights

  std::size_t size() const noexcept { return rewards.size(); }
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> td_errors;  // mean absolute TD error over branches
};

/// Double-Q branching TD loss: mean over the batch of weight times the mean
/// over branches of the squared TD error.
LossResult bdq_loss(const ReplayBatch& batch, const BdqNetwork& online, const BdqNetwork& target, double gamma);

/// Same loss; additionally zeroes and fills the gradients of `online`.
LossResult bdq_loss_gradients(const ReplayBatch& batch, BdqNetwork& online, const BdqNetwork& target, double gamma);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 10.0;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Clips the global gradient norm and applies one update. Throws
  /// NumericalError on a non-finite gradient. Returns the pre-clip norm.
  double step(const std::vector<Param*>& params);

  std::uint64_t step_count() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  AdamConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

/// Scales gradients so their global norm is at most max_norm; returns the
/// original norm.
double clip_global_norm(const std::vector<Param*>& params, double max_norm);

/// Gradient computation plus one Adam step.
LossResult backward_and_step(const ReplayBatch& batch, BdqNetwork& online, const BdqNetwork& target, double gamma,
                             Adam& adam);

/// target <- tau * online + (1 - tau) * target.
void soft_update(BdqNetwork& target, const BdqNetwork& online, double tau);

struct Checkpoint {
  std::uint64_t model_hash = 0;
  std::string metadata;  // JSON text
  BdqNetwork online;
  BdqNetwork target;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const BdqNetwork& online, const BdqNetwork& target,
                     std::uint64_t model_hash, const std::string& metadata);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gattaca
