#include "gattaca/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "gattaca/errors.hpp"

namespace gattaca {

namespace {

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre, const Matrix& grad) {
  return (pre.array() > 0.0).select(grad, 0.0);
}

void glorot_uniform(Matrix& w, std::mt19937_64& gen) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(gen);
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense / Mlp

Dense::Dense(std::size_t in, std::size_t out, std::mt19937_64& gen) {
  weight.value.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  glorot_uniform(weight.value, gen);
  bias.value = Matrix::Zero(1, static_cast<Eigen::Index>(out));
  weight.zero_grad();
  bias.zero_grad();
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.cols() != weight.value.rows()) throw ConfigError("dense layer input width mismatch");
  Matrix y(x.rows(), weight.value.cols());
  y.noalias() = x * weight.value;
  y.rowwise() += bias.value.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy) {
  weight.grad.noalias() += x.transpose() * dy;
  bias.grad += dy.colwise().sum();
  Matrix dx(dy.rows(), weight.value.rows());
  dx.noalias() = dy * weight.value.transpose();
  return dx;
}

Mlp::Mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, std::mt19937_64& gen) {
  std::size_t width = in;
  for (std::size_t h : hidden) {
    layers_.emplace_back(width, h, gen);
    width = h;
  }
  if (out > 0) {
    layers_.emplace_back(width, out, gen);
    linear_output_ = true;
  }
  if (layers_.empty()) throw ConfigError("perceptron needs at least one layer");
}

Matrix Mlp::forward(const Matrix& x, MlpCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix pre = layers_[i].forward(h);
    const bool linear = linear_output_ && i + 1 == layers_.size();
    Matrix next = linear ? pre : relu(pre);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(std::move(pre));
    }
    h = std::move(next);
  }
  return h;
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& dy) {
  Matrix g = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const bool linear = linear_output_ && i + 1 == layers_.size();
    if (!linear) g = relu_mask(cache.pre[i], g);
    g = layers_[i].backward(cache.inputs[i], g);
  }
  return g;
}

void Mlp::collect(std::vector<Param*>& out) {
  for (Dense& d : layers_) d.collect(out);
}

// ---------------------------------------------------------------------------
// GraphConv

GraphConv::GraphConv(std::size_t node_count, std::size_t in_features, std::size_t out_features, std::size_t hidden,
                     std::vector<Edge> edges, std::mt19937_64& gen)
    : inner(2 * in_features, hidden, gen),
      outer(hidden, out_features, gen),
      node_count_(node_count),
      in_features_(in_features),
      edges_(std::move(edges)) {
  for (const Edge& e : edges_) {
    if (e.source >= node_count || e.target >= node_count) throw ConfigError("graph edge references unknown node");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  });
}

Matrix GraphConv::forward(const Matrix& x, GraphConvCache* cache) const {
  const auto n = static_cast<Eigen::Index>(node_count_);
  const auto f = static_cast<Eigen::Index>(in_features_);
  const auto fo = static_cast<Eigen::Index>(out_features());
  if (x.cols() != n * f) throw ConfigError("graph convolution input width mismatch");
  const Eigen::Index batch = x.rows();
  const auto edge_count = static_cast<Eigen::Index>(edges_.size());

  Matrix out = Matrix::Zero(batch, n * fo);
  Matrix z(batch * edge_count, 2 * f);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index e = 0; e < edge_count; ++e) {
      const auto v = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].target);
      const auto u = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].source);
      const Eigen::Index row = b * edge_count + e;
      z.row(row).head(f) = x.row(b).segment(v * f, f);
      z.row(row).tail(f) = x.row(b).segment(u * f, f) - x.row(b).segment(v * f, f);
    }
  }
  if (edge_count == 0) {
    if (cache) *cache = {x, z, Matrix(0, 0), Matrix(0, 0)};
    return out;
  }
  Matrix hidden_pre = inner.forward(z);
  Matrix hidden = relu(hidden_pre);
  const Matrix messages = outer.forward(hidden);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index e = 0; e < edge_count; ++e) {
      const auto v = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].target);
      out.row(b).segment(v * fo, fo) += messages.row(b * edge_count + e);
    }
  }
  if (cache) *cache = {x, std::move(z), std::move(hidden_pre), std::move(hidden)};
  return out;
}

Matrix GraphConv::backward(const GraphConvCache& cache, const Matrix& dy) {
  const auto f = static_cast<Eigen::Index>(in_features_);
  const auto fo = static_cast<Eigen::Index>(out_features());
  const Eigen::Index batch = cache.x.rows();
  const auto edge_count = static_cast<Eigen::Index>(edges_.size());
  Matrix dx = Matrix::Zero(batch, cache.x.cols());
  if (edge_count == 0) return dx;

  Matrix dmessages(batch * edge_count, fo);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index e = 0; e < edge_count; ++e) {
      const auto v = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].target);
      dmessages.row(b * edge_count + e) = dy.row(b).segment(v * fo, fo);
    }
  }
  Matrix dhidden = outer.backward(cache.hidden, dmessages);
  dhidden = relu_mask(cache.hidden_pre, dhidden);
  const Matrix dz = inner.backward(cache.z, dhidden);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index e = 0; e < edge_count; ++e) {
      const auto v = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].target);
      const auto u = static_cast<Eigen::Index>(edges_[static_cast<std::size_t>(e)].source);
      const Eigen::Index row = b * edge_count + e;
      dx.row(b).segment(v * f, f) += dz.row(row).head(f) - dz.row(row).tail(f);
      dx.row(b).segment(u * f, f) += dz.row(row).tail(f);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BdqNetwork

BdqNetwork::BdqNetwork(BdqDims dims, std::vector<Edge> edges, std::uint64_t seed)
    : dims_(std::move(dims)), edges_(std::move(edges)) {
  if (dims_.nodes == 0 || dims_.branches == 0 || dims_.actions == 0 || dims_.conv_layers == 0) {
    throw ConfigError("network dimensions must be positive");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  });
  std::mt19937_64 gen(seed);
  std::size_t width = 1;
  for (std::size_t l = 0; l < dims_.conv_layers; ++l) {
    conv_.emplace_back(dims_.nodes, width, dims_.conv_width, dims_.kernel_hidden, edges_, gen);
    width = dims_.conv_width;
  }
  trunk_ = Mlp(dims_.nodes * width, dims_.trunk, 0, gen);
  const std::size_t trunk_out = trunk_.out_features();
  value_ = Mlp(trunk_out, dims_.head, 1, gen);
  for (std::size_t d = 0; d < dims_.branches; ++d) branches_.emplace_back(trunk_out, dims_.head, dims_.actions, gen);
}

Matrix BdqNetwork::q_values(const Matrix& features, BdqCache* cache) const {
  if (features.cols() != static_cast<Eigen::Index>(dims_.nodes)) throw ConfigError("state feature width mismatch");
  if (cache) {
    cache->conv.assign(conv_.size(), {});
    cache->branch.assign(branches_.size(), {});
  }
  Matrix h = features;
  for (std::size_t l = 0; l < conv_.size(); ++l) h = conv_[l].forward(h, cache ? &cache->conv[l] : nullptr);
  const Matrix trunk_out = trunk_.forward(h, cache ? &cache->trunk : nullptr);
  const Matrix value = value_.forward(trunk_out, cache ? &cache->value : nullptr);

  const auto actions = static_cast<Eigen::Index>(dims_.actions);
  Matrix q(features.rows(), static_cast<Eigen::Index>(dims_.branches) * actions);
  for (std::size_t d = 0; d < branches_.size(); ++d) {
    const Matrix adv = branches_[d].forward(trunk_out, cache ? &cache->branch[d] : nullptr);
    const Eigen::VectorXd mean = adv.rowwise().mean();
    auto block = q.middleCols(static_cast<Eigen::Index>(d) * actions, actions);
    block = adv;
    block.colwise() -= mean;
    block.colwise() += value.col(0);
  }
  require_finite(q, "Q values");
  return q;
}

void BdqNetwork::backward(const BdqCache& cache, const Matrix& dq) {
  const auto actions = static_cast<Eigen::Index>(dims_.actions);
  const Eigen::Index batch = dq.rows();
  Matrix dvalue = dq.rowwise().sum();
  Matrix dtrunk = Matrix::Zero(batch, static_cast<Eigen::Index>(trunk_.out_features()));
  for (std::size_t d = 0; d < branches_.size(); ++d) {
    Matrix dadv = dq.middleCols(static_cast<Eigen::Index>(d) * actions, actions);
    const Eigen::VectorXd mean = dadv.rowwise().mean();
    dadv.colwise() -= mean;
    dtrunk += branches_[d].backward(cache.branch[d], dadv);
  }
  dtrunk += value_.backward(cache.value, dvalue);
  Matrix g = trunk_.backward(cache.trunk, dtrunk);
  for (std::size_t l = conv_.size(); l-- > 0;) g = conv_[l].backward(cache.conv[l], g);
}

std::vector<Param*> BdqNetwork::parameters() {
  std::vector<Param*> out;
  for (GraphConv& c : conv_) c.collect(out);
  trunk_.collect(out);
  value_.collect(out);
  for (Mlp& b : branches_) b.collect(out);
  return out;
}

std::vector<const Param*> BdqNetwork::parameters() const {
  auto mutable_params = const_cast<BdqNetwork*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void BdqNetwork::zero_grad() {
  for (Param* p : parameters()) p->zero_grad();
}

std::size_t BdqNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const Param* p : parameters()) total += static_cast<std::size_t>(p->value.size());
  return total;
}

Matrix state_features(const NetworkState& s) {
  Matrix x(1, static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = s.get(i) ? 1.0 : 0.0;
  return x;
}

Matrix bdq_forward(const BdqNetwork& net, const Matrix& features) {
  if (features.rows() != 1) throw ConfigError("bdq_forward expects a single state");
  const Matrix q = net.q_values(features);
  Matrix out(static_cast<Eigen::Index>(net.dims().branches), static_cast<Eigen::Index>(net.dims().actions));
  for (Eigen::Index d = 0; d < out.rows(); ++d) out.row(d) = q.row(0).segment(d * out.cols(), out.cols());
  return out;
}

std::vector<std::size_t> branch_argmax(const Matrix& q_row, std::size_t branches, std::size_t actions) {
  std::vector<std::size_t> out(branches, 0);
  for (std::size_t d = 0; d < branches; ++d) {
    const double* row = q_row.data() + d * actions;
    out[d] = static_cast<std::size_t>(std::max_element(row, row + actions) - row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss

namespace {

void validate_batch(const ReplayBatch& batch, const BdqDims& dims) {
  const std::size_t b = batch.size();
  if (b == 0) throw ConfigError("empty training batch");
  if (static_cast<std::size_t>(batch.states.rows()) != b || static_cast<std::size_t>(batch.next_states.rows()) != b ||
      batch.actions.size() != b || batch.terminal.size() != b || batch.weights.size() != b) {
    throw ConfigError("inconsistent batch sizes");
  }
  for (const auto& a : batch.actions) {
    if (a.size() != dims.branches) throw ConfigError("action tuple does not match branch count");
    for (std::uint32_t x : a) {
      if (x >= dims.actions) throw ConfigError("action index out of range");
    }
  }
}

/// y[b, d]: double-Q branch targets.
Matrix td_targets(const ReplayBatch& batch, const BdqNetwork& online, const BdqNetwork& target, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("discount factor must lie in [0, 1]");
  const BdqDims& dims = online.dims();
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto branches = static_cast<Eigen::Index>(dims.branches);
  const auto actions = static_cast<Eigen::Index>(dims.actions);
  Matrix y(b, branches);
  for (Eigen::Index i = 0; i < b; ++i) y.row(i).setConstant(batch.rewards[static_cast<std::size_t>(i)]);
  if (gamma == 0.0) return y;
  const Matrix q_online = online.q_values(batch.next_states);
  const Matrix q_target = target.q_values(batch.next_states);
  for (Eigen::Index i = 0; i < b; ++i) {
    if (batch.terminal[static_cast<std::size_t>(i)]) continue;
    const auto best = branch_argmax(q_online.row(i), dims.branches, dims.actions);
    for (Eigen::Index d = 0; d < branches; ++d) {
      y(i, d) += gamma * q_target(i, d * actions + static_cast<Eigen::Index>(best[static_cast<std::size_t>(d)]));
    }
  }
  return y;
}

LossResult loss_impl(const ReplayBatch& batch, const BdqNetwork& online, const BdqNetwork& target, double gamma,
                     BdqCache* cache, Matrix* dq) {
  const BdqDims& dims = online.dims();
  validate_batch(batch, dims);
  const Matrix y = td_targets(batch, online, target, gamma);
  const Matrix q = online.q_values(batch.states, cache);
  const std::size_t b = batch.size();
  const auto actions = static_cast<Eigen::Index>(dims.actions);
  const double inv_d = 1.0 / static_cast<double>(dims.branches);
  const double inv_b = 1.0 / static_cast<double>(b);
  if (dq) *dq = Matrix::Zero(q.rows(), q.cols());

  LossResult result;
  result.td_errors.assign(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    double item = 0.0;
    for (std::size_t d = 0; d < dims.branches; ++d) {
      const Eigen::Index col = static_cast<Eigen::Index>(d) * actions + batch.actions[i][d];
      const double delta = y(row, static_cast<Eigen::Index>(d)) - q(row, col);
      item += delta * delta * inv_d;
      result.td_errors[i] += std::abs(delta) * inv_d;
      if (dq) (*dq)(row, col) = -2.0 * batch.weights[i] * delta * inv_d * inv_b;
    }
    result.loss += batch.weights[i] * item * inv_b;
  }
  if (!std::isfinite(result.loss)) throw NumericalError("non-finite loss");
  return result;
}

}  // namespace

LossResult bdq_loss(const ReplayBatch& batch, const BdqNetwork& online, const BdqNetwork& target, double gamma) {
  return loss_impl(batch, online, target, gamma, nullptr, nullptr);
}

LossResult bdq_loss_gradients(const ReplayBatch& batch, BdqNetwork& online, const BdqNetwork& target, double gamma) {
  BdqCache cache;
  Matrix dq;
  LossResult result = loss_impl(batch, online, target, gamma, &cache, &dq);
  online.zero_grad();
  online.backward(cache, dq);
  return result;
}

// ---------------------------------------------------------------------------
// Optimizer

double clip_global_norm(const std::vector<Param*>& params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient");
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Param* p : params) p->grad *= scale;
  }
  return norm;
}

double Adam::step(const std::vector<Param*>& params) {
  const double norm = clip_global_norm(params, cfg_.clip_norm);
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw ConfigError("optimizer used with a different parameter set");
  ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i]->grad.array();
    m_[i].array() = cfg_.beta1 * m_[i].array() + (1.0 - cfg_.beta1) * g;
    v_[i].array() = cfg_.beta2 * v_[i].array() + (1.0 - cfg_.beta2) * g.square();
    params[i]->value.array() -=
        cfg_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.epsilon);
  }
  return norm;
}

LossResult backward_and_step(const ReplayBatch& batch, BdqNetwork& online, const BdqNetwork& target, double gamma,
                             Adam& adam) {
  LossResult result = bdq_loss_gradients(batch, online, target, gamma);
  adam.step(online.parameters());
  return result;
}

void soft_update(BdqNetwork& target, const BdqNetwork& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft update rate must lie in [0, 1]");
  if (!(target.dims() == online.dims()) || target.edges() != online.edges()) {
    throw ConfigError("soft update between networks of different shape");
  }
  const auto dst = target.parameters();
  const auto src = online.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i]->value = tau * src[i]->value + (1.0 - tau) * dst[i]->value;
  }
}

// ---------------------------------------------------------------------------
// Checkpoint I/O (little-endian)

namespace {

constexpr char kMagic[8] = {'G', 'T', 'C', 'B', 'D', 'Q', 'N', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u32(std::uint32_t v) { raw(v, 4); }
  void u64(std::uint64_t v) { raw(v, 8); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  void raw(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::string bytes() {
    const std::uint64_t n = u64();
    if (n > (std::uint64_t{1} << 30)) throw ConfigError("corrupt checkpoint: oversized block");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  void check() {
    if (!in_) throw ConfigError("truncated checkpoint");
  }

 private:
  std::uint64_t raw(int n) {
    unsigned char buf[8] = {};
    in_.read(reinterpret_cast<char*>(buf), n);
    check();
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

void write_sizes(Writer& w, const std::vector<std::size_t>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (std::size_t x : v) w.u32(static_cast<std::uint32_t>(x));
}

std::vector<std::size_t> read_sizes(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n > 64) throw ConfigError("corrupt checkpoint: layer list too long");
  std::vector<std::size_t> v(n);
  for (auto& x : v) x = r.u32();
  return v;
}

void write_params(Writer& w, const BdqNetwork& net) {
  const auto params = net.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    w.u32(static_cast<std::uint32_t>(p->value.rows()));
    w.u32(static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) w.f64(p->value.data()[i]);
  }
}

void read_params(Reader& r, BdqNetwork& net) {
  const auto params = net.parameters();
  if (r.u32() != params.size()) throw ConfigError("checkpoint tensor count does not match the network");
  for (Param* p : params) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != p->value.rows() || cols != p->value.cols()) throw ConfigError("checkpoint tensor shape mismatch");
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = r.f64();
    require_finite(p->value, "checkpoint tensor");
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const BdqNetwork& online, const BdqNetwork& target,
                     std::uint64_t model_hash, const std::string& metadata) {
  if (!(online.dims() == target.dims())) throw ConfigError("online and target networks differ in shape");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(model_hash);
  w.bytes(metadata);
  const BdqDims& d = online.dims();
  for (std::size_t x : {d.nodes, d.branches, d.actions, d.conv_layers, d.conv_width, d.kernel_hidden}) {
    w.u32(static_cast<std::uint32_t>(x));
  }
  write_sizes(w, d.trunk);
  write_sizes(w, d.head);
  w.u32(static_cast<std::uint32_t>(online.edges().size()));
  for (const Edge& e : online.edges()) {
    w.u32(static_cast<std::uint32_t>(e.source));
    w.u32(static_cast<std::uint32_t>(e.target));
  }
  write_params(w, online);
  write_params(w, target);
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw ConfigError("not a checkpoint file: " + path.string());
  }
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t hash = r.u64();
  std::string metadata = r.bytes();
  BdqDims d;
  d.nodes = r.u32();
  d.branches = r.u32();
  d.actions = r.u32();
  d.conv_layers = r.u32();
  d.conv_width = r.u32();
  d.kernel_hidden = r.u32();
  d.trunk = read_sizes(r);
  d.head = read_sizes(r);
  const std::uint32_t edge_count = r.u32();
  std::vector<Edge> edges(edge_count);
  for (Edge& e : edges) {
    e.source = r.u32();
    e.target = r.u32();
  }
  Checkpoint ck{hash, std::move(metadata), BdqNetwork(d, edges, 0), BdqNetwork(d, edges, 0)};
  read_params(r, ck.online);
  read_params(r, ck.target);
  return ck;
}

}  // namespace gattaca
