#include "chartnet/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "chartnet/errors.hpp"

namespace chartnet {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace

SparseLayer::SparseLayer(int rows, int cols, std::vector<Triplet> triplets, Eigen::VectorXd bias,
                         Activation activation)
    : rows_(rows), cols_(cols), triplets_(std::move(triplets)), bias_(std::move(bias)),
      activation_(activation) {
  if (rows_ <= 0 || cols_ <= 0) throw DimensionError("layer dimensions must be positive");
  if (bias_.size() != rows_) throw DimensionError("bias length must equal the output dimension");
  std::sort(triplets_.begin(), triplets_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 0; i < triplets_.size(); ++i) {
    const Triplet& t = triplets_[i];
    if (t.row < 0 || t.row >= rows_ || t.col < 0 || t.col >= cols_)
      throw DimensionError("triplet index out of range");
    check_finite(t.value, "weight");
    if (t.value == 0.0) throw PreconditionError("explicit zero weight stored in layer");
    if (i > 0 && triplets_[i - 1].row == t.row && triplets_[i - 1].col == t.col)
      throw PreconditionError("duplicate triplet in layer");
  }
  for (int i = 0; i < rows_; ++i) {
    check_finite(bias_[i], "bias");
    if (bias_[i] == 0.0) bias_[i] = 0.0;  // normalize -0.0 for stable serialization
  }
  row_ptr_.assign(rows_ + 1, 0);
  for (const Triplet& t : triplets_) ++row_ptr_[t.row + 1];
  for (int i = 0; i < rows_; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

ReluNetwork::ReluNetwork(std::vector<SparseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("network needs at least one layer");
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    if (layers_[i].rows() != layers_[i + 1].cols())
      throw DimensionError("consecutive layer dimensions do not chain");
    if (layers_[i].activation() == Activation::Identity)
      throw PreconditionError("identity activation is only allowed on the final layer");
  }
  input_dim_ = layers_.front().cols();
  output_dim_ = layers_.back().rows();
}

namespace {

// Applies one layer to a row-major block of points (one row per lane, one
// column per point). Accumulation per output lane follows the sorted triplet
// order, so every point sees the same floating-point operation sequence as a
// single-point evaluation. Buffers are caller-owned to avoid reallocation.
void apply_layer(const SparseLayer& layer, const double* in, double* out, Eigen::Index cols) {
  const auto& t = layer.triplets();
  const auto& ptr = layer.row_ptr();
  const bool relu = layer.activation() == Activation::Relu;
  for (int r = 0; r < layer.rows(); ++r) {
    double* dst = out + static_cast<std::ptrdiff_t>(r) * cols;
    const double b = layer.bias()[r];
    for (Eigen::Index j = 0; j < cols; ++j) dst[j] = b;
    for (int k = ptr[r]; k < ptr[r + 1]; ++k) {
      const double v = t[k].value;
      const double* src = in + static_cast<std::ptrdiff_t>(t[k].col) * cols;
      for (Eigen::Index j = 0; j < cols; ++j) dst[j] += v * src[j];
    }
    if (relu)
      for (Eigen::Index j = 0; j < cols; ++j) dst[j] = dst[j] > 0.0 ? dst[j] : 0.0;
  }
}

void eval_block_range(const ReluNetwork& net, const Eigen::MatrixXd& points,
                      Eigen::Index start, Eigen::Index len, int layer_count,
                      std::vector<double>& buf_a, std::vector<double>& buf_b,
                      Eigen::MatrixXd& out) {
  double* a = buf_a.data();
  double* b = buf_b.data();
  for (int r = 0; r < net.input_dim(); ++r)
    for (Eigen::Index j = 0; j < len; ++j) a[static_cast<std::ptrdiff_t>(r) * len + j] =
        points(r, start + j);
  for (int l = 0; l < layer_count; ++l) {
    apply_layer(net.layers()[l], a, b, len);
    std::swap(a, b);
  }
  const int out_dim = layer_count == 0 ? net.input_dim() : net.layers()[layer_count - 1].rows();
  for (int r = 0; r < out_dim; ++r)
    for (Eigen::Index j = 0; j < len; ++j)
      out(r, start + j) = a[static_cast<std::ptrdiff_t>(r) * len + j];
}

Eigen::MatrixXd eval_layers(const ReluNetwork& net, const Eigen::MatrixXd& points,
                            int layer_count, int num_threads) {
  if (points.rows() != net.input_dim())
    throw DimensionError("input shape does not match network input dimension");
  if (layer_count < 0 || layer_count > net.depth())
    throw DimensionError("layer count out of range");
  const Eigen::Index n = points.cols();
  long long width = net.input_dim();
  for (int l = 0; l < layer_count; ++l)
    width = std::max<long long>(width, net.layers()[l].rows());

  // Chunk so the two lane buffers stay comfortably inside memory.
  Eigen::Index chunk = std::max<Eigen::Index>(
      16, static_cast<Eigen::Index>(6'000'000 / std::max<long long>(1, width)));
  chunk = std::min(chunk, std::max<Eigen::Index>(n, 1));

  const int out_dim = layer_count == 0 ? net.input_dim() : net.layers()[layer_count - 1].rows();
  Eigen::MatrixXd out(out_dim, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  for (Eigen::Index start = 0; start < n; start += chunk)
    ranges.emplace_back(start, std::min(chunk, n - start));
  if (ranges.empty()) return out;

  int hw = num_threads > 0 ? num_threads
                           : static_cast<int>(std::thread::hardware_concurrency());
  hw = std::max(1, std::min<int>(hw, static_cast<int>(ranges.size())));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    std::vector<double> buf_a(static_cast<std::size_t>(width) * chunk);
    std::vector<double> buf_b(static_cast<std::size_t>(width) * chunk);
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= ranges.size()) return;
      eval_block_range(net, points, ranges[i].first, ranges[i].second, layer_count, buf_a,
                       buf_b, out);
    }
  };
  if (hw == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < hw; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  return out;
}

}  // namespace

Eigen::VectorXd eval_network(const ReluNetwork& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw DimensionError("input shape does not match network input dimension");
  Eigen::VectorXd state = x;
  for (const SparseLayer& layer : net.layers()) {
    Eigen::VectorXd next = layer.bias();
    const auto& t = layer.triplets();
    const auto& ptr = layer.row_ptr();
    for (int r = 0; r < layer.rows(); ++r)
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) next[r] += t[k].value * state[t[k].col];
    if (layer.activation() == Activation::Relu) next = next.cwiseMax(0.0);
    state.swap(next);
  }
  for (int i = 0; i < state.size(); ++i)
    if (!std::isfinite(state[i])) throw NumericError("non-finite network output");
  return state;
}

Eigen::MatrixXd eval_batch(const ReluNetwork& net, const Eigen::MatrixXd& points,
                           int num_threads) {
  return eval_layers(net, points, net.depth(), num_threads);
}

Eigen::MatrixXd eval_prefix(const ReluNetwork& net, const Eigen::MatrixXd& points,
                            int layer_count, int num_threads) {
  return eval_layers(net, points, layer_count, num_threads);
}

namespace {

// Rewrites an identity-activation layer (v = Wx + b) as the ReLU lane pair
// (ReLU(v), ReLU(-v)); pass the result to expand_reader for the consumer.
SparseLayer lane_pair_layer(const SparseLayer& layer) {
  std::vector<Triplet> t;
  t.reserve(2 * layer.triplets().size());
  for (const Triplet& w : layer.triplets()) {
    t.push_back({w.row, w.col, w.value});
    t.push_back({w.row + layer.rows(), w.col, -w.value});
  }
  Eigen::VectorXd bias(2 * layer.rows());
  bias.head(layer.rows()) = layer.bias();
  bias.tail(layer.rows()) = -layer.bias();
  return SparseLayer(2 * layer.rows(), layer.cols(), std::move(t), std::move(bias),
                     Activation::Relu);
}

// Rewrites a layer reading v (dimension d) to read the lane pair instead:
// column j becomes columns (j, d + j) with weights (w, -w).
SparseLayer expand_reader(const SparseLayer& layer) {
  std::vector<Triplet> t;
  t.reserve(2 * layer.triplets().size());
  for (const Triplet& w : layer.triplets()) {
    t.push_back({w.row, w.col, w.value});
    t.push_back({w.row, w.col + layer.cols(), -w.value});
  }
  return SparseLayer(layer.rows(), 2 * layer.cols(), std::move(t), layer.bias(),
                     layer.activation());
}

}  // namespace

ReluNetwork compose_serial(const ReluNetwork& first, const ReluNetwork& second) {
  if (first.output_dim() != second.input_dim())
    throw DimensionError("composition dimension mismatch");
  std::vector<SparseLayer> layers(first.layers().begin(), first.layers().end());
  std::vector<SparseLayer> tail(second.layers().begin(), second.layers().end());
  if (layers.back().activation() == Activation::Identity) {
    layers.back() = lane_pair_layer(layers.back());
    tail.front() = expand_reader(tail.front());
  }
  layers.insert(layers.end(), tail.begin(), tail.end());
  return ReluNetwork(std::move(layers));
}

ReluNetwork pad_to_depth(const ReluNetwork& net, int depth) {
  if (depth < net.depth()) throw PreconditionError("pad_to_depth cannot shrink a network");
  if (depth == net.depth()) return net;
  const int extra = depth - net.depth();
  const int d = net.output_dim();
  std::vector<SparseLayer> layers(net.layers().begin(), net.layers().end());

  if (layers.back().activation() == Activation::Relu) {
    // Post-ReLU signals are nonnegative; identity wiring carries them exactly.
    for (int l = 0; l < extra; ++l) {
      std::vector<Triplet> t;
      for (int i = 0; i < d; ++i) t.push_back({i, i, 1.0});
      layers.emplace_back(d, d, std::move(t), Eigen::VectorXd::Zero(d), Activation::Relu);
    }
    return ReluNetwork(std::move(layers));
  }

  layers.back() = lane_pair_layer(layers.back());
  for (int l = 0; l < extra - 1; ++l) {
    // Each lane re-derives its value from the recombined signal:
    // p' = ReLU(p - q), q' = ReLU(q - p); exact since one lane is zero.
    std::vector<Triplet> t;
    for (int i = 0; i < d; ++i) {
      t.push_back({i, i, 1.0});
      t.push_back({i, d + i, -1.0});
      t.push_back({d + i, i, -1.0});
      t.push_back({d + i, d + i, 1.0});
    }
    layers.emplace_back(2 * d, 2 * d, std::move(t), Eigen::VectorXd::Zero(2 * d),
                        Activation::Relu);
  }

  std::vector<Triplet> rec;
  for (int i = 0; i < d; ++i) {
    rec.push_back({i, i, 1.0});
    rec.push_back({i, d + i, -1.0});
  }
  layers.emplace_back(d, 2 * d, std::move(rec), Eigen::VectorXd::Zero(d), Activation::Identity);
  return ReluNetwork(std::move(layers));
}

ReluNetwork stack_parallel(const std::vector<ReluNetwork>& nets) {
  if (nets.empty()) throw PreconditionError("stack_parallel needs at least one network");
  const int in_dim = nets.front().input_dim();
  int depth = 0;
  for (const ReluNetwork& n : nets) {
    if (n.input_dim() != in_dim) throw DimensionError("stacked networks must share input_dim");
    depth = std::max(depth, n.depth());
  }
  std::vector<ReluNetwork> padded;
  padded.reserve(nets.size());
  for (const ReluNetwork& n : nets) padded.push_back(pad_to_depth(n, depth));
  if (padded.size() == 1) return padded.front();

  std::vector<SparseLayer> layers;
  for (int l = 0; l < depth; ++l) {
    int row_off = 0;
    int col_off = 0;
    int rows = 0;
    int cols = l == 0 ? in_dim : 0;
    for (const ReluNetwork& n : padded) {
      rows += n.layers()[l].rows();
      if (l > 0) cols += n.layers()[l].cols();
    }
    std::vector<Triplet> t;
    Eigen::VectorXd bias(rows);
    const Activation act = padded.front().layers()[l].activation();
    for (const ReluNetwork& n : padded) {
      const SparseLayer& src = n.layers()[l];
      if (src.activation() != act)
        throw PreconditionError("stacked networks disagree on layer activation");
      for (const Triplet& w : src.triplets())
        t.push_back({w.row + row_off, w.col + (l == 0 ? 0 : col_off), w.value});
      bias.segment(row_off, src.rows()) = src.bias();
      row_off += src.rows();
      col_off += src.cols();
    }
    layers.emplace_back(rows, cols, std::move(t), std::move(bias), act);
  }
  return ReluNetwork(std::move(layers));
}

ReluNetwork from_affine(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias) {
  if (weights.rows() != bias.size()) throw DimensionError("affine shape mismatch");
  std::vector<Triplet> t;
  for (int r = 0; r < weights.rows(); ++r)
    for (int c = 0; c < weights.cols(); ++c) {
      check_finite(weights(r, c), "weight");
      if (weights(r, c) != 0.0) t.push_back({r, c, weights(r, c)});
    }
  return ReluNetwork({SparseLayer(static_cast<int>(weights.rows()),
                                  static_cast<int>(weights.cols()), std::move(t), bias,
                                  Activation::Identity)});
}

NetworkMeta measure_meta(const ReluNetwork& net) {
  NetworkMeta meta;
  meta.depth_L = net.depth();
  meta.output_bound_R = std::numeric_limits<double>::infinity();
  for (const SparseLayer& layer : net.layers()) {
    meta.width_p = std::max(meta.width_p, layer.rows());
    meta.nonzeros_K += static_cast<long long>(layer.triplets().size());
    for (const Triplet& t : layer.triplets())
      meta.weight_bound_kappa = std::max(meta.weight_bound_kappa, std::abs(t.value));
    for (int i = 0; i < layer.rows(); ++i) {
      if (layer.bias()[i] != 0.0) ++meta.nonzeros_K;
      meta.weight_bound_kappa = std::max(meta.weight_bound_kappa, std::abs(layer.bias()[i]));
    }
  }
  return meta;
}

int LayerAssembler::row(const std::vector<Term>& terms, double bias) {
  const int r = static_cast<int>(pending_bias_.size());
  for (const Term& term : terms) {
    if (term.lane < 0 || term.lane >= prev_dim_)
      throw DimensionError("assembler row reads a lane outside the previous layer");
    if (term.weight != 0.0) pending_.push_back({r, term.lane, term.weight});
  }
  pending_bias_.push_back(bias);
  return r;
}

void LayerAssembler::seal(Activation activation) {
  const int rows = static_cast<int>(pending_bias_.size());
  if (rows == 0) throw PreconditionError("cannot seal an empty layer");
  Eigen::VectorXd bias = Eigen::Map<Eigen::VectorXd>(pending_bias_.data(), rows);
  layers_.emplace_back(rows, prev_dim_, std::move(pending_), bias, activation);
  pending_.clear();
  pending_bias_.clear();
  prev_dim_ = rows;
}

ReluNetwork LayerAssembler::finish() {
  if (!pending_bias_.empty()) throw PreconditionError("unsealed rows left in assembler");
  return ReluNetwork(std::move(layers_));
}

}  // namespace chartnet
