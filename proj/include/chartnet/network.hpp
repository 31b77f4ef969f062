#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace chartnet {

enum class Activation { Relu, Identity };

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// One affine stage W x + b followed by an entrywise activation. Weights are
// stored as coordinate triplets sorted by (row, col) with duplicates and
// explicit zeros rejected, so nonzero counts and serialization are exact.
class SparseLayer {
 public:
  SparseLayer(int rows, int cols, std::vector<Triplet> triplets, Eigen::VectorXd bias,
              Activation activation);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Triplet>& triplets() const { return triplets_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  Activation activation() const { return activation_; }

  // CSR view used by the evaluator; accumulation follows triplet order.
  const std::vector<int>& row_ptr() const { return row_ptr_; }

 private:
  int rows_;
  int cols_;
  std::vector<Triplet> triplets_;
  Eigen::VectorXd bias_;
  Activation activation_;
  std::vector<int> row_ptr_;
};

// Feed-forward network of sparse affine+activation layers. Immutable after
// construction; evaluation is pure and safe to call concurrently. Only the
// final layer may carry the identity activation.
class ReluNetwork {
 public:
  explicit ReluNetwork(std::vector<SparseLayer> layers);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  const std::vector<SparseLayer>& layers() const { return layers_; }

 private:
  std::vector<SparseLayer> layers_;
  int input_dim_;
  int output_dim_;
};

struct NetworkMeta {
  int depth_L = 0;
  int width_p = 0;
  long long nonzeros_K = 0;
  double weight_bound_kappa = 0.0;
  double output_bound_R = 0.0;  // +inf when unbounded
};

// Forward pass in 64-bit arithmetic; throws DimensionError on shape mismatch
// and NumericError if an intermediate value is not finite.
Eigen::VectorXd eval_network(const ReluNetwork& net, const Eigen::VectorXd& x);

// Column-per-point batch evaluation. Bitwise identical to eval_network on
// each column; work is chunked and may be spread over threads.
Eigen::MatrixXd eval_batch(const ReluNetwork& net, const Eigen::MatrixXd& points,
                           int num_threads = 0);

// Batch evaluation stopping after `layer_count` layers (activation included);
// used to read the inputs of the final affine stage.
Eigen::MatrixXd eval_prefix(const ReluNetwork& net, const Eigen::MatrixXd& points,
                            int layer_count, int num_threads = 0);

// eval(compose_serial(a, b), x) == eval(b, eval(a, x)). When `first` ends in
// a ReLU layer the layer lists are concatenated unchanged. When it ends in an
// identity layer, that layer is rewritten as the lane pair
// (ReLU(v), ReLU(-v)) and `second`'s first layer reads v back as the
// difference of the lanes, which reproduces v exactly in 64-bit arithmetic.
ReluNetwork compose_serial(const ReluNetwork& first, const ReluNetwork& second);

// Shared input, block-diagonal layers, concatenated outputs. Members are
// depth-aligned with pad_to_depth first.
ReluNetwork stack_parallel(const std::vector<ReluNetwork>& nets);

// Extends the network to the requested depth without changing its function.
// The final affine layer is split into the lane pair (ReLU(v), ReLU(-v)),
// carried through the added layers, and recombined with weights (+1, -1).
ReluNetwork pad_to_depth(const ReluNetwork& net, int depth);

// Single identity-activation layer computing W x + b.
ReluNetwork from_affine(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias);

NetworkMeta measure_meta(const ReluNetwork& net);

// Incremental builder used by the gadget constructors: rows are queued for
// the current layer and sealed with an activation.
class LayerAssembler {
 public:
  explicit LayerAssembler(int input_dim) : input_dim_(input_dim), prev_dim_(input_dim) {}

  struct Term {
    int lane;
    double weight;
  };

  // Queue one row of the current layer; returns the lane index the row will
  // occupy after the layer is sealed. Zero weights are dropped.
  int row(const std::vector<Term>& terms, double bias = 0.0);
  void seal(Activation activation);

  int pending_rows() const { return static_cast<int>(pending_bias_.size()); }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  ReluNetwork finish();

 private:
  int input_dim_;
  int prev_dim_;
  std::vector<Triplet> pending_;
  std::vector<double> pending_bias_;
  std::vector<SparseLayer> layers_;
};

}  // namespace chartnet
