#pragma once

#include <string>
#include <vector>

#include "sqdqn/rng.hpp"

namespace sqdqn {

// Dense row-major matrix of doubles. Batched activations use one row per
// sample.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

enum class ActivationKind { Relu, Sigmoid, Linear };

std::string to_string(ActivationKind kind);

// One dense layer: out = activation(weights * in + bias).
// weights is out_dim x in_dim.
struct Layer {
  Matrix weights;
  std::vector<double> bias;
  ActivationKind activation = ActivationKind::Linear;

  int in_dim() const { return weights.cols; }
  int out_dim() const { return weights.rows; }
};

// Feed-forward network. Layer dimensions must chain; validate() checks.
struct Network {
  int input_dim = 0;
  std::vector<Layer> layers;

  int output_dim() const { return layers.back().out_dim(); }
  void validate() const;
};

// Per-layer pre-activations and activations from a forward pass, retained
// for backward(). input holds the batch the pass was run on.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& output() const { return post.back(); }
};

// Gradients with the same shapes as the network parameters.
struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static ParamGrads zeros_like(const Network& net);
};

// RMSProp state: one mean-square accumulator per parameter.
//   mean_square <- decay * mean_square + (1 - decay) * grad^2
//   param       <- param - lr * grad / (sqrt(mean_square) + epsilon)
struct OptimizerState {
  double learning_rate = 1e-3;
  double decay = 0.95;
  double epsilon = 1e-8;
  std::vector<Matrix> weight_ms;
  std::vector<std::vector<double>> bias_ms;

  OptimizerState() = default;
  OptimizerState(const Network& net, double lr, double decay_, double eps);
};

// Batched forward pass; input has one sample per row. If cache is non-null
// it is filled for a later backward(). Throws std::invalid_argument on a
// dimension mismatch, naming the offending layer.
Matrix forward(const Network& net, const Matrix& input, ForwardCache* cache = nullptr);

// Single-sample convenience overload.
std::vector<double> forward(const Network& net, const std::vector<double>& input,
                            ForwardCache* cache = nullptr);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean squared error: loss = (1/n) sum (pred - target)^2, grad w.r.t. pred.
LossResult mse_loss(const std::vector<double>& pred, const std::vector<double>& target);

// Backpropagation through the cached forward pass. output_grad is dLoss/dOutput
// with one row per sample; gradients from the rows are summed. The out-param
// overload reuses the gradient buffers.
void backward(const Network& net, const ForwardCache& cache, const Matrix& output_grad,
              ParamGrads& grads);
ParamGrads backward(const Network& net, const ForwardCache& cache, const Matrix& output_grad);
ParamGrads backward(const Network& net, const ForwardCache& cache,
                    const std::vector<double>& output_grad);

// One RMSProp update, in place. Throws on non-finite gradients (training
// divergence signal).
void rmsprop_step(Network& net, const ParamGrads& grads, OptimizerState& state);

// Weights drawn from uniform(-scale, scale). Biases are initialised to zero
// elsewhere; this covers the weight matrices.
inline constexpr double kWeightInitScale = 0.01;

Matrix init_weights(int rows, int cols, Rng& rng, double scale = kWeightInitScale);

// Dense network with the given hidden widths, hidden activation per
// `hidden`, linear output, zero biases.
Network make_network(int input_dim, const std::vector<int>& hidden_widths, int output_dim,
                     ActivationKind hidden, Rng& rng, double init_scale = kWeightInitScale);

}  // namespace sqdqn
