#include "sqdqn/qnet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqdqn {

std::vector<double> square_augment(const std::vector<double>& state) {
  const std::size_t n = state.size();
  std::vector<double> out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = state[i];
    out[n + i] = state[i] * state[i];
  }
  return out;
}

Matrix square_augment_rows(const Matrix& states) {
  const int n = states.cols;
  Matrix out(states.rows, 2 * n);
  for (int b = 0; b < states.rows; ++b) {
    const double* src = states.row(b);
    double* dst = out.row(b);
    for (int i = 0; i < n; ++i) {
      dst[i] = src[i];
      dst[n + i] = src[i] * src[i];
    }
  }
  return out;
}

namespace {

void check_state_width(const QNetwork& qnet, int width) {
  if (width != qnet.state_dim) {
    throw std::invalid_argument("q_values: state width " + std::to_string(width) +
                                " != state_dim " + std::to_string(qnet.state_dim));
  }
}

// Raw states -> network input rows (scaling, then augmentation for smlp).
Matrix to_net_input(const QNetwork& qnet, const Matrix& raw_states) {
  check_state_width(qnet, raw_states.cols);
  Matrix scaled = raw_states;
  if (!qnet.state_scale.empty()) {
    for (int b = 0; b < scaled.rows; ++b) {
      double* r = scaled.row(b);
      for (int i = 0; i < scaled.cols; ++i) r[i] *= qnet.state_scale[i];
    }
  }
  if (qnet.kind == ApproximatorKind::Smlp) return square_augment_rows(scaled);
  return scaled;
}

}  // namespace

QNetwork build_qnet(ApproximatorKind kind, int state_dim, int n_actions, Rng& rng,
                    std::vector<double> state_scale) {
  if (state_dim <= 0 || n_actions <= 0) {
    throw std::invalid_argument("build_qnet: state_dim and n_actions must be positive");
  }
  if (!state_scale.empty() && static_cast<int>(state_scale.size()) != state_dim) {
    throw std::invalid_argument("build_qnet: state_scale size must match state_dim");
  }
  QNetwork q;
  q.kind = kind;
  q.state_dim = state_dim;
  q.n_actions = n_actions;
  q.state_scale = std::move(state_scale);
  const int in_dim = q.input_dim();
  q.net = make_network(in_dim, std::vector<int>(kHiddenLayers, kHiddenWidth), n_actions,
                       ActivationKind::Relu, rng);
  return q;
}

std::vector<double> q_values(const QNetwork& qnet, const std::vector<double>& raw_state) {
  Matrix row(1, static_cast<int>(raw_state.size()));
  row.data = raw_state;
  Matrix out = forward(qnet.net, to_net_input(qnet, row));
  return out.data;
}

Matrix q_values_rows(const QNetwork& qnet, const Matrix& raw_states) {
  return forward(qnet.net, to_net_input(qnet, raw_states));
}

double train_batch(QNetwork& qnet, const TrainBatch& batch, OptimizerState& opt) {
  const int n = batch.size();
  if (n == 0) throw std::invalid_argument("train_batch: empty batch");
  if (static_cast<int>(batch.actions.size()) != n ||
      static_cast<int>(batch.targets.size()) != n) {
    throw std::invalid_argument("train_batch: ragged batch");
  }
  for (int b = 0; b < n; ++b) {
    if (batch.actions[b] < 0 || batch.actions[b] >= qnet.n_actions) {
      throw std::invalid_argument("train_batch: action index " +
                                  std::to_string(batch.actions[b]) + " out of range");
    }
    if (!std::isfinite(batch.targets[b])) {
      throw std::runtime_error("train_batch: non-finite target");
    }
  }

  ForwardCache cache;
  Matrix pred = forward(qnet.net, to_net_input(qnet, batch.states), &cache);

  // Mean over the batch of (Q(s,a) - target)^2; the seed gradient is zero for
  // every output except the taken action.
  Matrix output_grad(n, qnet.n_actions, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (int b = 0; b < n; ++b) {
    const double d = pred(b, batch.actions[b]) - batch.targets[b];
    loss += d * d;
    output_grad(b, batch.actions[b]) = 2.0 * inv_n * d;
  }
  loss *= inv_n;
  if (!std::isfinite(loss)) throw std::runtime_error("train_batch: non-finite loss");

  ParamGrads grads = backward(qnet.net, cache, output_grad);
  rmsprop_step(qnet.net, grads, opt);
  return loss;
}

}  // namespace sqdqn
