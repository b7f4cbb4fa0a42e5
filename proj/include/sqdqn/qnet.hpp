#pragma once

#include <vector>

#include "sqdqn/net.hpp"
#include "sqdqn/rng.hpp"

namespace sqdqn {

// mlp feeds raw states to the network; smlp appends elementwise squares,
// doubling the input dimension.
enum class ApproximatorKind { Mlp, Smlp };

// [x1..xn] -> [x1..xn, x1^2..xn^2], originals first.
std::vector<double> square_augment(const std::vector<double>& state);
Matrix square_augment_rows(const Matrix& states);

// Action-value network: one output per action, linear output layer.
// state_scale, when non-empty, rescales each raw state component before any
// augmentation (off by default; experiment knob).
struct QNetwork {
  ApproximatorKind kind = ApproximatorKind::Mlp;
  int state_dim = 0;
  int n_actions = 0;
  Network net;
  std::vector<double> state_scale;

  int input_dim() const { return kind == ApproximatorKind::Smlp ? 2 * state_dim : state_dim; }
};

inline constexpr int kHiddenWidth = 256;
inline constexpr int kHiddenLayers = 2;

// Standard architecture: state -> 256 -> 256 -> n_actions, ReLU hidden
// layers, linear output. The smlp variant doubles the first layer's fan-in.
QNetwork build_qnet(ApproximatorKind kind, int state_dim, int n_actions, Rng& rng,
                    std::vector<double> state_scale = {});

// Q(s, .) for a raw (unaugmented) state; one value per action.
std::vector<double> q_values(const QNetwork& qnet, const std::vector<double>& raw_state);
// Batched variant, one raw state per row.
Matrix q_values_rows(const QNetwork& qnet, const Matrix& raw_states);

// One training example: Q(state, action) should move toward target.
struct TrainBatch {
  Matrix states;  // raw states, one per row
  std::vector<int> actions;
  std::vector<double> targets;

  int size() const { return states.rows; }
};

// One RMSProp step on the mean per-sample squared error. The error is applied
// only to each sample's taken-action output; other outputs get zero error.
// Returns the mean loss. Throws on out-of-range actions or non-finite values.
double train_batch(QNetwork& qnet, const TrainBatch& batch, OptimizerState& opt);

}  // namespace sqdqn
