#include "sqdqn/net.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace sqdqn {

namespace {

// Pre-activations outside [-500, 500] are clamped before exponentiation so a
// runaway unit saturates instead of producing inf/nan.
double sigmoid(double z) {
  if (z > 500.0) z = 500.0;
  if (z < -500.0) z = -500.0;
  return 1.0 / (1.0 + std::exp(-z));
}

void apply_activation(ActivationKind kind, Matrix& m) {
  switch (kind) {
    case ActivationKind::Relu:
      for (double& v : m.data) v = v > 0.0 ? v : 0.0;
      break;
    case ActivationKind::Sigmoid:
      for (double& v : m.data) v = sigmoid(v);
      break;
    case ActivationKind::Linear:
      break;
  }
}

// dz = g * activation'(pre), written into dz. For sigmoid the derivative is
// reconstructed from the post-activation value s(1-s).
void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& g, Matrix& dz) {
  const std::size_t n = g.data.size();
  dz.rows = g.rows;
  dz.cols = g.cols;
  dz.data.resize(n);
  switch (kind) {
    case ActivationKind::Relu:
      for (std::size_t i = 0; i < n; ++i) dz.data[i] = pre.data[i] > 0.0 ? g.data[i] : 0.0;
      break;
    case ActivationKind::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double s = post.data[i];
        dz.data[i] = g.data[i] * s * (1.0 - s);
      }
      break;
    case ActivationKind::Linear:
      dz.data = g.data;
      break;
  }
}

void resize(Matrix& m, int rows, int cols) {
  m.rows = rows;
  m.cols = cols;
  m.data.resize(static_cast<std::size_t>(rows) * cols);
}

}  // namespace

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Linear: return "linear";
  }
  return "?";
}

void Network::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  if (input_dim <= 0) throw std::invalid_argument("network input_dim must be positive");
  int dim = input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.weights.cols != dim) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": expected fan-in " +
                                  std::to_string(dim) + ", got " +
                                  std::to_string(layer.weights.cols));
    }
    if (static_cast<int>(layer.bias.size()) != layer.weights.rows) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": bias size " +
                                  std::to_string(layer.bias.size()) + " != out dim " +
                                  std::to_string(layer.weights.rows));
    }
    dim = layer.weights.rows;
  }
}

ParamGrads ParamGrads::zeros_like(const Network& net) {
  ParamGrads g;
  g.weights.reserve(net.layers.size());
  g.biases.reserve(net.layers.size());
  for (const Layer& layer : net.layers) {
    g.weights.emplace_back(layer.out_dim(), layer.in_dim());
    g.biases.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

OptimizerState::OptimizerState(const Network& net, double lr, double decay_, double eps)
    : learning_rate(lr), decay(decay_), epsilon(eps) {
  for (const Layer& layer : net.layers) {
    weight_ms.emplace_back(layer.out_dim(), layer.in_dim());
    bias_ms.emplace_back(layer.bias.size(), 0.0);
  }
}

Matrix forward(const Network& net, const Matrix& input, ForwardCache* cache) {
  if (input.cols != net.input_dim) {
    throw std::invalid_argument("forward: input width " + std::to_string(input.cols) +
                                " != network input_dim " + std::to_string(net.input_dim));
  }
  const int batch = input.rows;
  const std::size_t n_layers = net.layers.size();

  if (cache != nullptr) {
    cache->input = input;
    cache->pre.resize(n_layers);
    cache->post.resize(n_layers);
  }

  Matrix scratch_t;  // transposed weights for the batched path
  Matrix cur = input;
  Matrix z;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = net.layers[l];
    if (layer.weights.cols != cur.cols) {
      throw std::invalid_argument("forward: layer " + std::to_string(l) + " expects fan-in " +
                                  std::to_string(layer.weights.cols) + ", got " +
                                  std::to_string(cur.cols));
    }
    const int in_dim = layer.in_dim();
    const int out_dim = layer.out_dim();
    resize(z, batch, out_dim);

    for (int b = 0; b < batch; ++b) {
      double* zr = z.row(b);
      for (int o = 0; o < out_dim; ++o) zr[o] = layer.bias[o];
    }

    if (batch == 1) {
      // Dot-product form; same k-ascending accumulation order as below.
      const double* x = cur.row(0);
      double* zr = z.row(0);
      for (int o = 0; o < out_dim; ++o) {
        const double* w = layer.weights.row(o);
        double acc = zr[o];
        for (int k = 0; k < in_dim; ++k) acc += x[k] * w[k];
        zr[o] = acc;
      }
    } else {
      // z[b][o] += x[b][k] * W[o][k], accumulated in k order. Transposing W
      // makes the inner loop a contiguous axpy over the output dimension.
      resize(scratch_t, in_dim, out_dim);
      for (int o = 0; o < out_dim; ++o) {
        const double* w = layer.weights.row(o);
        for (int k = 0; k < in_dim; ++k) scratch_t(k, o) = w[k];
      }
      for (int k = 0; k < in_dim; ++k) {
        const double* wt = scratch_t.row(k);
        for (int b = 0; b < batch; ++b) {
          const double xk = cur(b, k);
          double* zr = z.row(b);
          for (int o = 0; o < out_dim; ++o) zr[o] += xk * wt[o];
        }
      }
    }

    if (cache != nullptr) cache->pre[l] = z;
    apply_activation(layer.activation, z);
    if (cache != nullptr) cache->post[l] = z;
    cur = std::move(z);
    z = Matrix();
  }
  return cur;
}

std::vector<double> forward(const Network& net, const std::vector<double>& input,
                            ForwardCache* cache) {
  Matrix in(1, static_cast<int>(input.size()));
  in.data = input;
  Matrix out = forward(net, in, cache);
  return out.data;
}

LossResult mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("mse_loss: length mismatch (" + std::to_string(pred.size()) +
                                " vs " + std::to_string(target.size()) + ")");
  }
  if (pred.empty()) throw std::invalid_argument("mse_loss: empty vectors");
  LossResult r;
  r.grad.resize(pred.size());
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
    r.grad[i] = 2.0 * inv_n * d;
  }
  r.loss = acc * inv_n;
  return r;
}

void backward(const Network& net, const ForwardCache& cache, const Matrix& output_grad,
              ParamGrads& grads) {
  const std::size_t n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.post.size() != n_layers) {
    throw std::invalid_argument("backward: cache does not match network depth");
  }
  if (output_grad.rows != cache.input.rows || output_grad.cols != net.output_dim()) {
    throw std::invalid_argument("backward: output_grad shape mismatch");
  }
  if (cache.input.cols != net.input_dim) {
    throw std::invalid_argument("backward: cached input does not match network input_dim");
  }

  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);

  const int batch = output_grad.rows;
  Matrix g = output_grad;
  Matrix dz;
  Matrix g_prev;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Layer& layer = net.layers[li];
    const int in_dim = layer.in_dim();
    const int out_dim = layer.out_dim();
    if (cache.pre[li].rows != batch || cache.pre[li].cols != out_dim) {
      throw std::invalid_argument("backward: cache layer " + std::to_string(li) +
                                  " shape mismatch (stale cache?)");
    }
    const Matrix& input_rows = (li == 0) ? cache.input : cache.post[li - 1];

    activation_backward(layer.activation, cache.pre[li], cache.post[li], g, dz);

    Matrix& dw = grads.weights[li];
    resize(dw, out_dim, in_dim);
    std::fill(dw.data.begin(), dw.data.end(), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      double* dwr = dw.row(o);
      for (int b = 0; b < batch; ++b) {
        const double s = dz(b, o);
        const double* x = input_rows.row(b);
        for (int i = 0; i < in_dim; ++i) dwr[i] += s * x[i];
      }
    }

    std::vector<double>& db = grads.biases[li];
    db.assign(out_dim, 0.0);
    for (int b = 0; b < batch; ++b) {
      const double* dzr = dz.row(b);
      for (int o = 0; o < out_dim; ++o) db[o] += dzr[o];
    }

    if (li > 0) {
      resize(g_prev, batch, in_dim);
      std::fill(g_prev.data.begin(), g_prev.data.end(), 0.0);
      for (int o = 0; o < out_dim; ++o) {
        const double* w = layer.weights.row(o);
        for (int b = 0; b < batch; ++b) {
          const double s = dz(b, o);
          double* gp = g_prev.row(b);
          for (int i = 0; i < in_dim; ++i) gp[i] += s * w[i];
        }
      }
      g = std::move(g_prev);
      g_prev = Matrix();
    }
  }
}

ParamGrads backward(const Network& net, const ForwardCache& cache, const Matrix& output_grad) {
  ParamGrads grads;
  backward(net, cache, output_grad, grads);
  return grads;
}

ParamGrads backward(const Network& net, const ForwardCache& cache,
                    const std::vector<double>& output_grad) {
  Matrix g(1, static_cast<int>(output_grad.size()));
  g.data = output_grad;
  return backward(net, cache, g);
}

void rmsprop_step(Network& net, const ParamGrads& grads, OptimizerState& state) {
  if (grads.weights.size() != net.layers.size() || state.weight_ms.size() != net.layers.size()) {
    throw std::invalid_argument("rmsprop_step: gradient/state layer count mismatch");
  }
  const double lr = state.learning_rate;
  const double decay = state.decay;
  const double one_minus_decay = 1.0 - decay;
  const double eps = state.epsilon;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    const Matrix& gw = grads.weights[l];
    if (!gw.same_shape(layer.weights) || grads.biases[l].size() != layer.bias.size()) {
      throw std::invalid_argument("rmsprop_step: gradient shape mismatch at layer " +
                                  std::to_string(l));
    }
    Matrix& ms = state.weight_ms[l];
    for (std::size_t i = 0; i < gw.data.size(); ++i) {
      const double g = gw.data[i];
      if (!std::isfinite(g)) {
        throw std::runtime_error("rmsprop_step: non-finite weight gradient at layer " +
                                 std::to_string(l));
      }
      const double m = decay * ms.data[i] + one_minus_decay * g * g;
      ms.data[i] = m;
      layer.weights.data[i] -= lr * g / (std::sqrt(m) + eps);
    }
    std::vector<double>& msb = state.bias_ms[l];
    const std::vector<double>& gb = grads.biases[l];
    for (std::size_t i = 0; i < gb.size(); ++i) {
      const double g = gb[i];
      if (!std::isfinite(g)) {
        throw std::runtime_error("rmsprop_step: non-finite bias gradient at layer " +
                                 std::to_string(l));
      }
      const double m = decay * msb[i] + one_minus_decay * g * g;
      msb[i] = m;
      layer.bias[i] -= lr * g / (std::sqrt(m) + eps);
    }
  }
}

Matrix init_weights(int rows, int cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

Network make_network(int input_dim, const std::vector<int>& hidden_widths, int output_dim,
                     ActivationKind hidden, Rng& rng, double init_scale) {
  if (input_dim <= 0 || output_dim <= 0) {
    throw std::invalid_argument("make_network: dimensions must be positive");
  }
  for (int w : hidden_widths) {
    if (w <= 0) throw std::invalid_argument("make_network: hidden width must be positive");
  }
  Network net;
  net.input_dim = input_dim;
  int in = input_dim;
  for (int w : hidden_widths) {
    Layer layer;
    layer.weights = init_weights(w, in, rng, init_scale);
    layer.bias.assign(w, 0.0);
    layer.activation = hidden;
    net.layers.push_back(std::move(layer));
    in = w;
  }
  Layer out;
  out.weights = init_weights(output_dim, in, rng, init_scale);
  out.bias.assign(output_dim, 0.0);
  out.activation = ActivationKind::Linear;
  net.layers.push_back(std::move(out));
  net.validate();
  return net;
}

}  // namespace sqdqn
