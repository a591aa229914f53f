#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lognet/core_data.hpp"
#include "lognet/error.hpp"
#include "lognet/gates.hpp"
#include "lognet/rng.hpp"

namespace lognet {

// Fully connected layer; weights are row-major [inputs x outputs].
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out) : inputs(in), outputs(out), weights(in * out, 0.0), biases(out, 0.0) {}

  double& w(std::size_t i, std::size_t o) { return weights[i * outputs + o]; }
  double w(std::size_t i, std::size_t o) const { return weights[i * outputs + o]; }
  std::size_t param_count() const noexcept { return weights.size() + biases.size(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Linear softmax classifier over LogNet latent bits.
struct SoftmaxModel {
  DenseLayer head;
  std::vector<RpId> class_labels;  // sorted, distinct; output k predicts class_labels[k]

  std::size_t latent_dim() const noexcept { return head.inputs; }
  std::size_t num_classes() const noexcept { return head.outputs; }

  friend bool operator==(const SoftmaxModel&, const SoftmaxModel&) = default;
};

// DNN-DownSample: ReLU hidden layers of halving width, then a softmax output.
struct DnnModel {
  std::vector<DenseLayer> layers;
  std::vector<std::size_t> widths;  // [input, h1, ..., hH, classes]
  std::vector<RpId> class_labels;

  std::size_t input_dim() const noexcept { return widths.empty() ? 0 : widths.front(); }
  std::size_t num_classes() const noexcept { return widths.empty() ? 0 : widths.back(); }
  int hidden_layers() const noexcept { return layers.empty() ? 0 : static_cast<int>(layers.size()) - 1; }

  friend bool operator==(const DnnModel&, const DnnModel&) = default;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamParams&, const AdamParams&) = default;
};

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 150;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;  // 0 selects full-batch
  AdamParams adam;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be > 0, got " + std::to_string(learning_rate));
    if (epochs < 0) throw ConfigError("epochs must be >= 0, got " + std::to_string(epochs));
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

template <typename Model>
struct TrainResult {
  Model model;
  std::vector<double> loss_history;  // mean cross-entropy per epoch, before that epoch's updates
};

// Serialized parameters are float32, as in a deployed model.
inline constexpr std::size_t kBytesPerParam = 4;

inline std::size_t count_params(const SoftmaxModel& m) { return m.head.param_count(); }

inline std::size_t count_params(const DnnModel& m) {
  std::size_t total = 0;
  for (const auto& layer : m.layers) total += layer.param_count();
  return total;
}

template <typename Model>
std::size_t model_size_bytes(const Model& m) {
  return count_params(m) * kBytesPerParam;
}

// Halving rule: h_k = ceil(h_{k-1} / 2) starting from the input width.
inline std::vector<std::size_t> downsample_widths(std::size_t input_dim, int hidden_layers, std::size_t num_classes) {
  std::vector<std::size_t> widths{input_dim};
  for (int k = 0; k < hidden_layers; ++k) widths.push_back((widths.back() + 1) / 2);
  widths.push_back(num_classes);
  return widths;
}

namespace detail {

inline void init_layer(DenseLayer& layer, Rng& rng, bool feeds_relu) {
  const double fan_in = static_cast<double>(std::max<std::size_t>(layer.inputs, 1));
  const double limit = feeds_relu ? std::sqrt(6.0 / fan_in) : 1.0 / std::sqrt(fan_in);
  for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
  std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
}

// out[b, o] = bias[o] + sum_i in[b, i] * w[i, o]
inline void dense_forward(const DenseLayer& layer, std::span<const double> in, std::size_t batch,
                          std::vector<double>& out) {
  out.assign(batch * layer.outputs, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = out.data() + b * layer.outputs;
    std::copy(layer.biases.begin(), layer.biases.end(), row);
    const double* x = in.data() + b * layer.inputs;
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* wrow = layer.weights.data() + i * layer.outputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) row[o] += xi * wrow[o];
    }
  }
}

// In-place row-wise softmax with max shift; returns sum of -log p[label].
inline double softmax_rows(std::vector<double>& logits, std::size_t batch, std::size_t classes,
                           std::span<const std::size_t> labels = {}) {
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = logits.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    const double log_sum = mx + std::log(sum);
    if (!labels.empty()) loss += log_sum - row[labels[b]];
    for (std::size_t c = 0; c < classes; ++c) row[c] = std::exp(row[c] - log_sum);
  }
  return loss;
}

struct ForwardCache {
  std::vector<std::vector<double>> activations;  // activations[0] is the input, last is probabilities
};

inline double forward(std::span<const DenseLayer> layers, std::span<const double> input, std::size_t batch,
                      ForwardCache& cache, std::span<const std::size_t> labels = {}) {
  cache.activations.resize(layers.size() + 1);
  cache.activations[0].assign(input.begin(), input.end());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    dense_forward(layers[k], cache.activations[k], batch, cache.activations[k + 1]);
    if (k + 1 < layers.size()) {
      for (auto& v : cache.activations[k + 1]) v = std::max(v, 0.0);
    }
  }
  return softmax_rows(cache.activations.back(), batch, layers.back().outputs, labels);
}

// Gradients of the mean cross-entropy over the batch.
inline std::vector<DenseLayer> backward(std::span<const DenseLayer> layers, const ForwardCache& cache,
                                        std::size_t batch, std::span<const std::size_t> labels) {
  std::vector<DenseLayer> grads;
  grads.reserve(layers.size());
  for (const auto& l : layers) grads.emplace_back(l.inputs, l.outputs);

  const double scale = 1.0 / static_cast<double>(batch);
  std::vector<double> delta = cache.activations.back();
  const std::size_t classes = layers.back().outputs;
  for (std::size_t b = 0; b < batch; ++b) delta[b * classes + labels[b]] -= 1.0;
  for (auto& d : delta) d *= scale;

  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    auto& g = grads[k];
    const auto& a_prev = cache.activations[k];
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.data() + b * layer.outputs;
      const double* a = a_prev.data() + b * layer.inputs;
      for (std::size_t o = 0; o < layer.outputs; ++o) g.biases[o] += d[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* grow = g.weights.data() + i * layer.outputs;
        for (std::size_t o = 0; o < layer.outputs; ++o) grow[o] += ai * d[o];
      }
    }
    if (k == 0) break;
    std::vector<double> prev(batch * layer.inputs, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.data() + b * layer.outputs;
      const double* a = a_prev.data() + b * layer.inputs;
      double* p = prev.data() + b * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        if (a[i] <= 0.0) continue;  // ReLU derivative
        const double* wrow = layer.weights.data() + i * layer.outputs;
        double acc = 0.0;
        for (std::size_t o = 0; o < layer.outputs; ++o) acc += wrow[o] * d[o];
        p[i] = acc;
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

class Adam {
 public:
  Adam(std::span<const DenseLayer> layers, double lr, AdamParams p) : lr_(lr), p_(p) {
    for (const auto& l : layers) {
      m_.emplace_back(l.inputs, l.outputs);
      v_.emplace_back(l.inputs, l.outputs);
    }
  }

  void step(std::span<DenseLayer> layers, std::span<const DenseLayer> grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < layers.size(); ++k) {
      update(layers[k].weights, grads[k].weights, m_[k].weights, v_[k].weights, c1, c2);
      update(layers[k].biases, grads[k].biases, m_[k].biases, v_[k].biases, c1, c2);
    }
  }

 private:
  void update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
              std::vector<double>& v, double c1, double c2) const {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = p_.beta1 * m[i] + (1.0 - p_.beta1) * grad[i];
      v[i] = p_.beta2 * v[i] + (1.0 - p_.beta2) * grad[i] * grad[i];
      param[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + p_.epsilon);
    }
  }

  double lr_;
  AdamParams p_;
  std::uint64_t t_ = 0;
  std::vector<DenseLayer> m_, v_;
};

// Row-major [n x dim] design matrix plus class indices.
struct Batch {
  std::vector<double> x;
  std::vector<std::size_t> y;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return y.size(); }
};

inline std::vector<std::size_t> class_indices(std::span<const RpId> labels, std::span<const RpId> classes) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (RpId label : labels) {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw ValidationError("label " + std::to_string(label) + " is not in the class set");
    out.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  return out;
}

inline std::vector<RpId> sorted_classes(std::span<const RpId> labels) {
  std::vector<RpId> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

inline void validate_classes(std::span<const RpId> classes) {
  if (classes.empty()) throw ValidationError("class set is empty");
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (!(classes[i - 1] < classes[i])) throw ValidationError("class labels must be sorted and distinct");
}

// Runs Adam over the layers; deterministic for a fixed seed.
inline std::vector<double> fit(std::vector<DenseLayer>& layers, const Batch& data, const TrainConfig& cfg) {
  std::vector<double> history;
  if (cfg.epochs == 0) return history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  Adam adam(layers, cfg.learning_rate, cfg.adam);

  const std::size_t n = data.size();
  const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> bx;
  std::vector<std::size_t> by;
  ForwardCache cache;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (bs < n) {
      Rng rng(derive_seed(cfg.seed, 2 + static_cast<std::uint64_t>(epoch)));
      rng.shuffle(order.begin(), order.end());
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      std::span<const double> xs;
      std::span<const std::size_t> ys;
      if (bs == n) {
        xs = data.x;
        ys = data.y;
      } else {
        bx.resize(count * data.dim);
        by.resize(count);
        for (std::size_t r = 0; r < count; ++r) {
          const std::size_t src = order[start + r];
          std::copy_n(data.x.begin() + static_cast<std::ptrdiff_t>(src * data.dim), data.dim,
                      bx.begin() + static_cast<std::ptrdiff_t>(r * data.dim));
          by[r] = data.y[src];
        }
        xs = bx;
        ys = by;
      }
      epoch_loss += forward(layers, xs, count, cache, ys);
      const auto grads = backward(layers, cache, count, ys);
      adam.step(layers, grads);
    }
    history.push_back(epoch_loss / static_cast<double>(n));
  }
  return history;
}

}  // namespace detail

inline std::vector<double> latent_as_features(const LatentCode& latent) {
  return std::vector<double>(latent.bits.begin(), latent.bits.end());
}

inline std::vector<double> softmax_forward(const SoftmaxModel& m, std::span<const double> features) {
  if (features.size() != m.latent_dim())
    throw ShapeError("softmax head expects " + std::to_string(m.latent_dim()) + " inputs, got " +
                     std::to_string(features.size()));
  detail::ForwardCache cache;
  detail::forward(std::span<const DenseLayer>(&m.head, 1), features, 1, cache);
  return std::move(cache.activations.back());
}

inline std::vector<double> softmax_forward(const SoftmaxModel& m, const LatentCode& latent) {
  return softmax_forward(m, latent_as_features(latent));
}

inline std::vector<double> dnn_forward(const DnnModel& m, std::span<const double> normalized) {
  if (m.layers.empty()) throw ShapeError("DNN has no layers");
  if (normalized.size() != m.input_dim())
    throw ShapeError("DNN expects " + std::to_string(m.input_dim()) + " inputs, got " +
                     std::to_string(normalized.size()));
  detail::ForwardCache cache;
  detail::forward(m.layers, normalized, 1, cache);
  return std::move(cache.activations.back());
}

// Activations of the last hidden layer (the DNN's continuous latent space).
inline std::vector<double> dnn_latent(const DnnModel& m, std::span<const double> normalized) {
  if (m.layers.size() < 2) throw ShapeError("DNN has no hidden layer");
  if (normalized.size() != m.input_dim())
    throw ShapeError("DNN expects " + std::to_string(m.input_dim()) + " inputs, got " +
                     std::to_string(normalized.size()));
  detail::ForwardCache cache;
  detail::forward(m.layers, normalized, 1, cache);
  return std::move(cache.activations[m.layers.size() - 1]);
}

inline std::size_t argmax(std::span<const double> probs) {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

inline SoftmaxModel init_softmax(std::size_t latent_dim, std::vector<RpId> classes, std::uint64_t seed) {
  detail::validate_classes(classes);
  SoftmaxModel m{DenseLayer(latent_dim, classes.size()), std::move(classes)};
  Rng rng(derive_seed(seed, 1));
  detail::init_layer(m.head, rng, false);
  return m;
}

inline DnnModel init_dnn(std::size_t input_dim, int hidden_layers, std::vector<RpId> classes, std::uint64_t seed) {
  if (hidden_layers < 1) throw ConfigError("DNN needs at least one hidden layer");
  if (input_dim == 0) throw ShapeError("DNN input dimension must be positive");
  detail::validate_classes(classes);
  DnnModel m;
  m.widths = downsample_widths(input_dim, hidden_layers, classes.size());
  m.class_labels = std::move(classes);
  Rng rng(derive_seed(seed, 1));
  for (std::size_t k = 0; k + 1 < m.widths.size(); ++k) {
    m.layers.emplace_back(m.widths[k], m.widths[k + 1]);
    detail::init_layer(m.layers.back(), rng, k + 2 < m.widths.size());
  }
  // First-layer biases center each unit on the midpoint of the [0, 1] input cube.
  auto& first = m.layers.front();
  if (m.layers.size() > 1) {
    for (std::size_t o = 0; o < first.outputs; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < first.inputs; ++i) s += first.w(i, o);
      first.biases[o] = -0.5 * s;
    }
  }
  return m;
}

inline TrainResult<SoftmaxModel> train_softmax(std::span<const LatentCode> latents, std::span<const RpId> labels,
                                               std::vector<RpId> classes, const TrainConfig& cfg) {
  cfg.validate();
  if (latents.empty()) throw TrainingError("empty training set");
  if (latents.size() != labels.size())
    throw ValidationError(std::to_string(latents.size()) + " latents but " + std::to_string(labels.size()) +
                          " labels");
  detail::Batch data;
  data.dim = latents.front().size();
  data.y = detail::class_indices(labels, classes);
  data.x.reserve(latents.size() * data.dim);
  for (const auto& l : latents) {
    if (l.size() != data.dim) throw ShapeError("latent codes have differing lengths");
    data.x.insert(data.x.end(), l.bits.begin(), l.bits.end());
  }
  SoftmaxModel model = init_softmax(data.dim, std::move(classes), cfg.seed);
  std::vector<DenseLayer> layers{std::move(model.head)};
  auto history = detail::fit(layers, data, cfg);
  model.head = std::move(layers.front());
  return {std::move(model), std::move(history)};
}

inline TrainResult<SoftmaxModel> train_softmax(std::span<const LatentCode> latents, std::span<const RpId> labels,
                                               const TrainConfig& cfg) {
  return train_softmax(latents, labels, detail::sorted_classes(labels), cfg);
}

// `normalized` must hold values in [0, 1] (see normalize()).
inline TrainResult<DnnModel> train_dnn(const Dataset& normalized, int hidden_layers, std::vector<RpId> classes,
                                       const TrainConfig& cfg) {
  cfg.validate();
  if (hidden_layers < 1) throw ConfigError("DNN needs at least one hidden layer");
  if (normalized.empty()) throw TrainingError("empty training set");
  detail::Batch data;
  data.dim = normalized.ap_count();
  std::vector<RpId> labels;
  for (const auto& fp : normalized) {
    labels.push_back(fp.rp_id);
    data.x.insert(data.x.end(), fp.rss.begin(), fp.rss.end());
  }
  data.y = detail::class_indices(labels, classes);
  DnnModel model = init_dnn(data.dim, hidden_layers, std::move(classes), cfg.seed);
  auto history = detail::fit(model.layers, data, cfg);
  return {std::move(model), std::move(history)};
}

inline TrainResult<DnnModel> train_dnn(const Dataset& normalized, int hidden_layers, const TrainConfig& cfg) {
  std::vector<RpId> labels;
  for (const auto& fp : normalized) labels.push_back(fp.rp_id);
  return train_dnn(normalized, hidden_layers, detail::sorted_classes(labels), cfg);
}

// Loss and analytic gradients for a single labelled sample.
struct SampleGradients {
  double loss = 0.0;
  std::vector<DenseLayer> layers;  // same shapes as the model, holding d(loss)/d(param)
};

namespace detail {

inline std::span<const DenseLayer> layers_of(const SoftmaxModel& m) { return {&m.head, 1}; }
inline std::span<const DenseLayer> layers_of(const DnnModel& m) { return m.layers; }
inline std::span<DenseLayer> layers_of(SoftmaxModel& m) { return {&m.head, 1}; }
inline std::span<DenseLayer> layers_of(DnnModel& m) { return m.layers; }

inline double sample_loss(std::span<const DenseLayer> layers, std::span<const double> x, std::size_t label) {
  ForwardCache cache;
  const std::size_t labels[] = {label};
  return forward(layers, x, 1, cache, labels);
}

}  // namespace detail

template <typename Model>
SampleGradients loss_gradients(const Model& m, std::span<const double> x, std::size_t class_index) {
  const auto layers = detail::layers_of(m);
  if (layers.empty()) throw ShapeError("model has no layers");
  if (x.size() != layers.front().inputs)
    throw ShapeError("sample has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(layers.front().inputs));
  if (class_index >= layers.back().outputs) throw BoundsError("class index out of range");
  detail::ForwardCache cache;
  const std::size_t labels[] = {class_index};
  SampleGradients out;
  out.loss = detail::forward(layers, x, 1, cache, labels);
  out.layers = detail::backward(layers, cache, 1, labels);
  return out;
}

// Denominator floor for the relative deviation, so parameters whose true
// gradient is ~0 are compared on an absolute scale.
inline constexpr double kGradientCheckFloor = 1e-4;

// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, floor),
// with numeric gradients from central differences of the sample loss.
template <typename Model>
double gradient_check(const Model& model, std::span<const double> x, std::size_t class_index, double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw ConfigError("epsilon must lie in [1e-7, 1e-3]");
  const auto analytic = loss_gradients(model, x, class_index);
  Model probe = model;
  auto layers = detail::layers_of(probe);
  double worst = 0.0;
  auto check = [&](double& param, double grad) {
    const double saved = param;
    param = saved + epsilon;
    const double up = detail::sample_loss(layers, x, class_index);
    param = saved - epsilon;
    const double down = detail::sample_loss(layers, x, class_index);
    param = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(grad), std::abs(numeric), kGradientCheckFloor});
    worst = std::max(worst, std::abs(grad - numeric) / denom);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (std::size_t i = 0; i < layers[k].weights.size(); ++i) check(layers[k].weights[i], analytic.layers[k].weights[i]);
    for (std::size_t i = 0; i < layers[k].biases.size(); ++i) check(layers[k].biases[i], analytic.layers[k].biases[i]);
  }
  return worst;
}

}  // namespace lognet
