#pragma once

#include "mixlab/kernels.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace mixlab {

enum class Precision { F32, F64 };

/// L-layer GCN. weights[l] has shape dims[l+1] x dims[l]; every layer but
/// the last applies ReLU and dropout (dropout masks the aggregation output).
template <typename Scalar>
struct GcnModel {
  std::vector<Index> dims;
  std::vector<WeightMatrix<Scalar>> weights;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  Index num_layers() const { return static_cast<Index>(weights.size()); }

  void validate() const {
    if (dims.size() < 2) throw ContractError("model needs at least one layer");
    if (weights.size() + 1 != dims.size()) throw ContractError("dims must have L+1 entries");
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l].rows() != dims[l + 1] || weights[l].cols() != dims[l])
        throw ContractError("weight " + std::to_string(l) + " shape inconsistent with dims");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ContractError("dropout rate must be in [0, 1)");
  }

  /// Dropout mask generator for one (iteration, layer); position-stable.
  DropoutMask dropout(Index iteration, Index layer) const {
    return {dropout_rate, derive_seed(seed, "masks"),
            static_cast<std::uint64_t>(iteration * num_layers() + layer)};
  }
  bool has_dropout(Index layer) const { return dropout_rate > 0.0 && layer + 1 < num_layers(); }
  Scalar dropout_scale() const { return static_cast<Scalar>(1.0 / (1.0 - dropout_rate)); }
};

/// Weights drawn uniform(-1/sqrt(d_in), 1/sqrt(d_in)) from the "weights"
/// sub-stream of `seed`.
template <typename Scalar>
GcnModel<Scalar> init_model(std::vector<Index> dims, double dropout_rate, std::uint64_t seed) {
  GcnModel<Scalar> model;
  model.dims = std::move(dims);
  model.dropout_rate = dropout_rate;
  model.seed = seed;
  if (model.dims.size() < 2) throw ContractError("model needs at least one layer");
  for (Index d : model.dims)
    if (d < 0) throw ContractError("layer widths must be non-negative");
  Rng rng(derive_seed(seed, "weights"));
  for (std::size_t l = 0; l + 1 < model.dims.size(); ++l) {
    const Index fan_in = model.dims[l];
    const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    WeightMatrix<Scalar> w(model.dims[l + 1], fan_in);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    model.weights.push_back(std::move(w));
  }
  model.validate();
  return model;
}

template <typename Scalar>
GcnModel<Scalar> cast_model(const GcnModel<double>& m) {
  GcnModel<Scalar> out;
  out.dims = m.dims;
  out.dropout_rate = m.dropout_rate;
  out.seed = m.seed;
  for (const auto& w : m.weights) out.weights.push_back(w.template cast<Scalar>());
  return out;
}

struct TrainConfig {
  Index iterations = 1;
  double learning_rate = 0.1;
  Precision precision = Precision::F64;

  void validate() const {
    if (iterations < 1) throw ContractError("iterations must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ContractError("learning rate must be finite and >= 0");
  }
};

template <typename Scalar>
struct LayerOutput {
  FeatureMatrix<Scalar> z;
  FeatureMatrix<Scalar> h_next;
};

/// Elementwise max(x, 0).
template <typename Scalar>
FeatureMatrix<Scalar> relu(const FeatureMatrix<Scalar>& y) {
  return y.cwiseMax(Scalar{0});
}

/// One GCN layer: aggregation Z = A_hat * H (masked, optional inverted
/// dropout scale), then update H' = relu(Z * W^T), or the raw product when
/// `activate` is false.
template <typename Scalar>
LayerOutput<Scalar> layer_forward(const CsrRef& a_hat, const FeatureMatrix<Scalar>& h,
                                  const WeightMatrix<Scalar>& w, const Bitmask* mask = nullptr,
                                  Scalar scale = Scalar{1}, bool activate = true) {
  if (w.cols() != h.cols())
    throw ContractError("layer_forward: W has " + std::to_string(w.cols()) + " columns, H has " +
                        std::to_string(h.cols()));
  LayerOutput<Scalar> out;
  if (mask)
    out.z = sspmm<Scalar>(a_hat, h, *mask, scale).out;
  else
    out.z = sspmm<Scalar>(a_hat, h, Bitmask::ones(a_hat.rows, h.cols())).out;
  FeatureMatrix<Scalar> y = out.z * w.transpose();
  out.h_next = activate ? relu<Scalar>(y) : std::move(y);
  return out;
}

/// Activations retained for the backward pass. h[0] is the input and h[L]
/// the logits; z[l] is layer l's (masked) aggregation output.
template <typename Scalar>
struct ForwardCache {
  std::vector<FeatureMatrix<Scalar>> h;
  std::vector<FeatureMatrix<Scalar>> z;
  std::vector<std::optional<Bitmask>> dropout;
  const FeatureMatrix<Scalar>& logits() const { return h.back(); }
};

template <typename Scalar>
ForwardCache<Scalar> model_forward(const GcnModel<Scalar>& model, const CsrRef& a_hat,
                                   const FeatureMatrix<Scalar>& x, Index iteration = 0) {
  if (x.rows() != a_hat.rows) throw ContractError("model_forward: X rows must equal node count");
  if (x.cols() != model.dims.front()) throw ContractError("model_forward: X width must equal dims[0]");
  const Index layers = model.num_layers();
  ForwardCache<Scalar> cache;
  cache.h.push_back(x);
  for (Index l = 0; l < layers; ++l) {
    std::optional<Bitmask> mask;
    if (model.has_dropout(l)) mask = model.dropout(iteration, l).block(0, a_hat.rows, 0, model.dims[l]);
    auto out = layer_forward<Scalar>(a_hat, cache.h.back(), model.weights[l], mask ? &*mask : nullptr,
                                     mask ? model.dropout_scale() : Scalar{1}, l + 1 < layers);
    cache.z.push_back(std::move(out.z));
    cache.h.push_back(std::move(out.h_next));
    cache.dropout.push_back(std::move(mask));
  }
  return cache;
}

template <typename Scalar>
struct LossGrad {
  double loss = 0.0;
  FeatureMatrix<Scalar> dlogits;
};

/// Softmax cross-entropy summed over the given rows; gradient rows are
/// (softmax - onehot) / denominator. Used directly by sharded loss layouts.
template <typename Scalar>
LossGrad<Scalar> cross_entropy_rows(const FeatureMatrix<Scalar>& logits, std::span<const Index> labels,
                                    Index denominator) {
  if (static_cast<Index>(labels.size()) != logits.rows())
    throw ContractError("cross_entropy: one label per logits row required");
  LossGrad<Scalar> r;
  r.dlogits.resize(logits.rows(), logits.cols());
  const Scalar inv = Scalar{1} / static_cast<Scalar>(denominator);
  double sum = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const Index y = labels[i];
    if (y < 0 || y >= logits.cols()) throw ContractError("label outside [0, classes)");
    const Scalar top = logits.row(i).maxCoeff();
    Scalar z{0};
    for (Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j) - top);
    sum += static_cast<double>(std::log(z) + top - logits(i, y));
    for (Index j = 0; j < logits.cols(); ++j) {
      const Scalar p = std::exp(logits(i, j) - top) / z;
      r.dlogits(i, j) = (p - (j == y ? Scalar{1} : Scalar{0})) * inv;
    }
  }
  r.loss = sum;
  return r;
}

/// Mean cross-entropy over all rows.
template <typename Scalar>
LossGrad<Scalar> loss_and_grad(const FeatureMatrix<Scalar>& logits, std::span<const Index> labels) {
  auto r = cross_entropy_rows<Scalar>(logits, labels, logits.rows());
  if (logits.rows() > 0) r.loss /= static_cast<double>(logits.rows());
  return r;
}

template <typename Scalar>
struct Gradients {
  std::vector<WeightMatrix<Scalar>> weights;
  FeatureMatrix<Scalar> dx;
};

/// Reverse pass. Aggregation gradients reuse A_hat (symmetric) and fuse the
/// previous layer's ReLU derivative as the S-SpMM output mask.
template <typename Scalar>
Gradients<Scalar> model_backward(const GcnModel<Scalar>& model, const CsrRef& a_hat,
                                 const ForwardCache<Scalar>& cache, const FeatureMatrix<Scalar>& dlogits) {
  const Index layers = model.num_layers();
  Gradients<Scalar> g;
  g.weights.resize(static_cast<std::size_t>(layers));
  FeatureMatrix<Scalar> dy = dlogits;
  for (Index l = layers - 1; l >= 0; --l) {
    const auto& z = cache.z[l];
    g.weights[l] = dy.transpose() * z;
    FeatureMatrix<Scalar> dz = dy * model.weights[l];
    if (cache.dropout[l]) {
      const auto& m = *cache.dropout[l];
      const Scalar scale = model.dropout_scale();
      for (Index i = 0; i < dz.rows(); ++i)
        for (Index j = 0; j < dz.cols(); ++j) dz(i, j) = m.test(i, j) ? dz(i, j) * scale : Scalar{0};
    }
    const Bitmask out_mask = l > 0 ? make_relu_mask(cache.h[l]) : Bitmask::ones(dz.rows(), dz.cols());
    dy = sspmm<Scalar>(a_hat, dz, out_mask).out;
  }
  g.dx = std::move(dy);
  return g;
}

template <typename Scalar>
void sgd_step(GcnModel<Scalar>& model, const std::vector<WeightMatrix<Scalar>>& grads, double lr) {
  const auto step = static_cast<Scalar>(lr);
  for (std::size_t l = 0; l < grads.size(); ++l) model.weights[l] -= step * grads[l];
}

template <typename Scalar>
struct TrainResult {
  GcnModel<Scalar> model;
  std::vector<double> loss_trace;
};

/// Full-batch gradient descent; the trace records the loss of each
/// iteration's forward pass, before its update.
template <typename Scalar>
TrainResult<Scalar> train(GcnModel<Scalar> model, const CsrRef& a_hat, const FeatureMatrix<Scalar>& x,
                          std::span<const Index> labels, const TrainConfig& config) {
  config.validate();
  model.validate();
  TrainResult<Scalar> r;
  for (Index t = 0; t < config.iterations; ++t) {
    const auto cache = model_forward<Scalar>(model, a_hat, x, t);
    const auto lg = loss_and_grad<Scalar>(cache.logits(), labels);
    const auto grads = model_backward<Scalar>(model, a_hat, cache, lg.dlogits);
    sgd_step(model, grads.weights, config.learning_rate);
    r.loss_trace.push_back(lg.loss);
  }
  r.model = std::move(model);
  return r;
}

template <typename Scalar>
TrainResult<Scalar> train(GcnModel<Scalar> model, const Dataset& data, const TrainConfig& config) {
  validate(data);
  const CsrGraph a_hat = normalize(data.graph);
  const FeatureMatrix<Scalar> x = data.features.cast<Scalar>();
  return train<Scalar>(std::move(model), a_hat.ref(), x, data.labels, config);
}

/// Per-node, per-layer cost d_l * (d_{l+1} + deg): aggregation of deg
/// neighbour rows plus the dense update.
constexpr Index flops_node(Index deg, Index d_l, Index d_l1) { return d_l * (d_l1 + deg); }

}  // namespace mixlab
