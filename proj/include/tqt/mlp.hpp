/* Copyright 2026 The tqt Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tqt/quant.hpp"
#include "tqt/tensor.hpp"

namespace tqt {

template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T(0)) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Fully connected layer, weight stored out x in row-major.
template <typename T>
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<T> weight;
  std::vector<T> bias;
  bool quantize = false;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// ReLU hidden layers, linear logits. Softmax lives in the loss.
template <typename T>
struct Mlp {
  std::vector<DenseLayer<T>> layers;
  Scheme scheme = Scheme::kUniform;
  NormMode norm_mode = NormMode::kDorefaTanh;

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    if (layers.empty()) return w;
    w.push_back(layers.front().in);
    for (const auto& l : layers) w.push_back(l.out);
    return w;
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

using MlpModel = Mlp<float>;

// How a quantizable layer's weights enter the forward pass.
//   bits unset:        master weights as-is
//   bits only:         quantize directly to bits
//   bits + start_bits: quantize to start_bits, then truncate to bits
struct WeightPrecision {
  std::optional<int> bits;
  std::optional<int> start_bits;

  static WeightPrecision full() { return {}; }
  static WeightPrecision quant(int n) { return {n, std::nullopt}; }
  static WeightPrecision trunc(int n, int b) { return {n, b}; }
};

// Normalizes w, quantizes (and optionally truncates) per precision, and maps
// the result back to the weight domain. Returns w unchanged at full precision.
// Throws PrecisionOrderError when start_bits < bits.
Tensor effective_weights(const Tensor& w, const WeightPrecision& precision, Scheme scheme,
                         NormMode mode);

// Bins behind effective_weights, for inspection. Requires precision.bits.
QuantizedTensor weight_bins(const Tensor& w, const WeightPrecision& precision, Scheme scheme,
                            NormMode mode);

// First and last layers stay at full precision; the rest are quantizable.
// Weights use He-normal initialization, biases start at zero.
template <typename T>
Mlp<T> make_mlp(std::span<const std::size_t> widths, std::uint64_t seed,
                Scheme scheme = Scheme::kUniform, NormMode mode = NormMode::kDorefaTanh) {
  Mlp<T> model;
  model.scheme = scheme;
  model.norm_mode = mode;
  std::mt19937_64 rng(seed);
  const std::size_t count = widths.size() < 2 ? 0 : widths.size() - 1;
  for (std::size_t l = 0; l < count; ++l) {
    DenseLayer<T> layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.quantize = l != 0 && l + 1 != count;
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(layer.in)));
    layer.weight.resize(layer.in * layer.out);
    for (auto& w : layer.weight) w = static_cast<T>(init(rng));
    layer.bias.assign(layer.out, T(0));
    model.layers.push_back(std::move(layer));
  }
  return model;
}

template <typename T>
struct ForwardCache {
  WeightPrecision precision;
  std::vector<Matrix<T>> inputs;          // input to each layer
  std::vector<Matrix<T>> pre;             // pre-activation of each layer
  std::vector<std::vector<T>> weights;    // weights actually used per layer
};

template <typename T>
struct Gradients {
  std::vector<std::vector<T>> weight;
  std::vector<std::vector<T>> bias;
};

namespace detail {

template <typename T>
std::vector<T> layer_weights(const DenseLayer<T>& layer, const WeightPrecision& precision,
                             Scheme scheme, NormMode mode) {
  if (!layer.quantize || !precision.bits) return layer.weight;
  Tensor w({layer.out, layer.in}, std::vector<float>(layer.weight.begin(), layer.weight.end()));
  Tensor eff = effective_weights(w, precision, scheme, mode);
  return std::vector<T>(eff.values.begin(), eff.values.end());
}

}  // namespace detail

template <typename T>
Matrix<T> forward(const Mlp<T>& model, const Matrix<T>& batch, const WeightPrecision& precision,
                  ForwardCache<T>* cache = nullptr) {
  if (cache) {
    *cache = ForwardCache<T>{};
    cache->precision = precision;
  }
  Matrix<T> x = batch;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    if (x.cols != layer.in) throw ShapeError("layer input width mismatch");
    std::vector<T> w = detail::layer_weights(layer, precision, model.scheme, model.norm_mode);
    Matrix<T> z(x.rows, layer.out);
    for (std::size_t r = 0; r < x.rows; ++r) {
      for (std::size_t o = 0; o < layer.out; ++o) {
        double acc = static_cast<double>(layer.bias[o]);
        for (std::size_t i = 0; i < layer.in; ++i) {
          acc += static_cast<double>(x(r, i)) * static_cast<double>(w[o * layer.in + i]);
        }
        z(r, o) = static_cast<T>(acc);
      }
    }
    Matrix<T> next = z;
    if (l + 1 != model.layers.size()) {
      for (auto& v : next.data) v = v > T(0) ? v : T(0);
    }
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(std::move(z));
      cache->weights.push_back(std::move(w));
    }
    x = std::move(next);
  }
  return x;
}

// Backpropagates dL/dlogits. Quantized layers pass their weight gradient
// through the straight-through estimator of `scheme` at the cached precision.
template <typename T>
Gradients<T> backward(const Mlp<T>& model, const ForwardCache<T>& cache, const Matrix<T>& loss_grad,
                      Scheme scheme) {
  const std::size_t count = model.layers.size();
  if (cache.inputs.size() != count) throw ShapeError("forward cache does not match model");
  if (loss_grad.rows != cache.inputs.front().rows || loss_grad.cols != model.layers.back().out) {
    throw ShapeError("loss gradient shape mismatch");
  }
  Gradients<T> grads;
  grads.weight.resize(count);
  grads.bias.resize(count);
  Matrix<T> dz = loss_grad;
  for (std::size_t l = count; l-- > 0;) {
    const auto& layer = model.layers[l];
    const Matrix<T>& x = cache.inputs[l];
    const std::vector<T>& w = cache.weights[l];

    double scale = 1.0;
    if (layer.quantize && cache.precision.bits) {
      scale = ste_scale(QuantConfig(*cache.precision.bits), scheme);
    }
    auto& dw = grads.weight[l];
    auto& db = grads.bias[l];
    dw.assign(layer.out * layer.in, T(0));
    db.assign(layer.out, T(0));
    for (std::size_t o = 0; o < layer.out; ++o) {
      double bias_acc = 0.0;
      for (std::size_t r = 0; r < dz.rows; ++r) bias_acc += static_cast<double>(dz(r, o));
      db[o] = static_cast<T>(bias_acc);
      for (std::size_t i = 0; i < layer.in; ++i) {
        double acc = 0.0;
        for (std::size_t r = 0; r < dz.rows; ++r) {
          acc += static_cast<double>(dz(r, o)) * static_cast<double>(x(r, i));
        }
        dw[o * layer.in + i] = static_cast<T>(acc);
      }
    }
    if (scale != 1.0) {
      for (auto& g : dw) g = static_cast<T>(static_cast<double>(g) * scale);
    }
    if (l == 0) break;

    Matrix<T> dx(dz.rows, layer.in);
    const Matrix<T>& prev_pre = cache.pre[l - 1];
    for (std::size_t r = 0; r < dz.rows; ++r) {
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(prev_pre(r, i) > T(0))) continue;
        double acc = 0.0;
        for (std::size_t o = 0; o < layer.out; ++o) {
          acc += static_cast<double>(dz(r, o)) * static_cast<double>(w[o * layer.in + i]);
        }
        dx(r, i) = static_cast<T>(acc);
      }
    }
    dz = std::move(dx);
  }
  return grads;
}

// Mean softmax cross-entropy over the batch. Writes dL/dlogits to grad when
// given.
template <typename T>
double softmax_cross_entropy(const Matrix<T>& logits, std::span<const int> labels,
                             Matrix<T>* grad = nullptr) {
  if (labels.size() != logits.rows) throw ShapeError("label count does not match batch");
  if (grad) *grad = Matrix<T>(logits.rows, logits.cols);
  const double inv_n = 1.0 / static_cast<double>(logits.rows);
  double loss = 0.0;
  std::vector<double> p(logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    double top = static_cast<double>(logits(r, 0));
    for (std::size_t c = 1; c < logits.cols; ++c) top = std::max(top, static_cast<double>(logits(r, c)));
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      p[c] = std::exp(static_cast<double>(logits(r, c)) - top);
      sum += p[c];
    }
    const auto label = static_cast<std::size_t>(labels[r]);
    loss -= std::log(p[label] / sum);
    if (grad) {
      for (std::size_t c = 0; c < logits.cols; ++c) {
        const double target = c == label ? 1.0 : 0.0;
        (*grad)(r, c) = static_cast<T>((p[c] / sum - target) * inv_n);
      }
    }
  }
  return loss * inv_n;
}

template <typename T>
std::vector<int> argmax_rows(const Matrix<T>& logits) {
  std::vector<int> out(logits.rows);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols; ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace tqt
