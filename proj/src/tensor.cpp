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
#include "tqt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tqt {

std::uint64_t element_count(const Shape& dims) {
  std::uint64_t count = 1;
  for (auto d : dims) {
    if (d == 0) throw ShapeError("zero extent in shape " + shape_to_string(dims));
    count *= d;
  }
  return count;
}

std::string shape_to_string(const Shape& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

std::string_view to_string(NormMode mode) {
  switch (mode) {
    case NormMode::kDorefaTanh:
      return "dorefa-tanh";
    case NormMode::kMinMax:
      return "minmax";
  }
  return "unknown";
}

NormMode parse_norm_mode(std::string_view text) {
  if (text == "dorefa-tanh") return NormMode::kDorefaTanh;
  if (text == "minmax") return NormMode::kMinMax;
  throw DomainError("unknown normalization mode '" + std::string(text) + "'");
}

NormalizationParams identity_normalization() {
  return NormalizationParams{NormMode::kMinMax, 1.0f, {0.0f, 1.0f}};
}

namespace {

float clamp_unit(double v) {
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void check_finite_nonempty(const Tensor& w) {
  if (w.empty()) throw DomainError("cannot normalize an empty tensor");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w.values[i])) {
      throw DomainError("non-finite weight at index " + std::to_string(i));
    }
  }
}

}  // namespace

float normalize_value(float w, const NormalizationParams& params) {
  switch (params.mode) {
    case NormMode::kDorefaTanh:
      return clamp_unit(std::tanh(static_cast<double>(w)) /
                            (2.0 * static_cast<double>(params.aux[0])) +
                        0.5);
    case NormMode::kMinMax: {
      const double lo = params.aux[0];
      const double hi = params.aux[1];
      return clamp_unit((static_cast<double>(w) - lo) / (hi - lo));
    }
  }
  throw DomainError("unknown normalization mode");
}

float denormalize_value(float wn, const NormalizationParams& params) {
  if (!(wn >= 0.0f && wn <= 1.0f)) {
    throw DomainError("normalized value " + std::to_string(wn) + " outside [0,1]");
  }
  switch (params.mode) {
    case NormMode::kDorefaTanh: {
      // |t| < 1 keeps atanh finite when max|tanh| rounded up to 1.0f.
      constexpr double kEdge = 1.0 - std::numeric_limits<double>::epsilon();
      double t = (static_cast<double>(wn) - 0.5) * 2.0 * static_cast<double>(params.aux[0]);
      t = std::clamp(t, -kEdge, kEdge);
      return static_cast<float>(std::atanh(t));
    }
    case NormMode::kMinMax: {
      const double lo = params.aux[0];
      const double hi = params.aux[1];
      return static_cast<float>(lo + static_cast<double>(wn) * (hi - lo));
    }
  }
  throw DomainError("unknown normalization mode");
}

Normalized normalize(const Tensor& w, NormMode mode) {
  check_finite_nonempty(w);
  NormalizationParams params;
  params.mode = mode;
  switch (mode) {
    case NormMode::kDorefaTanh: {
      double max_tanh = 0.0;
      double abs_sum = 0.0;
      for (float v : w.values) {
        max_tanh = std::max(max_tanh, std::abs(std::tanh(static_cast<double>(v))));
        abs_sum += std::abs(static_cast<double>(v));
      }
      if (max_tanh == 0.0) {
        throw DegenerateInputError("dorefa-tanh normalization of an all-zero tensor");
      }
      params.aux = {static_cast<float>(max_tanh), 0.0f};
      params.delta_prime = static_cast<float>(2.0 * abs_sum / static_cast<double>(w.size()));
      break;
    }
    case NormMode::kMinMax: {
      auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
      if (*lo == *hi) {
        throw DegenerateInputError("minmax normalization of a zero-width range");
      }
      params.aux = {*lo, *hi};
      params.delta_prime = static_cast<float>(static_cast<double>(*hi) - static_cast<double>(*lo));
      break;
    }
  }
  return Normalized{apply_normalization(w, params), params};
}

Tensor apply_normalization(const Tensor& w, const NormalizationParams& params) {
  std::vector<float> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = normalize_value(w.values[i], params);
  return Tensor(w.dims, std::move(out));
}

Tensor denormalize(const Tensor& wn, const NormalizationParams& params) {
  std::vector<float> out(wn.size());
  for (std::size_t i = 0; i < wn.size(); ++i) out[i] = denormalize_value(wn.values[i], params);
  return Tensor(wn.dims, std::move(out));
}

}  // namespace tqt
