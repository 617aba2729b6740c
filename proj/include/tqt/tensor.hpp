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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tqt/error.hpp"

namespace tqt {

using Shape = std::vector<std::uint64_t>;

// Product of extents. Throws ShapeError on a zero extent.
std::uint64_t element_count(const Shape& dims);

std::string shape_to_string(const Shape& dims);

// Dense row-major tensor. Invariant: element_count(dims) == values.size().
template <typename T>
struct BasicTensor {
  Shape dims;
  std::vector<T> values;

  BasicTensor() = default;
  BasicTensor(Shape d, std::vector<T> v) : dims(std::move(d)), values(std::move(v)) {
    if (element_count(dims) != values.size()) {
      throw ShapeError("tensor of shape " + shape_to_string(dims) + " given " +
                       std::to_string(values.size()) + " values");
    }
  }

  // 1-D tensor over the given values.
  static BasicTensor vector(std::vector<T> v) {
    Shape d{static_cast<std::uint64_t>(v.size())};
    return BasicTensor(std::move(d), std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;
};

using Tensor = BasicTensor<float>;
using BinTensor = BasicTensor<std::uint32_t>;

enum class NormMode : std::uint8_t {
  kDorefaTanh = 0,
  kMinMax = 1,
};

std::string_view to_string(NormMode mode);
NormMode parse_norm_mode(std::string_view text);

// Invertible map between the raw weight domain and [0,1].
//
// dorefa-tanh: wn = tanh(w) / (2 * aux[0]) + 0.5 with aux[0] = max|tanh(w)|.
// minmax:      wn = (w - aux[0]) / (aux[1] - aux[0]).
//
// delta_prime is the factor converting a distance in the normalized domain to
// the weight domain (so the step size is delta_prime * s_n). For dorefa-tanh
// it is 2 * mean(|w|) over the raw weights; for minmax it is max - min.
// All fields are float32 so that a tensor read back from disk reproduces the
// in-memory mapping bit for bit.
struct NormalizationParams {
  NormMode mode = NormMode::kMinMax;
  float delta_prime = 1.0f;
  std::array<float, 2> aux{0.0f, 1.0f};

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

// Identity map on [0,1] (minmax over [0,1], delta_prime 1).
NormalizationParams identity_normalization();

struct Normalized {
  Tensor values;
  NormalizationParams params;
};

// Fits normalization parameters to w and maps w into [0,1].
// Throws DomainError on empty or non-finite input and DegenerateInputError
// when the map is undefined (all-zero tensor for dorefa-tanh, min == max for
// minmax).
Normalized normalize(const Tensor& w, NormMode mode);

// Maps w through already fitted parameters. Result is clamped into [0,1].
Tensor apply_normalization(const Tensor& w, const NormalizationParams& params);

// Inverse map. Throws DomainError if any value lies outside [0,1].
Tensor denormalize(const Tensor& wn, const NormalizationParams& params);

float normalize_value(float w, const NormalizationParams& params);
float denormalize_value(float wn, const NormalizationParams& params);

}  // namespace tqt
