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

#include <cstdint>
#include <string_view>

#include "tqt/tensor.hpp"

namespace tqt {

inline constexpr int kMaxBits = 16;

enum class Scheme : std::uint8_t {
  kRaw = 0,
  kUniform = 1,
  kTruncQuant = 2,
};

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

// Constants of an n-bit quantizer over the normalized [0,1] domain.
class QuantConfig {
 public:
  // Throws DomainError unless 1 <= bits <= kMaxBits.
  explicit QuantConfig(int bits);

  int bits() const noexcept { return bits_; }
  // M_n = 2^n - 1.
  std::uint32_t max_bin() const noexcept { return (1u << bits_) - 1u; }
  // M_n + 1 = 2^n, the number of bins.
  std::uint32_t bin_count() const noexcept { return 1u << bits_; }
  // s_n = 1 / M_n. Also the uniform step size in the normalized domain.
  double level_size() const noexcept { return 1.0 / static_cast<double>(max_bin()); }
  double step_size() const noexcept { return level_size(); }
  // Unsigned [0,1] convention: the zero point is always 0.
  int zero_point() const noexcept { return 0; }

 private:
  int bits_;
};

// Integer bins plus everything needed to map them back to weights.
struct QuantizedTensor {
  BinTensor bins;
  Scheme scheme = Scheme::kUniform;
  int bits = 8;
  NormalizationParams norm;

  // Throws DomainError if the scheme is raw, bits is out of range, or a bin
  // exceeds M_bits.
  void validate() const;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

// Tie rule of the uniform quantizer's rounding.
double round_half_away(double x) noexcept;

std::uint32_t uniform_bin(float wn, const QuantConfig& cfg);
std::uint32_t truncquant_bin(float wn, const QuantConfig& cfg);
std::uint32_t quantize_bin(float wn, const QuantConfig& cfg, Scheme scheme);

// Dequantized level of a bin in double precision: bin / M_n for uniform,
// the bin center (bin + 0.5) / (M_n + 1) for truncquant.
double level_value(std::uint32_t bin, const QuantConfig& cfg, Scheme scheme);

QuantizedTensor uniform_quantize(const Tensor& wn, const QuantConfig& cfg,
                                 const NormalizationParams& norm = identity_normalization());
QuantizedTensor truncquant(const Tensor& wn, const QuantConfig& cfg,
                           const NormalizationParams& norm = identity_normalization());
QuantizedTensor quantize(const Tensor& wn, const QuantConfig& cfg, Scheme scheme,
                         const NormalizationParams& norm = identity_normalization());

// Maps bins back into [0,1] (not the weight domain; see denormalize).
Tensor dequantize(const QuantizedTensor& q);

// Weight-domain reconstruction: denormalize(dequantize(q), q.norm).
Tensor reconstruct(const QuantizedTensor& q);

// Gradient scale of the straight-through estimator: 1 for uniform,
// M_n / (M_n + 1) for truncquant.
double ste_scale(const QuantConfig& cfg, Scheme scheme);

Tensor ste_backward(const Tensor& upstream_grad, const QuantConfig& cfg, Scheme scheme);

}  // namespace tqt
