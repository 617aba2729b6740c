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
#include "tqt/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tqt {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kRaw:
      return "raw";
    case Scheme::kUniform:
      return "uniform";
    case Scheme::kTruncQuant:
      return "truncquant";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "uniform") return Scheme::kUniform;
  if (text == "truncquant") return Scheme::kTruncQuant;
  if (text == "raw") return Scheme::kRaw;
  throw DomainError("unknown scheme '" + std::string(text) + "'");
}

QuantConfig::QuantConfig(int bits) : bits_(bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw DomainError("bit precision " + std::to_string(bits) + " outside [1, " +
                      std::to_string(kMaxBits) + "]");
  }
}

void QuantizedTensor::validate() const {
  if (scheme == Scheme::kRaw) throw DomainError("quantized tensor with raw scheme");
  const QuantConfig cfg(bits);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins.values[i] > cfg.max_bin()) {
      throw DomainError("bin " + std::to_string(bins.values[i]) + " at index " +
                        std::to_string(i) + " exceeds M_" + std::to_string(bits));
    }
  }
}

double round_half_away(double x) noexcept { return std::round(x); }

namespace {

void check_unit(float wn) {
  if (!(wn >= 0.0f && wn <= 1.0f)) {
    throw DomainError("normalized value " + std::to_string(wn) + " outside [0,1]");
  }
}

}  // namespace

std::uint32_t uniform_bin(float wn, const QuantConfig& cfg) {
  check_unit(wn);
  const double m = cfg.max_bin();
  const double r = round_half_away(static_cast<double>(wn) * m);
  return static_cast<std::uint32_t>(std::min(r, m));
}

std::uint32_t truncquant_bin(float wn, const QuantConfig& cfg) {
  check_unit(wn);
  // Scaling by a power of two is exact, so the floor sees wn's exact value.
  const double scaled = std::floor(static_cast<double>(wn) * cfg.bin_count());
  const auto bin = static_cast<std::uint32_t>(scaled);
  return std::min(bin, cfg.max_bin());
}

std::uint32_t quantize_bin(float wn, const QuantConfig& cfg, Scheme scheme) {
  switch (scheme) {
    case Scheme::kUniform:
      return uniform_bin(wn, cfg);
    case Scheme::kTruncQuant:
      return truncquant_bin(wn, cfg);
    case Scheme::kRaw:
      break;
  }
  throw DomainError("cannot quantize with the raw scheme");
}

double level_value(std::uint32_t bin, const QuantConfig& cfg, Scheme scheme) {
  switch (scheme) {
    case Scheme::kUniform:
      return static_cast<double>(bin) / static_cast<double>(cfg.max_bin());
    case Scheme::kTruncQuant:
      return (static_cast<double>(bin) + 0.5) / static_cast<double>(cfg.bin_count());
    case Scheme::kRaw:
      break;
  }
  throw DomainError("raw scheme has no dequantization rule");
}

QuantizedTensor quantize(const Tensor& wn, const QuantConfig& cfg, Scheme scheme,
                         const NormalizationParams& norm) {
  std::vector<std::uint32_t> bins(wn.size());
  for (std::size_t i = 0; i < wn.size(); ++i) bins[i] = quantize_bin(wn.values[i], cfg, scheme);
  return QuantizedTensor{BinTensor(wn.dims, std::move(bins)), scheme, cfg.bits(), norm};
}

QuantizedTensor uniform_quantize(const Tensor& wn, const QuantConfig& cfg,
                                 const NormalizationParams& norm) {
  return quantize(wn, cfg, Scheme::kUniform, norm);
}

QuantizedTensor truncquant(const Tensor& wn, const QuantConfig& cfg,
                           const NormalizationParams& norm) {
  return quantize(wn, cfg, Scheme::kTruncQuant, norm);
}

Tensor dequantize(const QuantizedTensor& q) {
  const QuantConfig cfg(q.bits);
  std::vector<float> out(q.bins.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(level_value(q.bins.values[i], cfg, q.scheme));
  }
  return Tensor(q.bins.dims, std::move(out));
}

Tensor reconstruct(const QuantizedTensor& q) { return denormalize(dequantize(q), q.norm); }

double ste_scale(const QuantConfig& cfg, Scheme scheme) {
  if (scheme == Scheme::kTruncQuant) {
    return static_cast<double>(cfg.max_bin()) / static_cast<double>(cfg.bin_count());
  }
  return 1.0;
}

Tensor ste_backward(const Tensor& upstream_grad, const QuantConfig& cfg, Scheme scheme) {
  if (scheme == Scheme::kUniform) return upstream_grad;
  const double scale = ste_scale(cfg, scheme);
  std::vector<float> out(upstream_grad.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(upstream_grad.values[i]) * scale);
  }
  return Tensor(upstream_grad.dims, std::move(out));
}

}  // namespace tqt
