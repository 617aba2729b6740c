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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tqt/quant.hpp"
#include "tqt/tensor.hpp"

namespace tqt {

// Half-open [lo, hi) in the normalized domain. Intervals clipped at the top
// edge of [0,1] also contain 1 itself (closed_hi).
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool closed_hi = false;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept {
    return x >= lo && (x < hi || (closed_hi && x == hi));
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Inputs the uniform quantizer sends to bin i: [(i-0.5)/M_n, (i+0.5)/M_n)
// clipped to [0,1]. Throws DomainError for i > M_n.
Interval quant_binwidth(std::uint32_t i, int bits);

// Inputs that a b-bit uniform quantization followed by truncation to n bits
// sends to bin j: [(j*2^(b-n) - 0.5)/M_b, ((j+1)*2^(b-n) - 0.5)/M_b) clipped
// to [0,1]. Throws PrecisionOrderError unless b > n.
Interval trunc_binwidth(std::uint32_t j, int bits, int start_bits);

// Truncation-ready bin k: [k/(M_n+1), (k+1)/(M_n+1)). The last bin also holds
// 1.0, which truncquant clamps into M_n.
Interval truncready_binwidth(std::uint32_t k, int bits);

struct GapInterval {
  Interval range;
  std::uint32_t q_bin = 0;  // bin under direct n-bit quantization
  std::uint32_t t_bin = 0;  // bin after b-bit quantization and truncation

  friend bool operator==(const GapInterval&, const GapInterval&) = default;
};

// Maximal intervals of [0,1] where direct n-bit quantization and b-bit
// quantization followed by truncation disagree. Boundaries are compared as
// exact rationals. Always empty for truncquant.
std::vector<GapInterval> qt_gap_intervals(int bits, int start_bits,
                                          Scheme scheme = Scheme::kUniform);

// Lebesgue measure of qt_gap_intervals.
double qt_gap_measure(int bits, int start_bits, Scheme scheme = Scheme::kUniform);

// Largest |q_bin - t_bin| over the gap intervals (0 when there are none).
std::uint32_t max_gap_bin_distance(int bits, int start_bits, Scheme scheme = Scheme::kUniform);

enum class NormKind : std::uint8_t { kL1, kL2 };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view text);

// Distance between the normalized weights and their dequantized bins, scaled
// by q.norm.delta_prime into the weight domain.
double quant_error(const Tensor& wn, const QuantizedTensor& q, NormKind norm_kind);

struct QtReport {
  std::string layer;
  int start_bits = 8;
  int bits = 2;
  std::uint64_t total_weights = 0;
  std::uint64_t gap_count = 0;
  double level_size = 0.0;
  double e_q = 0.0;
  double e_t_direct = 0.0;
  // delta_prime * s_n * gap_count; only defined for L1.
  std::optional<double> e_t_factored;
  NormKind norm_kind = NormKind::kL1;
  // Largest observed |q_bin - t_bin|. The factored form assumes 1.
  std::uint32_t max_bin_distance = 0;
};

// Quantization and truncation errors of wn at n bits, truncating from b bits.
// Sums run in index order in double precision.
QtReport qt_error(const Tensor& wn, int bits, int start_bits, Scheme scheme, NormKind norm_kind,
                  double delta_prime = 1.0, std::string layer = "0");

// Normalizes raw weights and reports qt_error for every precision in bits_list.
std::vector<QtReport> analyze_layer(std::string layer, const Tensor& weights, NormMode mode,
                                    int start_bits, std::span<const int> bits_list,
                                    Scheme scheme, NormKind norm_kind);

std::string qt_report_csv_header();
std::string qt_report_csv_row(const QtReport& report);

}  // namespace tqt
