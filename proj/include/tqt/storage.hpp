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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tqt {

struct LayerInfo {
  std::string name;
  std::uint64_t param_count = 0;
  bool first_or_last = false;
};

// Closed-form weight storage of three ways to serve several precisions:
//   dedicated:       one quantized model per precision
//   ofa_fp32_parent: a single float32 parent model
//   truncquant:      one model at the highest precision, truncated on demand
// First/last layers stay float32 in the quantized strategies unless
// keep_first_last_fp32 is false.
struct StorageModel {
  std::vector<LayerInfo> layers;
  bool keep_first_last_fp32 = true;

  // Throws DomainError on an empty table or a zero param count. With the
  // exemption on, exactly one first and one last layer must be flagged.
  void validate() const;

  // Columns: name,param_count,first_or_last (1/0 or true/false).
  static StorageModel from_csv(std::string_view text);
};

inline constexpr std::uint64_t kFloatParamBits = 32;

std::uint64_t quantized_model_bits(const StorageModel& model, int bits);
std::uint64_t dedicated_bits(const StorageModel& model, std::span<const int> precisions);
std::uint64_t ofa_parent_bits(const StorageModel& model);
std::uint64_t truncquant_bits(const StorageModel& model, int max_bits);

struct StorageEntry {
  std::string strategy;
  std::uint64_t bits = 0;
  double bytes() const noexcept { return static_cast<double>(bits) / 8.0; }
  double ratio_vs_truncquant = 0.0;
};

std::vector<StorageEntry> storage_report(const StorageModel& model,
                                         std::span<const int> dedicated_precisions,
                                         int max_bits);

// strategy,bytes,ratio_vs_truncquant
std::string storage_report_csv(const std::vector<StorageEntry>& entries);

}  // namespace tqt
