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
#include "tqt/storage.hpp"

#include <charconv>

#include "tqt/csv.hpp"
#include "tqt/error.hpp"

namespace tqt {

void StorageModel::validate() const {
  if (layers.empty()) throw DomainError("layer table is empty");
  std::size_t flagged = 0;
  for (const auto& layer : layers) {
    if (layer.param_count == 0) throw DomainError("layer '" + layer.name + "' has no parameters");
    flagged += layer.first_or_last;
  }
  if (!keep_first_last_fp32) return;
  const std::size_t expected = layers.size() == 1 ? 1 : 2;
  if (flagged != expected) {
    throw DomainError("expected exactly one first and one last layer flagged, found " +
                      std::to_string(flagged) + " flagged layers");
  }
}

namespace {

std::size_t column(const csv::Table& table, std::string_view name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw FormatError("layer table has no '" + std::string(name) + "' column", 0);
}

bool parse_flag(const std::string& text, std::size_t row) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false" || text.empty()) return false;
  throw FormatError("row " + std::to_string(row) + ": bad first_or_last value '" + text + "'", 0);
}

}  // namespace

StorageModel StorageModel::from_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  const std::size_t name_col = column(table, "name");
  const std::size_t count_col = column(table, "param_count");
  const std::size_t flag_col = column(table, "first_or_last");
  StorageModel model;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    LayerInfo layer;
    layer.name = row[name_col];
    const std::string& count = row[count_col];
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), layer.param_count);
    if (ec != std::errc() || ptr != count.data() + count.size()) {
      throw FormatError("row " + std::to_string(r + 1) + ": bad param_count '" + count + "'", 0);
    }
    layer.first_or_last = parse_flag(row[flag_col], r + 1);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::uint64_t quantized_model_bits(const StorageModel& model, int bits) {
  std::uint64_t total = 0;
  for (const auto& layer : model.layers) {
    const bool exempt = model.keep_first_last_fp32 && layer.first_or_last;
    total += layer.param_count * (exempt ? kFloatParamBits : static_cast<std::uint64_t>(bits));
  }
  return total;
}

std::uint64_t dedicated_bits(const StorageModel& model, std::span<const int> precisions) {
  std::uint64_t total = 0;
  for (int bits : precisions) total += quantized_model_bits(model, bits);
  return total;
}

std::uint64_t ofa_parent_bits(const StorageModel& model) {
  std::uint64_t total = 0;
  for (const auto& layer : model.layers) total += layer.param_count * kFloatParamBits;
  return total;
}

std::uint64_t truncquant_bits(const StorageModel& model, int max_bits) {
  return quantized_model_bits(model, max_bits);
}

std::vector<StorageEntry> storage_report(const StorageModel& model,
                                         std::span<const int> dedicated_precisions,
                                         int max_bits) {
  model.validate();
  if (max_bits < 1 || max_bits > 32) throw DomainError("max bits must lie in [1, 32]");
  for (int bits : dedicated_precisions) {
    if (bits < 1 || bits > 32) throw DomainError("dedicated precision out of range");
  }
  const std::uint64_t reference = truncquant_bits(model, max_bits);
  auto entry = [reference](std::string name, std::uint64_t bits) {
    StorageEntry e;
    e.strategy = std::move(name);
    e.bits = bits;
    e.ratio_vs_truncquant = static_cast<double>(bits) / static_cast<double>(reference);
    return e;
  };
  std::vector<StorageEntry> out;
  if (!dedicated_precisions.empty()) {
    out.push_back(entry("dedicated", dedicated_bits(model, dedicated_precisions)));
  }
  out.push_back(entry("ofa_fp32_parent", ofa_parent_bits(model)));
  out.push_back(entry("truncquant", reference));
  return out;
}

std::string storage_report_csv(const std::vector<StorageEntry>& entries) {
  std::string out = "strategy,bytes,ratio_vs_truncquant\n";
  for (const auto& e : entries) {
    out += csv::join({e.strategy, csv::format_number(e.bytes()),
                      csv::format_number(e.ratio_vs_truncquant)}) +
           "\n";
  }
  return out;
}

}  // namespace tqt
