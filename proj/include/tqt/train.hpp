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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tqt/dataset.hpp"
#include "tqt/mlp.hpp"
#include "tqt/tensor_io.hpp"

namespace tqt {

struct TrainConfig {
  Scheme scheme = Scheme::kTruncQuant;
  // One precision is drawn uniformly from this set for every SGD step.
  std::vector<int> precision_set{2, 3, 4, 8};
  int epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 7;
  std::vector<std::size_t> hidden{16, 16};
  NormMode norm_mode = NormMode::kDorefaTanh;
  DatasetSpec dataset;

  // Throws DomainError on an empty precision set, a precision outside [1,8],
  // a raw scheme or non-positive epochs/batch size/learning rate.
  void validate() const;
};

struct TrainLogRow {
  int epoch = 0;
  int bits = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<TrainLogRow> log;
};

// Plain SGD quantization-aware training. Single threaded and bit-exact
// reproducible for a given config. Throws TrainingError on a non-finite loss.
TrainResult train(const TrainConfig& config);

// Same, on an explicit training set.
TrainResult train_on(const TrainConfig& config, const SyntheticDataset& data);

std::string train_log_csv(const std::vector<TrainLogRow>& log);

enum class EvalMode : std::uint8_t { kQuant, kTrunc };

EvalMode parse_eval_mode(std::string_view text);

Matrix<float> to_batch(const SyntheticDataset& data);

// Predicted class per sample. bits unset evaluates the weights as stored.
// kTrunc quantizes to start_bits and bit-shifts to bits; it throws
// PrecisionOrderError when start_bits < bits.
std::vector<int> predict(const MlpModel& model, const SyntheticDataset& data,
                         std::optional<int> bits, EvalMode mode = EvalMode::kQuant,
                         int start_bits = 8);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

double evaluate(const MlpModel& model, const SyntheticDataset& data, std::optional<int> bits,
                EvalMode mode = EvalMode::kQuant, int start_bits = 8);

// Checkpoints are TQT1 containers holding "fc<l>.weight" and "fc<l>.bias"
// records. Quantizable weights are tagged with the model's scheme and carry
// the normalization parameters frozen at export.
std::vector<NamedRecord> model_to_records(const MlpModel& model);
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);

struct LoadedModel {
  MlpModel model;
  // Set when the quantizable weights were stored as bins; the model then holds
  // their reconstruction and is evaluated as stored.
  std::optional<int> materialized_bits;
};

LoadedModel model_from_records(const std::vector<NamedRecord>& records);
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tqt
