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
#include <string_view>
#include <vector>

namespace tqt {

enum class DatasetKind : std::uint8_t { kBlobs, kMoons };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kBlobs;
  // Blobs: class means at equal angles on a circle of this radius.
  int classes = 3;
  double radius = 1.0;
  double sigma = 0.3;
  // Moons: Gaussian jitter added to both coordinates.
  double noise = 0.1;
  std::size_t train_size = 3000;
  std::size_t test_size = 600;
  std::uint64_t seed = 7;
};

// 2-D points with integer class labels. Classes are balanced to within one
// sample and the whole set is a pure function of its seed.
struct SyntheticDataset {
  std::vector<std::array<float, 2>> points;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

struct DatasetSplit {
  SyntheticDataset train;
  SyntheticDataset test;
};

SyntheticDataset make_blobs(std::size_t count, int classes, double radius, double sigma,
                            std::uint64_t seed);
SyntheticDataset make_moons(std::size_t count, double noise, std::uint64_t seed);

// Train and test sets are drawn from independent streams derived from
// spec.seed.
DatasetSplit make_dataset(const DatasetSpec& spec);

}  // namespace tqt
