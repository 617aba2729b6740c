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
#include "tqt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tqt/error.hpp"

namespace tqt {

std::string_view to_string(DatasetKind kind) {
  return kind == DatasetKind::kBlobs ? "blobs" : "moons";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  if (text == "blobs") return DatasetKind::kBlobs;
  if (text == "moons") return DatasetKind::kMoons;
  throw DomainError("unknown dataset '" + std::string(text) + "'");
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void shuffle_together(SyntheticDataset& ds, std::mt19937_64& rng) {
  for (std::size_t i = ds.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const std::size_t j = pick(rng);
    std::swap(ds.points[i - 1], ds.points[j]);
    std::swap(ds.labels[i - 1], ds.labels[j]);
  }
}

}  // namespace

SyntheticDataset make_blobs(std::size_t count, int classes, double radius, double sigma,
                            std::uint64_t seed) {
  if (classes < 2) throw DomainError("blobs need at least 2 classes");
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> jitter(0.0, sigma);
  SyntheticDataset ds;
  ds.num_classes = classes;
  ds.points.reserve(count);
  ds.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    const double angle = 2.0 * std::numbers::pi * label / classes;
    const double x = radius * std::cos(angle) + jitter(rng);
    const double y = radius * std::sin(angle) + jitter(rng);
    ds.points.push_back({static_cast<float>(x), static_cast<float>(y)});
    ds.labels.push_back(label);
  }
  shuffle_together(ds, rng);
  return ds;
}

SyntheticDataset make_moons(std::size_t count, double noise, std::uint64_t seed) {
  auto rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> arc(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise);
  SyntheticDataset ds;
  ds.num_classes = 2;
  ds.points.reserve(count);
  ds.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    const double t = arc(rng);
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    x += jitter(rng);
    y += jitter(rng);
    ds.points.push_back({static_cast<float>(x), static_cast<float>(y)});
    ds.labels.push_back(label);
  }
  shuffle_together(ds, rng);
  return ds;
}

DatasetSplit make_dataset(const DatasetSpec& spec) {
  const std::uint64_t train_seed = spec.seed * 2 + 0;
  const std::uint64_t test_seed = spec.seed * 2 + 1;
  if (spec.kind == DatasetKind::kBlobs) {
    return {make_blobs(spec.train_size, spec.classes, spec.radius, spec.sigma, train_seed),
            make_blobs(spec.test_size, spec.classes, spec.radius, spec.sigma, test_seed)};
  }
  return {make_moons(spec.train_size, spec.noise, train_seed),
          make_moons(spec.test_size, spec.noise, test_seed)};
}

}  // namespace tqt
