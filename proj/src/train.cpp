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
#include "tqt/train.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "tqt/csv.hpp"

namespace tqt {

void TrainConfig::validate() const {
  if (precision_set.empty()) throw DomainError("precision set is empty");
  for (int n : precision_set) {
    if (n < 1 || n > 8) {
      throw DomainError("precision " + std::to_string(n) + " outside [1, 8]");
    }
  }
  if (scheme == Scheme::kRaw) throw DomainError("training needs the uniform or truncquant scheme");
  if (epochs <= 0) throw DomainError("epochs must be positive");
  if (batch_size == 0) throw DomainError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
  if (hidden.empty()) throw DomainError("at least one hidden layer is required");
}

Matrix<float> to_batch(const SyntheticDataset& data) {
  Matrix<float> m(data.size(), 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    m(i, 0) = data.points[i][0];
    m(i, 1) = data.points[i][1];
  }
  return m;
}

TrainResult train(const TrainConfig& config) {
  config.validate();
  const DatasetSplit split = make_dataset(config.dataset);
  return train_on(config, split.train);
}

TrainResult train_on(const TrainConfig& config, const SyntheticDataset& data) {
  config.validate();
  if (data.size() == 0) throw DomainError("empty training set");

  std::vector<std::size_t> widths{2};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(static_cast<std::size_t>(data.num_classes));

  TrainResult result;
  result.model = make_mlp<float>(widths, config.seed, config.scheme, config.norm_mode);
  MlpModel& model = result.model;

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32), 0x5347u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick_bits(0, config.precision_set.size() - 1);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::uint64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Matrix<float> batch(end - start, 2);
      std::vector<int> labels(end - start);
      for (std::size_t r = 0; r < batch.rows; ++r) {
        const std::size_t idx = order[start + r];
        batch(r, 0) = data.points[idx][0];
        batch(r, 1) = data.points[idx][1];
        labels[r] = data.labels[idx];
      }
      const int bits = config.precision_set[pick_bits(rng)];

      ForwardCache<float> cache;
      const Matrix<float> logits = forward(model, batch, WeightPrecision::quant(bits), &cache);
      Matrix<float> grad;
      const double loss = softmax_cross_entropy(logits, labels, &grad);
      if (!std::isfinite(loss)) throw TrainingError("non-finite loss", step);

      const Gradients<float> grads = backward(model, cache, grad, config.scheme);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t k = 0; k < layer.weight.size(); ++k) {
          layer.weight[k] = static_cast<float>(static_cast<double>(layer.weight[k]) -
                                               config.learning_rate * grads.weight[l][k]);
        }
        for (std::size_t k = 0; k < layer.bias.size(); ++k) {
          layer.bias[k] = static_cast<float>(static_cast<double>(layer.bias[k]) -
                                             config.learning_rate * grads.bias[l][k]);
        }
      }

      const auto predicted = argmax_rows(logits);
      result.log.push_back({epoch, bits, loss, accuracy(predicted, labels)});
      ++step;
    }
  }
  return result;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "epoch,n_sampled,loss,train_acc\n";
  for (const auto& row : log) {
    out += std::to_string(row.epoch) + "," + std::to_string(row.bits) + "," +
           csv::format_number(row.loss) + "," + csv::format_number(row.accuracy) + "\n";
  }
  return out;
}

EvalMode parse_eval_mode(std::string_view text) {
  if (text == "quant") return EvalMode::kQuant;
  if (text == "trunc") return EvalMode::kTrunc;
  throw DomainError("unknown evaluation mode '" + std::string(text) + "'");
}

std::vector<int> predict(const MlpModel& model, const SyntheticDataset& data,
                         std::optional<int> bits, EvalMode mode, int start_bits) {
  WeightPrecision precision;
  if (bits) {
    QuantConfig{*bits};
    if (mode == EvalMode::kTrunc) {
      QuantConfig{start_bits};
      if (start_bits < *bits) {
        throw PrecisionOrderError("start precision " + std::to_string(start_bits) +
                                  " below target precision " + std::to_string(*bits));
      }
      precision = WeightPrecision::trunc(*bits, start_bits);
    } else {
      precision = WeightPrecision::quant(*bits);
    }
  }
  return argmax_rows(forward(model, to_batch(data), precision));
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction count mismatch");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double evaluate(const MlpModel& model, const SyntheticDataset& data, std::optional<int> bits,
                EvalMode mode, int start_bits) {
  return accuracy(predict(model, data, bits, mode, start_bits), data.labels);
}

std::vector<NamedRecord> model_to_records(const MlpModel& model) {
  std::vector<NamedRecord> records;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const std::string prefix = "fc" + std::to_string(l);
    Tensor w({layer.out, layer.in}, layer.weight);
    if (layer.quantize) {
      const NormalizationParams norm = normalize(w, model.norm_mode).params;
      records.push_back({prefix + ".weight", TensorRecord::from_tensor(std::move(w), model.scheme, norm)});
    } else {
      records.push_back({prefix + ".weight", TensorRecord::from_tensor(std::move(w))});
    }
    records.push_back({prefix + ".bias", TensorRecord::from_tensor(Tensor::vector(layer.bias))});
  }
  return records;
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  write_container(path, model_to_records(model));
}

namespace {

// "fc<l>.<field>" -> (l, field); nullopt for other names.
std::optional<std::pair<std::size_t, std::string>> parse_layer_name(const std::string& name) {
  if (name.rfind("fc", 0) != 0) return std::nullopt;
  const auto dot = name.find('.');
  if (dot == std::string::npos || dot == 2) return std::nullopt;
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 2, name.data() + dot, index);
  if (ec != std::errc() || ptr != name.data() + dot) return std::nullopt;
  return std::make_pair(index, name.substr(dot + 1));
}

}  // namespace

LoadedModel model_from_records(const std::vector<NamedRecord>& records) {
  std::map<std::size_t, const TensorRecord*> weights;
  std::map<std::size_t, const TensorRecord*> biases;
  for (const auto& nr : records) {
    auto parsed = parse_layer_name(nr.name);
    if (!parsed) throw FormatError("unexpected record '" + nr.name + "' in checkpoint", 0);
    auto& slot = parsed->second == "weight" ? weights : biases;
    if (parsed->second != "weight" && parsed->second != "bias") {
      throw FormatError("unexpected record '" + nr.name + "' in checkpoint", 0);
    }
    if (!slot.emplace(parsed->first, &nr.record).second) {
      throw FormatError("duplicate record '" + nr.name + "'", 0);
    }
  }
  if (weights.empty() || weights.size() != biases.size() ||
      weights.rbegin()->first + 1 != weights.size() || biases.rbegin()->first + 1 != biases.size()) {
    throw FormatError("checkpoint layers are not contiguous fc0..fcN weight/bias pairs", 0);
  }

  LoadedModel loaded;
  bool any_float_tagged = false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const TensorRecord& wr = *weights[l];
    const TensorRecord& br = *biases[l];
    if (wr.dims().size() != 2) throw FormatError("fc" + std::to_string(l) + ".weight is not 2-D", 0);
    if (!br.is_float() || br.dims().size() != 1 || br.dims()[0] != wr.dims()[0]) {
      throw FormatError("fc" + std::to_string(l) + ".bias does not match its weight", 0);
    }
    DenseLayer<float> layer;
    layer.out = wr.dims()[0];
    layer.in = wr.dims()[1];
    layer.bias = br.floats.values;
    if (wr.is_float()) {
      layer.weight = wr.floats.values;
      layer.quantize = wr.scheme != Scheme::kRaw;
      if (layer.quantize) any_float_tagged = true;
    } else {
      const QuantizedTensor q = wr.to_quantized();
      if (loaded.materialized_bits && *loaded.materialized_bits != q.bits) {
        throw FormatError("quantized layers disagree on bit width", 0);
      }
      loaded.materialized_bits = q.bits;
      layer.weight = reconstruct(q).values;
      layer.quantize = true;
    }
    if (layer.quantize) {
      loaded.model.scheme = wr.scheme;
      loaded.model.norm_mode = wr.norm.mode;
    }
    if (l > 0 && loaded.model.layers.back().out != layer.in) {
      throw FormatError("fc" + std::to_string(l) + " input width does not match previous layer", 0);
    }
    loaded.model.layers.push_back(std::move(layer));
  }
  if (any_float_tagged && loaded.materialized_bits) {
    throw FormatError("checkpoint mixes float and quantized quantizable layers", 0);
  }
  return loaded;
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  return model_from_records(read_records(path));
}

}  // namespace tqt
