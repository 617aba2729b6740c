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
#include "tqt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "tqt/csv.hpp"
#include "tqt/qt_analysis.hpp"
#include "tqt/storage.hpp"
#include "tqt/tensor_io.hpp"
#include "tqt/train.hpp"
#include "tqt/truncate.hpp"

namespace tqt::cli {

namespace {

int parse_int(std::string_view text, const std::string& flag) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(flag, "'" + std::string(text) + "' is not an integer");
  }
  return value;
}

// Runs fn and re-raises validation errors from the library against flag.
template <typename Fn>
auto with_flag(const std::string& flag, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const DomainError& e) {
    throw UsageError(flag, e.what());
  } catch (const PrecisionOrderError& e) {
    throw UsageError(flag, e.what());
  } catch (const DegenerateInputError& e) {
    throw UsageError(flag, e.what());
  } catch (const ShapeError& e) {
    throw UsageError(flag, e.what());
  }
}

void require_file(const std::string& path, const std::string& flag) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError(flag, "file not found: " + path);
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << text;
  } else {
    write_file_atomic(output, text);
  }
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
  if (const char* env = std::getenv("TQT_SEED"); env && *env) {
    std::uint64_t value = 0;
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw UsageError("TQT_SEED", "'" + std::string(text) + "' is not an unsigned integer");
    }
    return value;
  }
  return flag_value;
}

// Writes records in the layout they were read from.
void write_like_input(const std::string& path, const std::vector<NamedRecord>& records,
                      bool single) {
  if (single) {
    write_tensor(path, records.front().record);
  } else {
    write_container(path, records);
  }
}

bool is_single_record_file(const std::string& path) {
  return has_record_magic(read_file(path));
}

// ---------------------------------------------------------------------------

struct QuantizeOptions {
  std::string input;
  std::string output;
  int bits = 0;
  std::string scheme;
  std::string norm_mode = "dorefa-tanh";
};

void cmd_quantize(const QuantizeOptions& opt) {
  require_file(opt.input, "--input");
  const QuantConfig cfg = with_flag("--bits", [&] { return QuantConfig(opt.bits); });
  std::optional<Scheme> scheme_override;
  if (!opt.scheme.empty()) {
    scheme_override = with_flag("--scheme", [&] { return parse_scheme(opt.scheme); });
    if (*scheme_override == Scheme::kRaw) throw UsageError("--scheme", "raw is not a quantizer");
  }
  const NormMode mode = with_flag("--norm-mode", [&] { return parse_norm_mode(opt.norm_mode); });

  const bool single = is_single_record_file(opt.input);
  std::vector<NamedRecord> records = read_records(opt.input);
  std::size_t quantized = 0;
  for (auto& nr : records) {
    TensorRecord& rec = nr.record;
    if (!rec.is_float()) continue;
    const bool tagged = rec.scheme != Scheme::kRaw;
    if (!tagged && !single) continue;  // exempt layer or bias
    const Scheme scheme = scheme_override ? *scheme_override : rec.scheme;
    if (scheme == Scheme::kRaw) {
      throw UsageError("--scheme", "required for untagged tensor '" + nr.name + "'");
    }
    Normalized normalized;
    if (tagged) {
      normalized = {apply_normalization(rec.floats, rec.norm), rec.norm};
    } else {
      normalized = with_flag("--input", [&] { return normalize(rec.floats, mode); });
    }
    rec = TensorRecord::from_quantized(quantize(normalized.values, cfg, scheme, normalized.params));
    ++quantized;
  }
  if (quantized == 0) throw UsageError("--input", "no float tensors to quantize");
  write_like_input(opt.output, records, single);
}

struct TruncateOptions {
  std::string input;
  std::string output;
  int to = 0;
};

void cmd_truncate(const TruncateOptions& opt) {
  require_file(opt.input, "--input");
  const bool single = is_single_record_file(opt.input);
  std::vector<NamedRecord> records = read_records(opt.input);
  std::size_t truncated = 0;
  for (auto& nr : records) {
    if (nr.record.is_float()) continue;
    const QuantizedTensor q = nr.record.to_quantized();
    nr.record = TensorRecord::from_quantized(with_flag("--to", [&] { return truncate(q, opt.to); }));
    ++truncated;
  }
  if (truncated == 0) throw UsageError("--input", "no quantized tensors to truncate");
  write_like_input(opt.output, records, single);
}

struct AnalyzeOptions {
  std::string input;
  std::string output;
  int start_bits = 8;
  std::string bits;
  std::string scheme = "uniform";
  std::string norm = "l1";
  std::string norm_mode = "dorefa-tanh";
};

void cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  require_file(opt.input, "--input");
  with_flag("--start-bits", [&] { return QuantConfig(opt.start_bits); });
  const std::vector<int> bits_list = parse_bits_list(opt.bits, "--bits");
  for (int n : bits_list) {
    with_flag("--bits", [&] { return QuantConfig(n); });
    if (n >= opt.start_bits) {
      throw UsageError("--bits", "precision " + std::to_string(n) + " must be below --start-bits " +
                                     std::to_string(opt.start_bits));
    }
  }
  const Scheme scheme = with_flag("--scheme", [&] { return parse_scheme(opt.scheme); });
  if (scheme == Scheme::kRaw) throw UsageError("--scheme", "raw is not a quantizer");
  const NormKind norm = with_flag("--norm", [&] { return parse_norm_kind(opt.norm); });
  const NormMode mode = with_flag("--norm-mode", [&] { return parse_norm_mode(opt.norm_mode); });

  const std::vector<NamedRecord> records = read_records(opt.input);
  std::vector<const NamedRecord*> layers;
  for (const auto& nr : records) {
    if (nr.record.is_float() && nr.record.scheme != Scheme::kRaw) layers.push_back(&nr);
  }
  if (layers.empty()) {
    for (const auto& nr : records) {
      if (nr.record.is_float()) layers.push_back(&nr);
    }
  }
  if (layers.empty()) throw UsageError("--input", "no float weight tensors to analyze");

  std::string text = qt_report_csv_header() + "\n";
  for (const NamedRecord* nr : layers) {
    const auto reports = with_flag("--input", [&] {
      return analyze_layer(nr->name, nr->record.floats, mode, opt.start_bits, bits_list, scheme,
                           norm);
    });
    for (const auto& r : reports) text += qt_report_csv_row(r) + "\n";
  }
  emit(text, opt.output, out);
}

struct TrainOptions {
  std::string scheme;
  std::string precisions = "2,3,4,8";
  std::uint64_t seed = 7;
  int epochs = 200;
  std::size_t batch_size = 32;
  double lr = 0.05;
  std::string hidden = "16,16";
  std::string dataset = "blobs";
  std::string norm_mode = "dorefa-tanh";
  std::string output;
  std::string log;
};

void cmd_train(const TrainOptions& opt, std::ostream& out) {
  TrainConfig cfg;
  cfg.scheme = with_flag("--scheme", [&] { return parse_scheme(opt.scheme); });
  if (cfg.scheme == Scheme::kRaw) throw UsageError("--scheme", "raw is not a quantizer");
  cfg.precision_set.clear();
  std::stringstream ps(opt.precisions);
  for (std::string item; std::getline(ps, item, ',');) {
    cfg.precision_set.push_back(parse_int(item, "--precisions"));
  }
  cfg.hidden.clear();
  std::stringstream hs(opt.hidden);
  for (std::string item; std::getline(hs, item, ',');) {
    const int width = parse_int(item, "--hidden");
    if (width <= 0) throw UsageError("--hidden", "layer widths must be positive");
    cfg.hidden.push_back(static_cast<std::size_t>(width));
  }
  cfg.seed = effective_seed(opt.seed);
  cfg.epochs = opt.epochs;
  cfg.batch_size = opt.batch_size;
  cfg.learning_rate = opt.lr;
  cfg.norm_mode = with_flag("--norm-mode", [&] { return parse_norm_mode(opt.norm_mode); });
  cfg.dataset.kind = with_flag("--dataset", [&] { return parse_dataset_kind(opt.dataset); });
  cfg.dataset.seed = cfg.seed;
  with_flag("--precisions", [&] {
    cfg.validate();
    return 0;
  });

  const DatasetSplit split = make_dataset(cfg.dataset);
  const TrainResult result = train_on(cfg, split.train);
  save_checkpoint(opt.output, result.model);
  if (!opt.log.empty()) write_file_atomic(opt.log, train_log_csv(result.log));

  const int top = *std::max_element(cfg.precision_set.begin(), cfg.precision_set.end());
  out << "steps=" << result.log.size() << " final_loss=" << csv::format_number(result.log.back().loss)
      << " test_acc@" << top << "bit="
      << csv::format_number(evaluate(result.model, split.test, top)) << "\n";
}

struct EvalOptions {
  std::string model;
  std::string dataset = "blobs";
  std::uint64_t seed = 7;
  std::optional<int> bits;
  std::string mode = "quant";
  int start_bits = 8;
  std::string split = "test";
  std::string predictions;
  std::string output;
};

void cmd_eval(const EvalOptions& opt, std::ostream& out) {
  require_file(opt.model, "--model");
  const EvalMode mode = with_flag("--mode", [&] { return parse_eval_mode(opt.mode); });
  if (opt.split != "test" && opt.split != "train") {
    throw UsageError("--split", "expected 'test' or 'train'");
  }
  DatasetSpec spec;
  spec.kind = with_flag("--dataset", [&] { return parse_dataset_kind(opt.dataset); });
  spec.seed = effective_seed(opt.seed);

  const LoadedModel loaded = load_checkpoint(opt.model);
  std::optional<int> bits = opt.bits;
  if (loaded.materialized_bits && bits) {
    if (*bits != *loaded.materialized_bits || mode == EvalMode::kTrunc) {
      throw UsageError("--bits", "model weights are already quantized to " +
                                     std::to_string(*loaded.materialized_bits) +
                                     " bits; truncate the file instead");
    }
    bits.reset();
  }
  if (bits) {
    with_flag("--bits", [&] { return QuantConfig(*bits); });
    if (mode == EvalMode::kTrunc) {
      with_flag("--start-bits", [&] { return QuantConfig(opt.start_bits); });
      if (opt.start_bits < *bits) {
        throw UsageError("--start-bits", "start precision " + std::to_string(opt.start_bits) +
                                             " below --bits " + std::to_string(*bits));
      }
    }
  }

  const DatasetSplit split = make_dataset(spec);
  const SyntheticDataset& data = opt.split == "test" ? split.test : split.train;
  if (static_cast<std::size_t>(data.num_classes) != loaded.model.layers.back().out) {
    throw UsageError("--dataset", "class count does not match the model output width");
  }
  const std::vector<int> predicted = predict(loaded.model, data, bits, mode, opt.start_bits);
  const double acc = accuracy(predicted, data.labels);

  if (!opt.predictions.empty()) {
    std::string text = "index,label,prediction\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      text += std::to_string(i) + "," + std::to_string(data.labels[i]) + "," +
              std::to_string(predicted[i]) + "\n";
    }
    write_file_atomic(opt.predictions, text);
  }
  const std::string precision =
      loaded.materialized_bits ? std::to_string(*loaded.materialized_bits) + "(stored)"
      : bits                   ? std::to_string(*bits)
                               : std::string("fp32");
  std::string text = "precision,mode,start_bits,samples,accuracy\n" + precision + "," +
                     std::string(opt.mode) + "," + std::to_string(opt.start_bits) + "," +
                     std::to_string(data.size()) + "," + csv::format_number(acc) + "\n";
  emit(text, opt.output, out);
}

struct StorageOptions {
  std::string layers;
  int max_bits = 8;
  std::string dedicated = "2,4,8";
  bool no_exempt = false;
  std::string output;
};

void cmd_storage(const StorageOptions& opt, std::ostream& out) {
  require_file(opt.layers, "--layers");
  const auto bytes = read_file(opt.layers);
  StorageModel model = StorageModel::from_csv(std::string(bytes.begin(), bytes.end()));
  model.keep_first_last_fp32 = !opt.no_exempt;
  with_flag("--layers", [&] {
    model.validate();
    return 0;
  });
  if (opt.max_bits < 1 || opt.max_bits > 32) throw UsageError("--max-bits", "must lie in [1, 32]");
  std::vector<int> dedicated;
  if (!opt.dedicated.empty()) dedicated = parse_bits_list(opt.dedicated, "--dedicated");
  const auto report = storage_report(model, dedicated, opt.max_bits);
  emit(storage_report_csv(report), opt.output, out);
}

}  // namespace

std::vector<int> parse_bits_list(std::string_view text, const std::string& flag) {
  std::vector<int> out;
  if (text.empty()) throw UsageError(flag, "empty precision list");
  const auto dash = text.find('-');
  if (dash != std::string_view::npos && text.find(',') == std::string_view::npos) {
    const int lo = parse_int(text.substr(0, dash), flag);
    const int hi = parse_int(text.substr(dash + 1), flag);
    if (lo > hi) throw UsageError(flag, "range '" + std::string(text) + "' is descending");
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find(',', pos);
      if (end == std::string_view::npos) end = text.size();
      out.push_back(parse_int(text.substr(pos, end - pos), flag));
      pos = end + 1;
    }
  }
  for (int n : out) {
    if (n < 1) throw UsageError(flag, "precision " + std::to_string(n) + " below 1");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truncation-ready weight quantization tools", "tqt"};
  app.require_subcommand(1);

  QuantizeOptions q;
  auto* quantize_cmd = app.add_subcommand("quantize", "Quantize float weights to n-bit bins");
  quantize_cmd->add_option("--input", q.input, "TQT1 tensor or checkpoint")->required();
  quantize_cmd->add_option("--output", q.output, "Output file")->required();
  quantize_cmd->add_option("--bits", q.bits, "Target precision")->required();
  quantize_cmd->add_option("--scheme", q.scheme, "uniform | truncquant (default: record tag)");
  quantize_cmd->add_option("--norm-mode", q.norm_mode, "dorefa-tanh | minmax");

  TruncateOptions t;
  auto* truncate_cmd = app.add_subcommand("truncate", "Bit-shift quantized bins to fewer bits");
  truncate_cmd->add_option("--input", t.input, "Quantized tensor or checkpoint")->required();
  truncate_cmd->add_option("--output", t.output, "Output file")->required();
  truncate_cmd->add_option("--to", t.to, "Target precision")->required();

  AnalyzeOptions a;
  auto* analyze_cmd = app.add_subcommand("analyze", "Quantization/truncation error report (CSV)");
  analyze_cmd->add_option("--input", a.input, "TQT1 tensor or checkpoint")->required();
  analyze_cmd->add_option("--start-bits", a.start_bits, "Precision truncation starts from");
  analyze_cmd->add_option("--bits", a.bits, "Target precisions: lo-hi or a,b,c")->required();
  analyze_cmd->add_option("--scheme", a.scheme, "uniform | truncquant");
  analyze_cmd->add_option("--norm", a.norm, "l1 | l2");
  analyze_cmd->add_option("--norm-mode", a.norm_mode, "dorefa-tanh | minmax");
  analyze_cmd->add_option("--output", a.output, "CSV file (default stdout)");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Quantization-aware training of a toy MLP");
  train_cmd->add_option("--scheme", tr.scheme, "uniform | truncquant")->required();
  train_cmd->add_option("--precisions", tr.precisions, "Comma list sampled per step");
  train_cmd->add_option("--seed", tr.seed, "Seed (TQT_SEED overrides)");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs");
  train_cmd->add_option("--batch-size", tr.batch_size, "Batch size");
  train_cmd->add_option("--lr", tr.lr, "SGD learning rate");
  train_cmd->add_option("--hidden", tr.hidden, "Hidden widths, comma list");
  train_cmd->add_option("--dataset", tr.dataset, "blobs | moons");
  train_cmd->add_option("--norm-mode", tr.norm_mode, "dorefa-tanh | minmax");
  train_cmd->add_option("--output", tr.output, "Checkpoint file")->required();
  train_cmd->add_option("--log", tr.log, "Training log CSV");

  EvalOptions e;
  auto* eval_cmd = app.add_subcommand("eval", "Top-1 accuracy of a checkpoint");
  eval_cmd->add_option("--model", e.model, "Checkpoint")->required();
  eval_cmd->add_option("--dataset", e.dataset, "blobs | moons");
  eval_cmd->add_option("--seed", e.seed, "Dataset seed (TQT_SEED overrides)");
  eval_cmd->add_option("--bits", e.bits, "Evaluate quantizable layers at this precision");
  eval_cmd->add_option("--mode", e.mode, "quant | trunc");
  eval_cmd->add_option("--start-bits", e.start_bits, "Start precision for trunc mode");
  eval_cmd->add_option("--split", e.split, "test | train");
  eval_cmd->add_option("--predictions", e.predictions, "Per-sample predictions CSV");
  eval_cmd->add_option("--output", e.output, "Accuracy CSV (default stdout)");

  StorageOptions s;
  auto* storage_cmd = app.add_subcommand("storage", "Weight storage of multi-precision strategies");
  storage_cmd->add_option("--layers", s.layers, "CSV: name,param_count,first_or_last")->required();
  storage_cmd->add_option("--max-bits", s.max_bits, "Stored precision for truncation");
  storage_cmd->add_option("--dedicated", s.dedicated, "Precisions of dedicated models");
  storage_cmd->add_flag("--no-exempt", s.no_exempt, "Quantize first/last layers too");
  storage_cmd->add_option("--output", s.output, "CSV file (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }

  try {
    if (quantize_cmd->parsed()) cmd_quantize(q);
    if (truncate_cmd->parsed()) cmd_truncate(t);
    if (analyze_cmd->parsed()) cmd_analyze(a, out);
    if (train_cmd->parsed()) cmd_train(tr, out);
    if (eval_cmd->parsed()) cmd_eval(e, out);
    if (storage_cmd->parsed()) cmd_storage(s, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const FormatError& ex) {
    err << "error: format: " << ex.what() << "\n";
    return kExitFormat;
  } catch (const DomainError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const PrecisionOrderError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace tqt::cli
