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
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and runtime limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "tqt/mlp.hpp"
#include "tqt/qt_analysis.hpp"
#include "tqt/storage.hpp"
#include "tqt/train.hpp"
#include "tqt/truncate.hpp"

using namespace tqt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_runtime(Outcome& o, std::chrono::steady_clock::time_point t0, double limit) {
  const double s = seconds_since(t0);
  o.note("runtime " + fmt(s) + "s");
  if (s >= limit) o.fail("runtime over " + fmt(limit) + "s");
}

// 1. Truncating a b-bit truncquant bin to n bits equals n-bit truncquant.
Outcome composition() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  constexpr std::uint64_t kPoints = 1000000;
  std::vector<float> xs;
  xs.reserve(2 * kPoints);
  for (std::uint64_t k = 0; k < kPoints; ++k) {
    xs.push_back(static_cast<float>(static_cast<double>(k) / kPoints));
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (std::uint64_t k = 0; k < kPoints; ++k) xs.push_back(dist(rng));

  std::uint64_t violations = 0;
  for (int b = 2; b <= 8; ++b) {
    const QuantConfig start(b);
    for (const float x : xs) {
      const std::uint32_t qb = truncquant_bin(x, start);
      for (int n = 1; n < b; ++n) {
        violations += truncate_bin(qb, b, n) != truncquant_bin(x, QuantConfig(n));
      }
    }
  }
  o.note(std::to_string(violations) + " violations over " + std::to_string(xs.size()) +
         " points x 28 (n,b) pairs");
  if (violations) o.fail("composition violated");
  check_runtime(o, t0, 30.0);
  return o;
}

// 2. Measure of the uniform-quantizer gap at n=2, b=8.
Outcome gap_measure() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  constexpr int kSamples = 1000000;
  const QuantConfig c2(2);
  const QuantConfig c8(8);
  int differ = 0;
  for (int i = 0; i < kSamples; ++i) {
    const float x = dist(rng);
    differ += uniform_bin(x, c2) != truncate_bin(uniform_bin(x, c8), 8, 2);
  }
  const double fraction = static_cast<double>(differ) / kSamples;
  const double analytic = qt_gap_measure(2, 8);
  const auto sweep = oracle::sweep_gaps(2, 8, Scheme::kUniform, 1000000);
  o.note("sampled " + fmt(fraction) + ", analytic " + fmt(analytic) + ", swept " +
         fmt(sweep.fraction()));
  if (std::abs(fraction - 0.1647) > 0.003) o.fail("sampled fraction outside 0.1647 +- 0.003");
  if (std::abs(fraction - analytic) > 1e-3) o.fail("sampled fraction differs from analytic");
  if (std::abs(sweep.fraction() - analytic) > 1e-5) o.fail("sweep differs from analytic");
  return o;
}

// 3. Direct and factored L1 truncation error agree.
Outcome factored_error() {
  Outcome o;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::normal_distribution<float> dist(0.0f, 0.02f + 0.01f * static_cast<float>(t % 10));
    std::vector<float> v(10000);
    for (auto& x : v) x = dist(rng);
    const Tensor w = Tensor::vector(v);
    const NormMode mode = t % 2 ? NormMode::kMinMax : NormMode::kDorefaTanh;
    for (int b = 2; b <= 8; ++b) {
      std::vector<int> bits;
      for (int n = 1; n < b; ++n) bits.push_back(n);
      for (const auto& r : analyze_layer("t", w, mode, b, bits, Scheme::kUniform, NormKind::kL1)) {
        const double f = *r.e_t_factored;
        const double rel = f == 0.0 ? std::abs(r.e_t_direct) : std::abs(r.e_t_direct - f) / f;
        worst = std::max(worst, rel);
        if (r.max_bin_distance > 1) o.fail("bin distance above one level");
      }
    }
  }
  o.note("worst relative difference " + fmt(worst));
  if (worst > 1e-9) o.fail("direct and factored errors disagree");

  const Tensor fixture = Tensor::vector({0.2f, 0.5f, 0.8f, 0.99f});
  const auto r = qt_error(fixture, 2, 8, Scheme::kUniform, NormKind::kL1, 1.0);
  o.note("fixture gap_count " + std::to_string(r.gap_count) + ", E_T " + fmt(r.e_t_direct));
  if (r.gap_count != 2) o.fail("fixture gap_count != 2");
  if (std::abs(r.e_t_direct - 2.0 / 3.0) > 1e-12 || std::abs(*r.e_t_factored - 2.0 / 3.0) > 1e-12) {
    o.fail("fixture E_T != 2/3");
  }
  return o;
}

// 4. Shape of the truncation error over n for a Gaussian layer.
Outcome error_trends() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<float> dist(0.0f, 0.05f);
  std::vector<float> v(1000000);
  for (auto& x : v) x = dist(rng);
  const std::vector<int> bits{1, 2, 3, 4, 5, 6, 7};
  const auto reports = analyze_layer("gauss", Tensor::vector(v), NormMode::kDorefaTanh, 8, bits,
                                     Scheme::kUniform, NormKind::kL1);
  int argmax_e = 0;
  int argmax_gap = 0;
  std::string e_list;
  std::string gap_list;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].e_t_direct > reports[argmax_e].e_t_direct) argmax_e = static_cast<int>(i);
    if (reports[i].gap_count > reports[argmax_gap].gap_count) argmax_gap = static_cast<int>(i);
    e_list += (i ? "," : "") + fmt(reports[i].e_t_direct);
    gap_list += (i ? "," : "") + std::to_string(reports[i].gap_count);
  }
  const int n_e = bits[argmax_e];
  const int n_gap = bits[argmax_gap];
  o.note("E_T[n=1..7]=" + e_list + " argmax n=" + std::to_string(n_e));
  o.note("gap_count[n=1..7]=" + gap_list + " argmax n=" + std::to_string(n_gap));
  if (n_e != 2) o.fail("E_T does not peak at n=2");
  if (n_gap < 3 || n_gap > 5) o.fail("gap_count does not peak in 3..5");
  check_runtime(o, t0, 10.0);
  return o;
}

// 5. Interval membership agrees with the operational bin assignment.
Outcome binwidth_oracles() {
  Outcome o;
  constexpr int kPoints = 100000;
  std::uint64_t checked = 0;
  std::uint64_t skipped = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t tiling_errors = 0;

  auto tiles = [&](const std::vector<Interval>& family) {
    if (family.front().lo != 0.0 || family.back().hi != 1.0 || !family.back().closed_hi) {
      ++tiling_errors;
    }
    for (std::size_t i = 1; i < family.size(); ++i) {
      if (family[i].lo != family[i - 1].hi || family[i - 1].closed_hi ||
          !(family[i].lo < family[i].hi)) {
        ++tiling_errors;
      }
    }
  };
  // Checks one family on a grid plus random points against assign(x).
  auto agree = [&](const std::vector<Interval>& family,
                   const std::function<std::uint32_t(float)>& assign, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (int i = 0; i < 2 * kPoints; ++i) {
      const float xf = i < kPoints ? static_cast<float>(static_cast<double>(i) / (kPoints - 1))
                                   : dist(rng);
      const double x = xf;
      bool near = false;
      for (const auto& iv : family) {
        if (std::abs(x - iv.lo) < 1e-9 || std::abs(x - iv.hi) < 1e-9) near = true;
      }
      if (near && x != 0.0 && x != 1.0) {
        ++skipped;
        continue;
      }
      const std::uint32_t bin = assign(xf);
      std::size_t hits = 0;
      for (std::size_t k = 0; k < family.size(); ++k) hits += family[k].contains(x);
      ++checked;
      if (hits != 1 || !family[bin].contains(x)) ++disagreements;
    }
  };

  for (int n = 1; n <= 8; ++n) {
    const QuantConfig cfg(n);
    std::vector<Interval> rq;
    std::vector<Interval> re;
    for (std::uint32_t i = 0; i <= cfg.max_bin(); ++i) {
      rq.push_back(quant_binwidth(i, n));
      re.push_back(truncready_binwidth(i, n));
    }
    tiles(rq);
    tiles(re);
    agree(rq, [&](float x) { return uniform_bin(x, cfg); }, 100 + n);
    agree(re, [&](float x) { return truncquant_bin(x, cfg); }, 200 + n);
    for (int b = n + 1; b <= 8; ++b) {
      const QuantConfig start(b);
      std::vector<Interval> rt;
      for (std::uint32_t j = 0; j <= cfg.max_bin(); ++j) rt.push_back(trunc_binwidth(j, n, b));
      tiles(rt);
      agree(rt, [&](float x) { return truncate_bin(uniform_bin(x, start), b, n); },
            1000 + 10 * n + b);
    }
  }
  o.note(std::to_string(checked) + " points checked, " + std::to_string(skipped) +
         " boundary points skipped, " + std::to_string(disagreements) + " disagreements, " +
         std::to_string(tiling_errors) + " tiling errors");
  if (disagreements) o.fail("membership disagrees with bin assignment");
  if (tiling_errors) o.fail("a family does not tile [0,1]");
  return o;
}

double loss_of(const Mlp<double>& model, const Matrix<double>& batch, const std::vector<int>& y) {
  return softmax_cross_entropy(forward(model, batch, WeightPrecision::full()), y);
}

// 6. Gradients, STE scaling and the surrogate slope.
Outcome gradients() {
  Outcome o;
  const std::vector<std::size_t> widths{2, 8, 3};
  auto model = make_mlp<double>(widths, 6);
  for (auto& b : model.layers[0].bias) b = 0.05;
  Matrix<double> batch(10, 2);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : batch.data) v = dist(rng);
  const std::vector<int> y{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};

  ForwardCache<double> cache;
  Matrix<double> grad;
  softmax_cross_entropy(forward(model, batch, WeightPrecision::full(), &cache), y, &grad);
  const auto g = backward(model, cache, grad, Scheme::kUniform);
  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = loss_of(model, batch, y);
      param = saved - h;
      const double down = loss_of(model, batch, y);
      param = saved;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - analytic) / std::max(1e-2, std::abs(fd)));
    };
    for (std::size_t k = 0; k < model.layers[l].weight.size(); ++k) {
      probe(model.layers[l].weight[k], g.weight[l][k]);
    }
    for (std::size_t k = 0; k < model.layers[l].bias.size(); ++k) {
      probe(model.layers[l].bias[k], g.bias[l][k]);
    }
  }
  o.note("worst finite-difference relative error " + fmt(worst));
  if (worst > 1e-4) o.fail("backprop disagrees with finite differences");

  const std::vector<std::size_t> deep{2, 16, 16, 3};
  const auto qmodel = make_mlp<float>(deep, 6, Scheme::kTruncQuant);
  Matrix<float> fbatch(10, 2);
  for (std::size_t i = 0; i < fbatch.data.size(); ++i) fbatch.data[i] = static_cast<float>(batch.data[i]);
  std::uint64_t ulp_violations = 0;
  for (int n = 1; n <= 8; ++n) {
    ForwardCache<float> c;
    Matrix<float> gl;
    softmax_cross_entropy(forward(qmodel, fbatch, WeightPrecision::quant(n), &c), y, &gl);
    const auto tq = backward(qmodel, c, gl, Scheme::kTruncQuant);
    const auto uq = backward(qmodel, c, gl, Scheme::kUniform);
    const double m = std::ldexp(1.0, n) - 1.0;
    for (std::size_t k = 0; k < tq.weight[1].size(); ++k) {
      const float expected = static_cast<float>(static_cast<double>(uq.weight[1][k]) * m / (m + 1));
      const float got = tq.weight[1][k];
      if (got != expected && std::nextafter(expected, got) != got) ++ulp_violations;
    }
  }
  o.note(std::to_string(ulp_violations) + " STE gradients off by more than 1 ulp");
  if (ulp_violations) o.fail("truncquant gradient is not the scaled uniform gradient");

  // The STE surrogate is the line through the bin centers taken at the
  // full-range positions k/M_n, from the first center at 0 to the last at 1.
  double worst_slope = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const QuantConfig cfg(n);
    const double m = cfg.max_bin();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = m + 1;
    for (std::uint32_t k = 0; k <= cfg.max_bin(); ++k) {
      const double x = k / m;
      const double yk = level_value(k, cfg, Scheme::kTruncQuant);
      sx += x;
      sy += yk;
      sxx += x * x;
      sxy += x * yk;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    worst_slope = std::max(worst_slope, std::abs(slope - ste_scale(cfg, Scheme::kTruncQuant)));
    worst_slope = std::max(worst_slope, std::abs(slope - m / (m + 1)));
  }
  o.note("worst surrogate slope error " + fmt(worst_slope));
  if (worst_slope > 1e-3) o.fail("surrogate slope differs from M/(M+1)");
  return o;
}

// 7. Toy multi-precision training on blobs.
Outcome toy_training() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  TrainConfig config;
  config.seed = 7;
  config.dataset.seed = 7;
  config.precision_set = {2, 3, 4, 8};
  config.hidden = {16, 16};
  const DatasetSplit split = make_dataset(config.dataset);

  config.scheme = Scheme::kTruncQuant;
  const MlpModel tq = train_on(config, split.train).model;
  config.scheme = Scheme::kUniform;
  const MlpModel uq = train_on(config, split.train).model;

  const Tensor tq_w({16, 16}, tq.layers[1].weight);
  std::string tq_line;
  for (int n = 2; n <= 7; ++n) {
    const double quant = evaluate(tq, split.test, n, EvalMode::kQuant);
    const double trunc = evaluate(tq, split.test, n, EvalMode::kTrunc, 8);
    const auto qb = weight_bins(tq_w, WeightPrecision::quant(n), tq.scheme, tq.norm_mode);
    const auto tb = weight_bins(tq_w, WeightPrecision::trunc(n, 8), tq.scheme, tq.norm_mode);
    tq_line += " n" + std::to_string(n) + "=" + fmt(quant) + "/" + fmt(trunc);
    if (quant != trunc) o.fail("truncquant trunc accuracy differs at n=" + std::to_string(n));
    if (qb.bins != tb.bins) o.fail("truncquant bins differ at n=" + std::to_string(n));
  }
  o.note("truncquant quant/trunc acc:" + tq_line);

  const Tensor uq_w({16, 16}, uq.layers[1].weight);
  const Normalized normalized = normalize(uq_w, uq.norm_mode);
  bool dropped = false;
  std::string uq_line;
  for (int n = 2; n <= 3; ++n) {
    const double quant = evaluate(uq, split.test, n, EvalMode::kQuant);
    const double trunc = evaluate(uq, split.test, n, EvalMode::kTrunc, 8);
    uq_line += " n" + std::to_string(n) + "=" + fmt(quant) + "/" + fmt(trunc);
    if (trunc < quant) dropped = true;

    const auto qb = weight_bins(uq_w, WeightPrecision::quant(n), uq.scheme, uq.norm_mode);
    const auto tb = weight_bins(uq_w, WeightPrecision::trunc(n, 8), uq.scheme, uq.norm_mode);
    const auto gaps = qt_gap_intervals(n, 8);
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < qb.bins.size(); ++k) {
      if (qb.bins.values[k] == tb.bins.values[k]) continue;
      ++mismatched;
      const double x = normalized.values.values[k];
      bool inside = false;
      for (const auto& gap : gaps) {
        inside |= gap.range.contains(x) && gap.q_bin == qb.bins.values[k] &&
                  gap.t_bin == tb.bins.values[k];
      }
      if (!inside) o.fail("mismatched bin outside the gap intervals at n=" + std::to_string(n));
    }
    uq_line += " (" + std::to_string(mismatched) + " gap weights)";
  }
  o.note("uniform quant/trunc acc:" + uq_line);
  if (!dropped) o.fail("uniform model loses no accuracy under truncation at n in {2,3}");
  check_runtime(o, t0, 120.0);
  return o;
}

// 8. Storage ratios.
Outcome storage() {
  Outcome o;
  const StorageModel flat{{{"w", 1000, false}}, false};
  const auto flat_report = storage_report(flat, std::vector<int>{}, 8);
  const double flat_ratio = flat_report[0].ratio_vs_truncquant;
  o.note("all-quantized fp32/8-bit ratio " + fmt(flat_ratio));
  if (flat_ratio != 4.0) o.fail("all-quantized ratio is not 4.00");

  std::ifstream in(std::string(TQT_FIXTURES) + "/resnet50_layers.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const StorageModel resnet = StorageModel::from_csv(ss.str());
  const auto report = storage_report(resnet, std::vector<int>{}, 8);
  const double ratio = report[0].ratio_vs_truncquant;
  o.note("ResNet-50 fp32/8-bit ratio " + fmt(ratio));
  if (ratio < 3.2 || ratio > 4.0) o.fail("ResNet-50 ratio outside [3.2, 4.0]");
  return o;
}

// 9. Exhaustive truncation algebra.
Outcome truncation_algebra() {
  Outcome o;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  for (int b = 1; b <= 12; ++b) {
    const std::uint32_t count = 1u << b;
    for (std::uint32_t q = 0; q < count; ++q) {
      for (int n = 1; n <= b; ++n) {
        const std::uint32_t t = truncate_bin(q, b, n);
        const std::uint32_t div = 1u << (b - n);
        violations += t != q / div;
        violations += (t << (b - n)) != (q & ~(div - 1));
        violations += t >= (1u << n);
        checks += 3;
        for (int m = n; m <= b; ++m) {
          violations += truncate_bin(truncate_bin(q, b, m), m, n) != t;
          ++checks;
        }
      }
    }
    // Same checks through the tensor API.
    std::vector<std::uint32_t> all(count);
    for (std::uint32_t q = 0; q < count; ++q) all[q] = q;
    QuantizedTensor qt{BinTensor({count}, all), Scheme::kUniform, b, identity_normalization()};
    for (int n = 1; n < b; ++n) {
      const auto direct = truncate(qt, n);
      for (int m = n + 1; m < b; ++m) {
        const std::vector<int> path{m, n};
        violations += truncate_chain(qt, path).bins != direct.bins;
        ++checks;
      }
      for (std::uint32_t q = 0; q < count; ++q) {
        violations += direct.bins.values[q] != q >> (b - n);
        ++checks;
      }
    }
  }
  o.note(std::to_string(checks) + " checks, " + std::to_string(violations) + " violations");
  if (violations) o.fail("truncation algebra violated");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "truncquant composition", composition},
      {2, "uniform gap measure n=2 b=8", gap_measure},
      {3, "direct vs factored truncation error", factored_error},
      {4, "truncation error trend over n", error_trends},
      {5, "binwidth oracles", binwidth_oracles},
      {6, "STE and gradients", gradients},
      {7, "toy multi-precision training", toy_training},
      {8, "storage model", storage},
      {9, "truncation algebra", truncation_algebra},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures ? 1 : 0;
}
