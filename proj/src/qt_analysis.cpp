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
#include "tqt/qt_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tqt/csv.hpp"
#include "tqt/truncate.hpp"

namespace tqt {

namespace {

void check_order(int bits, int start_bits) {
  if (start_bits <= bits) {
    throw PrecisionOrderError("start precision " + std::to_string(start_bits) +
                              " must exceed target precision " + std::to_string(bits));
  }
  QuantConfig{start_bits};
  QuantConfig{bits};
}

void check_bin(std::uint32_t bin, const QuantConfig& cfg) {
  if (bin > cfg.max_bin()) {
    throw DomainError("bin " + std::to_string(bin) + " outside [0, " +
                      std::to_string(cfg.max_bin()) + "]");
  }
}

Interval clip(double lo, double hi) {
  Interval out{std::max(lo, 0.0), std::min(hi, 1.0), hi >= 1.0};
  return out;
}

// Non-negative rational num/den; den > 0.
struct Rational {
  std::uint64_t num;
  std::uint64_t den;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

bool less(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
bool equal(Rational a, Rational b) { return a.num * b.den == b.num * a.den; }

constexpr Rational kZero{0, 1};
constexpr Rational kOne{1, 1};

// Upper edge of bin k (k < M_n) for a family of binwidths.
using EdgeFn = std::function<Rational(std::uint64_t)>;

EdgeFn direct_edges(int bits, Scheme scheme) {
  const std::uint64_t m = (1ull << bits) - 1;
  if (scheme == Scheme::kTruncQuant) {
    return [bits](std::uint64_t k) { return Rational{k + 1, 1ull << bits}; };
  }
  return [m](std::uint64_t k) { return Rational{2 * k + 1, 2 * m}; };
}

EdgeFn truncated_edges(int bits, int start_bits, Scheme scheme) {
  const std::uint64_t step = 1ull << (start_bits - bits);
  const std::uint64_t mb = (1ull << start_bits) - 1;
  if (scheme == Scheme::kTruncQuant) {
    return [step, start_bits](std::uint64_t k) {
      return Rational{(k + 1) * step, 1ull << start_bits};
    };
  }
  return [step, mb](std::uint64_t k) { return Rational{2 * (k + 1) * step - 1, 2 * mb}; };
}

}  // namespace

Interval quant_binwidth(std::uint32_t i, int bits) {
  const QuantConfig cfg(bits);
  check_bin(i, cfg);
  const double m = cfg.max_bin();
  return clip((i - 0.5) / m, (i + 0.5) / m);
}

Interval trunc_binwidth(std::uint32_t j, int bits, int start_bits) {
  check_order(bits, start_bits);
  const QuantConfig cfg(bits);
  check_bin(j, cfg);
  const double step = std::ldexp(1.0, start_bits - bits);
  const double mb = QuantConfig(start_bits).max_bin();
  return clip((j * step - 0.5) / mb, ((j + 1.0) * step - 0.5) / mb);
}

Interval truncready_binwidth(std::uint32_t k, int bits) {
  const QuantConfig cfg(bits);
  check_bin(k, cfg);
  const double count = cfg.bin_count();
  return Interval{k / count, (k + 1.0) / count, k == cfg.max_bin()};
}

std::vector<GapInterval> qt_gap_intervals(int bits, int start_bits, Scheme scheme) {
  check_order(bits, start_bits);
  if (scheme == Scheme::kRaw) throw DomainError("raw scheme has no binwidths");
  const std::uint64_t m = QuantConfig(bits).max_bin();
  const EdgeFn q_edge = direct_edges(bits, scheme);
  const EdgeFn t_edge = truncated_edges(bits, start_bits, scheme);

  std::vector<GapInterval> gaps;
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  Rational lo = kZero;
  Rational last_hi = kZero;
  while (true) {
    const Rational qe = i < m ? q_edge(i) : kOne;
    const Rational te = j < m ? t_edge(j) : kOne;
    const Rational hi = less(qe, te) ? qe : te;
    if (less(lo, hi) && i != j) {
      const bool top = equal(hi, kOne);
      if (!gaps.empty() && equal(last_hi, lo) && gaps.back().q_bin == i && gaps.back().t_bin == j) {
        gaps.back().range.hi = hi.value();
        gaps.back().range.closed_hi = top;
      } else {
        gaps.push_back({Interval{lo.value(), hi.value(), top}, static_cast<std::uint32_t>(i),
                        static_cast<std::uint32_t>(j)});
      }
      last_hi = hi;
    }
    if (equal(hi, kOne)) break;
    if (!less(te, qe) && i < m) ++i;
    if (!less(qe, te) && j < m) ++j;
    lo = hi;
  }
  return gaps;
}

double qt_gap_measure(int bits, int start_bits, Scheme scheme) {
  double total = 0.0;
  for (const auto& g : qt_gap_intervals(bits, start_bits, scheme)) total += g.range.width();
  return total;
}

std::uint32_t max_gap_bin_distance(int bits, int start_bits, Scheme scheme) {
  std::uint32_t worst = 0;
  for (const auto& g : qt_gap_intervals(bits, start_bits, scheme)) {
    worst = std::max(worst, g.q_bin > g.t_bin ? g.q_bin - g.t_bin : g.t_bin - g.q_bin);
  }
  return worst;
}

std::string_view to_string(NormKind kind) { return kind == NormKind::kL1 ? "l1" : "l2"; }

NormKind parse_norm_kind(std::string_view text) {
  if (text == "l1") return NormKind::kL1;
  if (text == "l2") return NormKind::kL2;
  throw DomainError("unknown norm '" + std::string(text) + "'");
}

namespace {

class NormAccumulator {
 public:
  explicit NormAccumulator(NormKind kind) : kind_(kind) {}

  void add(double diff) {
    if (kind_ == NormKind::kL1) {
      sum_ += std::abs(diff);
    } else {
      sum_ += diff * diff;
    }
  }

  double result() const { return kind_ == NormKind::kL1 ? sum_ : std::sqrt(sum_); }

 private:
  NormKind kind_;
  double sum_ = 0.0;
};

}  // namespace

double quant_error(const Tensor& wn, const QuantizedTensor& q, NormKind norm_kind) {
  if (wn.dims != q.bins.dims) {
    throw ShapeError("weights " + shape_to_string(wn.dims) + " vs bins " +
                     shape_to_string(q.bins.dims));
  }
  const QuantConfig cfg(q.bits);
  NormAccumulator acc(norm_kind);
  for (std::size_t i = 0; i < wn.size(); ++i) {
    acc.add(static_cast<double>(wn.values[i]) - level_value(q.bins.values[i], cfg, q.scheme));
  }
  return static_cast<double>(q.norm.delta_prime) * acc.result();
}

QtReport qt_error(const Tensor& wn, int bits, int start_bits, Scheme scheme, NormKind norm_kind,
                  double delta_prime, std::string layer) {
  check_order(bits, start_bits);
  if (scheme == Scheme::kRaw) throw DomainError("raw scheme cannot be analyzed");
  const QuantConfig cfg(bits);
  const QuantConfig start_cfg(start_bits);

  QtReport report;
  report.layer = std::move(layer);
  report.bits = bits;
  report.start_bits = start_bits;
  report.total_weights = wn.size();
  report.level_size = cfg.level_size();
  report.norm_kind = norm_kind;

  NormAccumulator e_q(norm_kind);
  NormAccumulator e_t(norm_kind);
  for (float v : wn.values) {
    const std::uint32_t q = quantize_bin(v, cfg, scheme);
    const std::uint32_t t = truncate_bin(quantize_bin(v, start_cfg, scheme), start_bits, bits);
    const double q_level = level_value(q, cfg, scheme);
    e_q.add(static_cast<double>(v) - q_level);
    if (q != t) {
      ++report.gap_count;
      report.max_bin_distance = std::max(report.max_bin_distance, q > t ? q - t : t - q);
      e_t.add(level_value(t, cfg, scheme) - q_level);
    }
  }
  report.e_q = delta_prime * e_q.result();
  report.e_t_direct = delta_prime * e_t.result();
  if (norm_kind == NormKind::kL1) {
    report.e_t_factored =
        delta_prime * report.level_size * static_cast<double>(report.gap_count);
  }
  return report;
}

std::vector<QtReport> analyze_layer(std::string layer, const Tensor& weights, NormMode mode,
                                    int start_bits, std::span<const int> bits_list,
                                    Scheme scheme, NormKind norm_kind) {
  const Normalized normalized = normalize(weights, mode);
  std::vector<QtReport> reports;
  reports.reserve(bits_list.size());
  for (int bits : bits_list) {
    reports.push_back(qt_error(normalized.values, bits, start_bits, scheme, norm_kind,
                               normalized.params.delta_prime, layer));
  }
  return reports;
}

std::string qt_report_csv_header() {
  return "layer,n,b,total_weights,gap_count,level_size,e_q,e_t_direct,e_t_factored,norm_kind";
}

std::string qt_report_csv_row(const QtReport& r) {
  return csv::join({r.layer, std::to_string(r.bits), std::to_string(r.start_bits),
                    std::to_string(r.total_weights), std::to_string(r.gap_count),
                    csv::format_number(r.level_size), csv::format_number(r.e_q),
                    csv::format_number(r.e_t_direct),
                    r.e_t_factored ? csv::format_number(*r.e_t_factored) : std::string(),
                    std::string(to_string(r.norm_kind))});
}

}  // namespace tqt
