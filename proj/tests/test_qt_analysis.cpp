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
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tqt/qt_analysis.hpp"

using namespace tqt;

TEST_CASE("uniform binwidths") {
  const auto first = quant_binwidth(0, 2);
  CHECK(first.lo == 0.0);
  CHECK(first.hi == doctest::Approx(1.0 / 6.0));
  const auto last = quant_binwidth(3, 2);
  CHECK(last.lo == doctest::Approx(5.0 / 6.0));
  CHECK(last.hi == 1.0);
  CHECK(last.contains(1.0));
  CHECK_FALSE(first.contains(1.0 / 6.0 + 1e-12));
  CHECK_THROWS_AS(quant_binwidth(4, 2), DomainError);
}

TEST_CASE("truncated binwidths") {
  const auto j0 = trunc_binwidth(0, 2, 8);
  CHECK(j0.lo == 0.0);
  CHECK(j0.hi == doctest::Approx(63.5 / 255.0));
  const auto j2 = trunc_binwidth(2, 2, 8);
  CHECK(j2.lo == doctest::Approx(0.5));
  CHECK(j2.hi == doctest::Approx(191.5 / 255.0));
  CHECK(j2.hi == doctest::Approx(0.7510).epsilon(1e-4));
  CHECK_THROWS_AS(trunc_binwidth(0, 8, 8), PrecisionOrderError);
  CHECK_THROWS_AS(trunc_binwidth(0, 3, 2), PrecisionOrderError);
}

TEST_CASE("truncation-ready binwidths") {
  CHECK(truncready_binwidth(0, 2) == Interval{0.0, 0.25, false});
  CHECK(truncready_binwidth(1, 1) == Interval{0.5, 1.0, true});
  for (std::uint32_t k = 0; k < 16; ++k) CHECK(truncready_binwidth(k, 4).width() == 1.0 / 16.0);
  CHECK_THROWS_AS(truncready_binwidth(2, 1), DomainError);
}

TEST_CASE("every family tiles [0,1]") {
  for (int n = 1; n <= 8; ++n) {
    const std::uint32_t m = QuantConfig(n).max_bin();
    std::vector<std::vector<Interval>> families(1);
    for (std::uint32_t i = 0; i <= m; ++i) families[0].push_back(quant_binwidth(i, n));
    families.emplace_back();
    for (std::uint32_t k = 0; k <= m; ++k) families.back().push_back(truncready_binwidth(k, n));
    for (int b = n + 1; b <= 8; ++b) {
      families.emplace_back();
      for (std::uint32_t j = 0; j <= m; ++j) families.back().push_back(trunc_binwidth(j, n, b));
    }
    for (const auto& family : families) {
      REQUIRE(family.front().lo == 0.0);
      REQUIRE(family.back().hi == 1.0);
      REQUIRE(family.back().closed_hi);
      for (std::size_t i = 0; i < family.size(); ++i) {
        REQUIRE(family[i].lo < family[i].hi);
        if (i) REQUIRE(family[i].lo == family[i - 1].hi);
        if (i + 1 < family.size()) REQUIRE_FALSE(family[i].closed_hi);
      }
    }
  }
}

TEST_CASE("gap intervals for n=2, b=8") {
  const auto gaps = qt_gap_intervals(2, 8);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].range.lo == doctest::Approx(0.5 / 3.0));
  CHECK(gaps[0].range.hi == doctest::Approx(63.5 / 255.0));
  CHECK(gaps[0].q_bin == 1);
  CHECK(gaps[0].t_bin == 0);
  CHECK(gaps[1].range.lo == doctest::Approx(191.5 / 255.0));
  CHECK(gaps[1].range.hi == doctest::Approx(2.5 / 3.0));
  CHECK(gaps[1].q_bin == 2);
  CHECK(gaps[1].t_bin == 3);
  CHECK(qt_gap_measure(2, 8) == doctest::Approx(0.1647).epsilon(1e-3));
}

TEST_CASE("gap intervals for n=2, b=3") {
  const auto gaps = qt_gap_intervals(2, 3);
  REQUIRE_FALSE(gaps.empty());
  CHECK(gaps[0].range.lo == doctest::Approx(0.5 / 3.0));
  CHECK(gaps[0].range.hi == doctest::Approx(1.5 / 7.0));
}

TEST_CASE("truncquant has no gap") {
  for (int n = 1; n < 8; ++n) {
    for (int b = n + 1; b <= 12; ++b) CHECK(qt_gap_intervals(n, b, Scheme::kTruncQuant).empty());
  }
}

TEST_CASE("analytic gaps agree with a brute-force sweep") {
  for (int n = 1; n < 6; ++n) {
    for (int b = n + 1; b <= 8; ++b) {
      const auto gaps = qt_gap_intervals(n, b);
      const auto sweep = oracle::sweep_gaps(n, b, Scheme::kUniform, 200000);
      REQUIRE(sweep.runs.size() == gaps.size());
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        REQUIRE(std::abs(sweep.runs[i].lo - gaps[i].range.lo) <= 1.0 / 200000);
        REQUIRE(std::abs(sweep.runs[i].hi - gaps[i].range.hi) <= 1.0 / 200000);
        REQUIRE(sweep.runs[i].q_bin == gaps[i].q_bin);
        REQUIRE(sweep.runs[i].t_bin == gaps[i].t_bin);
      }
      REQUIRE(std::abs(sweep.fraction() - qt_gap_measure(n, b)) <= 2.0 * gaps.size() / 200000);
    }
  }
}

TEST_CASE("every gap mismatch is exactly one level for b <= 8") {
  for (int n = 1; n < 8; ++n) {
    for (int b = n + 1; b <= 8; ++b) {
      CHECK(max_gap_bin_distance(n, b) <= 1);
    }
  }
}

TEST_CASE("quant_error") {
  const auto norm = identity_normalization();
  const Tensor on_grid = Tensor::vector({0.0f, 1.0f});
  CHECK(quant_error(on_grid, uniform_quantize(on_grid, QuantConfig(2), norm), NormKind::kL1) == 0.0);

  const Tensor w = Tensor::vector({0.2f});
  const double e = quant_error(w, uniform_quantize(w, QuantConfig(2), norm), NormKind::kL1);
  CHECK(e == doctest::Approx(1.0 / 3.0 - 0.2).epsilon(1e-6));

  NormalizationParams scaled = norm;
  scaled.delta_prime = 2.0f;
  const Tensor two = Tensor::vector({0.2f, 0.9f});
  const double l2 = quant_error(two, uniform_quantize(two, QuantConfig(2), scaled), NormKind::kL2);
  const double d0 = 1.0 / 3.0 - 0.2;
  const double d1 = 1.0 - static_cast<double>(0.9f);
  CHECK(l2 == doctest::Approx(2.0 * std::sqrt(d0 * d0 + d1 * d1)).epsilon(1e-6));

  CHECK_THROWS_AS(quant_error(two, uniform_quantize(w, QuantConfig(2), norm), NormKind::kL1),
                  ShapeError);
}

TEST_CASE("E_Q does not grow with precision on random tensors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<float> v(10000);
    for (auto& x : v) x = dist(rng);
    const Tensor wn = Tensor::vector(v);
    double prev = INFINITY;
    for (int n = 1; n <= 8; ++n) {
      const double e = quant_error(wn, uniform_quantize(wn, QuantConfig(n)), NormKind::kL1);
      REQUIRE(e <= prev);
      prev = e;
    }
  }
}

TEST_CASE("hand-traced qt_error fixture") {
  const Tensor wn = Tensor::vector({0.2f, 0.5f, 0.8f, 0.99f});
  const auto r = qt_error(wn, 2, 8, Scheme::kUniform, NormKind::kL1, 1.0, "fixture");
  CHECK(r.gap_count == 2);
  CHECK(r.total_weights == 4);
  CHECK(r.e_t_direct == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(r.e_t_factored);
  CHECK(*r.e_t_factored == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.level_size == doctest::Approx(1.0 / 3.0));
  CHECK(r.max_bin_distance == 1);

  const auto l2 = qt_error(wn, 2, 8, Scheme::kUniform, NormKind::kL2);
  CHECK_FALSE(l2.e_t_factored);
  CHECK(l2.e_t_direct == doctest::Approx(std::sqrt(2.0) / 3.0));

  const auto tq = qt_error(wn, 2, 8, Scheme::kTruncQuant, NormKind::kL1);
  CHECK(tq.gap_count == 0);
  CHECK(tq.e_t_direct == 0.0);

  CHECK_THROWS_AS(qt_error(wn, 8, 8, Scheme::kUniform, NormKind::kL1), PrecisionOrderError);
}

TEST_CASE("gap fraction of uniform samples matches the gap measure") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  std::vector<float> v(1000000);
  for (auto& x : v) x = dist(rng);
  const auto r = qt_error(Tensor::vector(v), 2, 8, Scheme::kUniform, NormKind::kL1);
  CHECK(static_cast<double>(r.gap_count) / 1e6 == doctest::Approx(0.1647).epsilon(0.002 / 0.1647));
}

TEST_CASE("csv row") {
  const Tensor wn = Tensor::vector({0.2f, 0.5f, 0.8f, 0.99f});
  const auto r = qt_error(wn, 2, 8, Scheme::kUniform, NormKind::kL2, 1.0, "fc1.weight");
  const auto row = qt_report_csv_row(r);
  CHECK(row.rfind("fc1.weight,2,8,4,2,", 0) == 0);
  CHECK(row.find(",,l2") != std::string::npos);
  CHECK(qt_report_csv_header() ==
        "layer,n,b,total_weights,gap_count,level_size,e_q,e_t_direct,e_t_factored,norm_kind");
}
