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

#include "tqt/quant.hpp"

namespace tqt {

// Drops the (from_bits - to_bits) least significant bits of a bin.
constexpr std::uint32_t truncate_bin(std::uint32_t bin, int from_bits, int to_bits) noexcept {
  return bin >> (from_bits - to_bits);
}

// Bit-shift truncation of a b-bit tensor to n bits. Scheme and normalization
// are carried over unchanged; n == b returns the input.
// Throws DomainError if n < 1 and PrecisionOrderError if n > b.
QuantizedTensor truncate(const QuantizedTensor& q, int target_bits);

// Folds truncate along a strictly decreasing path of precisions whose head
// does not exceed q.bits. An empty path returns the input.
QuantizedTensor truncate_chain(const QuantizedTensor& q, std::span<const int> path);

}  // namespace tqt
