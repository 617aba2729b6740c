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
#include "tqt/truncate.hpp"

#include <string>

namespace tqt {

QuantizedTensor truncate(const QuantizedTensor& q, int target_bits) {
  if (target_bits < 1) {
    throw DomainError("truncation target " + std::to_string(target_bits) + " below 1 bit");
  }
  if (target_bits > q.bits) {
    throw PrecisionOrderError("cannot truncate " + std::to_string(q.bits) + "-bit bins to " +
                              std::to_string(target_bits) + " bits");
  }
  q.validate();
  if (target_bits == q.bits) return q;

  QuantizedTensor out = q;
  out.bits = target_bits;
  for (auto& bin : out.bins.values) bin = truncate_bin(bin, q.bits, target_bits);
  return out;
}

QuantizedTensor truncate_chain(const QuantizedTensor& q, std::span<const int> path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i] >= path[i - 1]) {
      throw PrecisionOrderError("truncation path must be strictly decreasing (" +
                                std::to_string(path[i - 1]) + " then " +
                                std::to_string(path[i]) + ")");
    }
  }
  QuantizedTensor out = q;
  for (int bits : path) out = truncate(out, bits);
  return out;
}

}  // namespace tqt
