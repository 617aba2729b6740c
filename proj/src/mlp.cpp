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
#include "tqt/mlp.hpp"

#include <string>

#include "tqt/truncate.hpp"

namespace tqt {

QuantizedTensor weight_bins(const Tensor& w, const WeightPrecision& precision, Scheme scheme,
                            NormMode mode) {
  if (!precision.bits) throw DomainError("weight_bins needs a target precision");
  const int bits = *precision.bits;
  const Normalized normalized = normalize(w, mode);
  if (!precision.start_bits) {
    return quantize(normalized.values, QuantConfig(bits), scheme, normalized.params);
  }
  const int start = *precision.start_bits;
  if (start < bits) {
    throw PrecisionOrderError("start precision " + std::to_string(start) +
                              " below target precision " + std::to_string(bits));
  }
  return truncate(quantize(normalized.values, QuantConfig(start), scheme, normalized.params),
                  bits);
}

Tensor effective_weights(const Tensor& w, const WeightPrecision& precision, Scheme scheme,
                         NormMode mode) {
  if (!precision.bits) return w;
  return reconstruct(weight_bins(w, precision, scheme, mode));
}

}  // namespace tqt
