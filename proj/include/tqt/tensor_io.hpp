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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tqt/quant.hpp"
#include "tqt/tensor.hpp"

// TQT1 tensor files. All integers and floats are little-endian.
//
//   offset  size        field
//   0       4           magic "TQT1" (54 51 54 31)
//   4       1           version (1)
//   5       1           dtype: 0 f32, 1 u8, 2 u16, 3 u32
//   6       1           scheme: 0 raw, 1 uniform, 2 truncquant
//   7       1           bits (0 for f32 payloads)
//   8       4           ndim
//   12      8*ndim      dims
//   ..      1           normalization mode: 0 dorefa-tanh, 1 minmax
//   ..      4           delta_prime (f32)
//   ..      8           aux[0], aux[1] (f32)
//   ..      ...         payload, row-major
//
// A multi-tensor container (model checkpoints) is a u16 record count followed
// by, per record, a u16 name length, the name bytes, a u64 record length and
// the TQT1 record bytes.
namespace tqt {

enum class DType : std::uint8_t {
  kFloat32 = 0,
  kUInt8 = 1,
  kUInt16 = 2,
  kUInt32 = 3,
};

std::size_t dtype_size(DType dtype);

// Narrowest unsigned dtype that holds bins of the given precision.
DType bin_dtype_for_bits(int bits);

// One TQT1 record: either a float tensor or integer bins, plus metadata.
//
// A float record may carry a non-raw scheme tag; this marks master weights
// that are meant to be quantized with that scheme (bits stays 0).
struct TensorRecord {
  DType dtype = DType::kFloat32;
  Scheme scheme = Scheme::kRaw;
  int bits = 0;
  NormalizationParams norm = identity_normalization();
  Tensor floats;
  BinTensor bins;

  bool is_float() const noexcept { return dtype == DType::kFloat32; }
  const Shape& dims() const noexcept { return is_float() ? floats.dims : bins.dims; }

  static TensorRecord from_tensor(Tensor t, Scheme tag = Scheme::kRaw,
                                  NormalizationParams norm = identity_normalization());
  static TensorRecord from_quantized(const QuantizedTensor& q);

  // Throws FormatError if the record does not hold bins.
  QuantizedTensor to_quantized() const;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

struct NamedRecord {
  std::string name;
  TensorRecord record;

  friend bool operator==(const NamedRecord&, const NamedRecord&) = default;
};

std::vector<std::uint8_t> encode_record(const TensorRecord& record);

// Parses one record from the front of bytes. base_offset is added to the
// offsets reported in FormatError. consumed receives the record length.
TensorRecord decode_record(std::span<const std::uint8_t> bytes, std::uint64_t base_offset = 0,
                           std::size_t* consumed = nullptr);

std::vector<std::uint8_t> encode_container(std::span<const NamedRecord> records);
std::vector<NamedRecord> decode_container(std::span<const std::uint8_t> bytes);

// True if bytes start with the TQT1 magic.
bool has_record_magic(std::span<const std::uint8_t> bytes) noexcept;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes to a temporary file next to path and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

TensorRecord read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TensorRecord& record);

std::vector<NamedRecord> read_container(const std::filesystem::path& path);
void write_container(const std::filesystem::path& path, std::span<const NamedRecord> records);

// Reads either layout. A single-record file yields one record named after the
// file stem.
std::vector<NamedRecord> read_records(const std::filesystem::path& path);

}  // namespace tqt
