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
#include "tqt/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <unistd.h>

namespace tqt {

namespace {

constexpr std::uint8_t kMagic[4] = {0x54, 0x51, 0x54, 0x31};
constexpr std::uint8_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { little_endian(v, 2); }
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void little_endian(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::uint64_t base)
      : bytes_(bytes), base_(base) {}

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(little_endian(1, what)); }
  std::uint16_t u16(const char* what) {
    return static_cast<std::uint16_t>(little_endian(2, what));
  }
  std::uint32_t u32(const char* what) {
    return static_cast<std::uint32_t>(little_endian(4, what));
  }
  std::uint64_t u64(const char* what) { return little_endian(8, what); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    require(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::uint64_t offset() const noexcept { return base_ + pos_; }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, offset()); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t pos) const {
    throw FormatError(what, base_ + pos);
  }

 private:
  void require(std::size_t n, const char* what) const {
    if (remaining() < n) fail(std::string("truncated input while reading ") + what);
  }

  std::uint64_t little_endian(int width, const char* what) {
    require(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kFloat32:
      return 4;
    case DType::kUInt8:
      return 1;
    case DType::kUInt16:
      return 2;
    case DType::kUInt32:
      return 4;
  }
  throw DomainError("unknown dtype");
}

DType bin_dtype_for_bits(int bits) {
  if (bits <= 8) return DType::kUInt8;
  if (bits <= 16) return DType::kUInt16;
  return DType::kUInt32;
}

TensorRecord TensorRecord::from_tensor(Tensor t, Scheme tag, NormalizationParams norm) {
  TensorRecord r;
  r.dtype = DType::kFloat32;
  r.scheme = tag;
  r.bits = 0;
  r.norm = norm;
  r.floats = std::move(t);
  return r;
}

TensorRecord TensorRecord::from_quantized(const QuantizedTensor& q) {
  q.validate();
  TensorRecord r;
  r.dtype = bin_dtype_for_bits(q.bits);
  r.scheme = q.scheme;
  r.bits = q.bits;
  r.norm = q.norm;
  r.bins = q.bins;
  return r;
}

QuantizedTensor TensorRecord::to_quantized() const {
  if (is_float() || scheme == Scheme::kRaw) {
    throw FormatError("record does not hold quantized bins", 0);
  }
  return QuantizedTensor{bins, scheme, bits, norm};
}

std::vector<std::uint8_t> encode_record(const TensorRecord& record) {
  Writer w;
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(record.dtype));
  w.u8(static_cast<std::uint8_t>(record.scheme));
  w.u8(static_cast<std::uint8_t>(record.bits));
  const Shape& dims = record.dims();
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) w.u64(d);
  w.u8(static_cast<std::uint8_t>(record.norm.mode));
  w.f32(record.norm.delta_prime);
  w.f32(record.norm.aux[0]);
  w.f32(record.norm.aux[1]);
  switch (record.dtype) {
    case DType::kFloat32:
      for (float v : record.floats.values) w.f32(v);
      break;
    case DType::kUInt8:
      for (auto v : record.bins.values) w.u8(static_cast<std::uint8_t>(v));
      break;
    case DType::kUInt16:
      for (auto v : record.bins.values) w.u16(static_cast<std::uint16_t>(v));
      break;
    case DType::kUInt32:
      for (auto v : record.bins.values) w.u32(v);
      break;
  }
  return w.take();
}

TensorRecord decode_record(std::span<const std::uint8_t> bytes, std::uint64_t base_offset,
                           std::size_t* consumed) {
  Reader r(bytes, base_offset);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) r.fail_at("bad magic, expected \"TQT1\"", 0);

  const std::size_t version_pos = r.pos();
  if (r.u8("version") != kVersion) r.fail_at("unsupported version", version_pos);

  TensorRecord rec;
  const std::size_t dtype_pos = r.pos();
  const auto dtype = r.u8("dtype");
  if (dtype > 3) r.fail_at("unknown dtype " + std::to_string(dtype), dtype_pos);
  rec.dtype = static_cast<DType>(dtype);

  const std::size_t scheme_pos = r.pos();
  const auto scheme = r.u8("scheme");
  if (scheme > 2) r.fail_at("unknown scheme " + std::to_string(scheme), scheme_pos);
  rec.scheme = static_cast<Scheme>(scheme);

  const std::size_t bits_pos = r.pos();
  rec.bits = r.u8("bits");
  if (rec.is_float()) {
    if (rec.bits != 0) r.fail_at("float payload with nonzero bits", bits_pos);
  } else {
    if (rec.scheme == Scheme::kRaw) r.fail_at("integer payload with raw scheme", scheme_pos);
    if (rec.bits < 1 || rec.bits > kMaxBits ||
        static_cast<std::size_t>(rec.bits) > 8 * dtype_size(rec.dtype)) {
      r.fail_at("bit width " + std::to_string(rec.bits) + " invalid for dtype", bits_pos);
    }
  }

  const std::size_t ndim_pos = r.pos();
  const auto ndim = r.u32("ndim");
  if (ndim > r.remaining() / 8) r.fail_at("ndim exceeds remaining input", ndim_pos);
  Shape dims(ndim);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    const std::size_t dim_pos = r.pos();
    d = r.u64("dims");
    if (d == 0) r.fail_at("zero extent", dim_pos);
    if (count > std::numeric_limits<std::uint64_t>::max() / d) r.fail_at("dims overflow", dim_pos);
    count *= d;
  }

  const std::size_t mode_pos = r.pos();
  const auto mode = r.u8("normalization mode");
  if (mode > 1) r.fail_at("unknown normalization mode " + std::to_string(mode), mode_pos);
  rec.norm.mode = static_cast<NormMode>(mode);
  rec.norm.delta_prime = r.f32("delta_prime");
  rec.norm.aux[0] = r.f32("aux");
  rec.norm.aux[1] = r.f32("aux");

  const std::size_t width = dtype_size(rec.dtype);
  if (count > r.remaining() / width) {
    r.fail("truncated payload: dims " + shape_to_string(dims) + " need " +
           std::to_string(count * width) + " bytes, " + std::to_string(r.remaining()) +
           " available");
  }
  const auto n = static_cast<std::size_t>(count);
  if (rec.is_float()) {
    std::vector<float> values(n);
    for (auto& v : values) v = r.f32("payload");
    rec.floats = Tensor(std::move(dims), std::move(values));
  } else {
    const std::uint32_t max_bin = (1u << rec.bits) - 1u;
    std::vector<std::uint32_t> values(n);
    for (auto& v : values) {
      const std::size_t pos = r.pos();
      switch (rec.dtype) {
        case DType::kUInt8:
          v = r.u8("payload");
          break;
        case DType::kUInt16:
          v = r.u16("payload");
          break;
        default:
          v = r.u32("payload");
          break;
      }
      if (v > max_bin) r.fail_at("bin " + std::to_string(v) + " exceeds 2^bits - 1", pos);
    }
    rec.bins = BinTensor(std::move(dims), std::move(values));
  }
  if (consumed) *consumed = r.pos();
  return rec;
}

bool has_record_magic(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

std::vector<std::uint8_t> encode_container(std::span<const NamedRecord> records) {
  if (records.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw DomainError("too many records for a container");
  }
  Writer w;
  w.u16(static_cast<std::uint16_t>(records.size()));
  for (const auto& nr : records) {
    if (nr.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw DomainError("record name too long");
    }
    w.u16(static_cast<std::uint16_t>(nr.name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(nr.name.data()), nr.name.size()});
    auto body = encode_record(nr.record);
    w.u64(body.size());
    w.bytes(body);
  }
  return w.take();
}

std::vector<NamedRecord> decode_container(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, 0);
  const auto count = r.u16("record count");
  std::vector<NamedRecord> out;
  out.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    const auto name_len = r.u16("name length");
    auto name = r.take(name_len, "name");
    const std::size_t len_pos = r.pos();
    const auto len = r.u64("record length");
    if (len > r.remaining()) r.fail_at("record length exceeds remaining input", len_pos);
    const std::uint64_t body_offset = r.offset();
    auto body = r.take(static_cast<std::size_t>(len), "record");
    std::size_t used = 0;
    auto rec = decode_record(body, body_offset, &used);
    if (used != body.size()) {
      throw FormatError("record length mismatch", body_offset + used);
    }
    out.push_back({std::string(name.begin(), name.end()), std::move(rec)});
  }
  if (r.remaining() != 0) r.fail("trailing bytes after container");
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

TensorRecord read_tensor(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  std::size_t used = 0;
  auto rec = decode_record(bytes, 0, &used);
  if (used != bytes.size()) throw FormatError("trailing bytes after record", used);
  return rec;
}

void write_tensor(const std::filesystem::path& path, const TensorRecord& record) {
  write_file_atomic(path, encode_record(record));
}

std::vector<NamedRecord> read_container(const std::filesystem::path& path) {
  return decode_container(read_file(path));
}

void write_container(const std::filesystem::path& path, std::span<const NamedRecord> records) {
  write_file_atomic(path, encode_container(records));
}

std::vector<NamedRecord> read_records(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  if (has_record_magic(bytes)) {
    std::size_t used = 0;
    auto rec = decode_record(bytes, 0, &used);
    if (used != bytes.size()) throw FormatError("trailing bytes after record", used);
    std::vector<NamedRecord> out;
    out.push_back({path.stem().string(), std::move(rec)});
    return out;
  }
  return decode_container(bytes);
}

}  // namespace tqt
