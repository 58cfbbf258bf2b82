// Copyright 2026 The sehilo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sehilo/frame.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace sehilo {
namespace {

constexpr uint8_t kMagic[4] = {'S', 'H', 'L', 'F'};
constexpr uint8_t kVersion = 1;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutF32(std::vector<uint8_t>& out, float v) {
  PutU32(out, std::bit_cast<uint32_t>(v));
}

// Sequential little-endian reader that length-checks every access.
class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }

  size_t remaining() const { return bytes_.size() - pos_; }
  const uint8_t* cursor() const { return bytes_.data() + pos_; }
  void Skip(size_t n) {
    Need(n);
    pos_ += n;
  }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FrameError(FrameErrorKind::kTruncated, "frame: truncated");
    }
  }

  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

// Appends `bits` low-order bits of `value` to the stream, LSB first.
class BitWriter {
 public:
  explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

  void Append(uint64_t value, int bits) {
    for (int i = 0; i < bits; ++i) {
      if (bit_pos_ == 0) out_.push_back(0);
      if ((value >> i) & 1) out_.back() |= static_cast<uint8_t>(1u << bit_pos_);
      bit_pos_ = (bit_pos_ + 1) % 8;
    }
  }

 private:
  std::vector<uint8_t>& out_;
  int bit_pos_ = 0;
};

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t n_bytes) : data_(data), n_bits_(n_bytes * 8) {}

  uint64_t Take(int bits) {
    uint64_t v = 0;
    for (int i = 0; i < bits; ++i) {
      if (pos_ >= n_bits_) {
        throw FrameError(FrameErrorKind::kTruncated, "frame: payload truncated");
      }
      if ((data_[pos_ / 8] >> (pos_ % 8)) & 1) v |= uint64_t{1} << i;
      ++pos_;
    }
    return v;
  }

  // True if any bit from the current position to the end is set.
  bool RemainderNonZero() const {
    for (size_t p = pos_; p < n_bits_; ++p) {
      if ((data_[p / 8] >> (p % 8)) & 1) return true;
    }
    return false;
  }

 private:
  const uint8_t* data_;
  size_t n_bits_;
  size_t pos_ = 0;
};

uint64_t CodebookProduct(std::span<const int> levels) {
  if (levels.empty()) {
    throw std::invalid_argument("frame: empty level list");
  }
  uint64_t prod = 1;
  for (int m : levels) {
    if (m < 2) {
      throw std::invalid_argument("frame: level counts must be >= 2");
    }
    if (prod > std::numeric_limits<uint64_t>::max() / static_cast<uint64_t>(m)) {
      throw std::invalid_argument("frame: codebook size overflows 64 bits");
    }
    prod *= static_cast<uint64_t>(m);
  }
  return prod;
}

void CheckStream(const TokenIndices& s, const QuantizerConfig& qcfg,
                 const char* name) {
  if (s.n_tokens < 0) {
    throw std::invalid_argument(std::string("EncodeFrame: negative token count in ") + name);
  }
  if (s.n_tokens > 0 && s.d != qcfg.num_dims()) {
    throw std::invalid_argument(std::string("EncodeFrame: dimension mismatch in ") + name);
  }
  const size_t expect = static_cast<size_t>(s.n_tokens) *
                        static_cast<size_t>(s.n_tokens > 0 ? s.d : 0);
  if (s.values.size() != expect) {
    throw std::invalid_argument(std::string("EncodeFrame: ragged stream ") + name);
  }
}

}  // namespace

uint64_t PackToken(std::span<const int> indices, std::span<const int> levels) {
  if (indices.size() != levels.size()) {
    throw std::invalid_argument("PackToken: dimension mismatch");
  }
  CodebookProduct(levels);
  uint64_t value = 0;
  uint64_t place = 1;
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= levels[i]) {
      throw std::out_of_range("PackToken: index out of range");
    }
    value += static_cast<uint64_t>(indices[i]) * place;
    place *= static_cast<uint64_t>(levels[i]);
  }
  return value;
}

std::vector<int> UnpackToken(uint64_t value, std::span<const int> levels) {
  if (value >= CodebookProduct(levels)) {
    throw std::out_of_range("UnpackToken: value out of range");
  }
  std::vector<int> indices(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    const uint64_t m = static_cast<uint64_t>(levels[i]);
    indices[i] = static_cast<int>(value % m);
    value /= m;
  }
  return indices;
}

int BitsPerToken(std::span<const int> levels) {
  const uint64_t prod = CodebookProduct(levels);
  int bits = 0;
  while (bits < 64 && (uint64_t{1} << bits) < prod) ++bits;
  return bits;
}

std::vector<uint8_t> EncodeFrame(const TokenIndices& hi,
                                 const TokenIndices& lo,
                                 const QuantizerConfig& qcfg, uint64_t seed) {
  qcfg.Validate();
  CheckStream(hi, qcfg, "hi");
  CheckStream(lo, qcfg, "lo");
  if (qcfg.num_dims() > 255) {
    throw std::invalid_argument("EncodeFrame: more than 255 dimensions");
  }
  for (int m : qcfg.levels) {
    if (m > 255) {
      throw std::invalid_argument("EncodeFrame: level count exceeds u8");
    }
  }

  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<uint8_t>(qcfg.num_dims()));
  for (int m : qcfg.levels) out.push_back(static_cast<uint8_t>(m));
  PutF32(out, static_cast<float>(qcfg.alpha));
  PutF32(out, static_cast<float>(qcfg.epsilon));
  PutU32(out, static_cast<uint32_t>(hi.n_tokens));
  PutU32(out, static_cast<uint32_t>(lo.n_tokens));
  PutU64(out, seed);

  const int bits = BitsPerToken(qcfg.levels);
  BitWriter writer(out);
  const auto write_stream = [&](const TokenIndices& s) {
    for (int t = 0; t < s.n_tokens; ++t) {
      const std::span<const int> token(s.values.data() +
                                           static_cast<size_t>(t) * s.d,
                                       static_cast<size_t>(s.d));
      writer.Append(PackToken(token, qcfg.levels), bits);
    }
  };
  write_stream(hi);
  write_stream(lo);
  return out;
}

DecodedFrame DecodeFrame(const std::vector<uint8_t>& bytes) {
  ByteReader reader(bytes);
  if (reader.remaining() < 4) {
    throw FrameError(FrameErrorKind::kTruncated, "frame: shorter than magic");
  }
  if (std::memcmp(reader.cursor(), kMagic, 4) != 0) {
    throw FrameError(FrameErrorKind::kBadMagic, "frame: bad magic");
  }
  reader.Skip(4);
  const uint8_t version = reader.U8();
  if (version != kVersion) {
    throw FrameError(FrameErrorKind::kBadVersion, "frame: unsupported version");
  }
  const int n_dims = reader.U8();
  if (n_dims == 0) {
    throw FrameError(FrameErrorKind::kBadHeader, "frame: zero dimensions");
  }

  DecodedFrame frame;
  frame.qcfg.levels.resize(n_dims);
  for (int i = 0; i < n_dims; ++i) {
    const uint8_t m = reader.U8();
    if (m < 2) {
      throw FrameError(FrameErrorKind::kBadHeader, "frame: level count < 2");
    }
    frame.qcfg.levels[i] = m;
  }
  const float alpha = reader.F32();
  const float epsilon = reader.F32();
  if (!std::isfinite(alpha) || alpha <= 0.0f || !std::isfinite(epsilon) ||
      epsilon <= 0.0f) {
    throw FrameError(FrameErrorKind::kBadHeader, "frame: bad alpha/epsilon");
  }
  frame.qcfg.alpha = static_cast<double>(alpha);
  frame.qcfg.epsilon = static_cast<double>(epsilon);
  const uint32_t n_hi = reader.U32();
  const uint32_t n_lo = reader.U32();
  frame.seed = reader.U64();

  const int bits = BitsPerToken(frame.qcfg.levels);
  const uint64_t total_bits =
      (static_cast<uint64_t>(n_hi) + n_lo) * static_cast<uint64_t>(bits);
  const size_t payload_bytes = static_cast<size_t>((total_bits + 7) / 8);
  if (reader.remaining() < payload_bytes) {
    throw FrameError(FrameErrorKind::kTruncated, "frame: payload truncated");
  }
  if (reader.remaining() > payload_bytes) {
    throw FrameError(FrameErrorKind::kTrailingBytes,
                     "frame: trailing bytes after payload");
  }

  const uint64_t prod = CodebookProduct(frame.qcfg.levels);
  BitReader bit_reader(reader.cursor(), payload_bytes);
  const auto read_stream = [&](uint32_t n_tokens) {
    TokenIndices s;
    s.n_tokens = static_cast<int>(n_tokens);
    s.d = n_dims;
    s.values.reserve(static_cast<size_t>(n_tokens) * n_dims);
    for (uint32_t t = 0; t < n_tokens; ++t) {
      const uint64_t value = bit_reader.Take(bits);
      if (value >= prod) {
        throw FrameError(FrameErrorKind::kIndexOverflow,
                         "frame: packed value exceeds codebook");
      }
      const std::vector<int> indices = UnpackToken(value, frame.qcfg.levels);
      s.values.insert(s.values.end(), indices.begin(), indices.end());
    }
    return s;
  };
  frame.hi = read_stream(n_hi);
  frame.lo = read_stream(n_lo);
  if (bit_reader.RemainderNonZero()) {
    throw FrameError(FrameErrorKind::kTrailingBytes,
                     "frame: nonzero padding bits");
  }
  return frame;
}

}  // namespace sehilo
