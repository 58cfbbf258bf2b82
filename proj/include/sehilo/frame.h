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

#ifndef SEHILO_FRAME_H_
#define SEHILO_FRAME_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sehilo/fsq.h"
#include "sehilo/streams.h"

namespace sehilo {

// Frame byte layout, all multi-byte fields little-endian:
//   magic        4 bytes "SHLF"
//   version      u8, currently 1
//   level_count  u8
//   levels       level_count x u8
//   alpha        f32
//   epsilon      f32
//   n_tokens_hi  u32
//   n_tokens_lo  u32
//   seed         u64
//   payload      ceil((n_hi + n_lo) * bits_per_token / 8) bytes
// Each token is one mixed-radix integer (dimension 0 least significant),
// written LSB-first into the bitstream, hi tokens before lo tokens. Unused
// bits in the final payload byte must be zero; the decoder enforces payload
// length and padding strictly.

enum class FrameErrorKind {
  kBadMagic,
  kBadVersion,
  kBadHeader,
  kTruncated,
  kTrailingBytes,
  kIndexOverflow,
};

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

// Mixed-radix index packing: value = sum_i indices[i] * prod_{j<i} m_j.
uint64_t PackToken(std::span<const int> indices, std::span<const int> levels);
std::vector<int> UnpackToken(uint64_t value, std::span<const int> levels);

// Smallest b with 2^b >= prod(m_i), at most 64.
int BitsPerToken(std::span<const int> levels);

std::vector<uint8_t> EncodeFrame(const TokenIndices& hi,
                                 const TokenIndices& lo,
                                 const QuantizerConfig& qcfg, uint64_t seed);

struct DecodedFrame {
  TokenIndices hi;
  TokenIndices lo;
  QuantizerConfig qcfg;  // alpha and epsilon carry float32 precision
  uint64_t seed = 0;
};

DecodedFrame DecodeFrame(const std::vector<uint8_t>& bytes);

}  // namespace sehilo

#endif  // SEHILO_FRAME_H_
