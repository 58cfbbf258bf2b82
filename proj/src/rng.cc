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

#include "sehilo/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sehilo {
namespace {

uint64_t SplitMix64Next(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t RotL(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(uint64_t seed) {
  uint64_t s = seed;
  for (auto& word : state_) {
    word = SplitMix64Next(s);
  }
}

uint64_t RngStream::NextU64() {
  const uint64_t result = RotL(state_[0] + state_[3], 23) + state_[0];
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = RotL(state_[3], 45);
  return result;
}

double RngStream::NextUnit() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::NextGaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - NextUnit();
  const double u2 = NextUnit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = radius * std::sin(angle);
  has_cached_gaussian_ = true;
  return radius * std::cos(angle);
}

uint64_t RngStream::NextBelow(uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("RngStream::NextBelow: bound must be nonzero");
  }
  // Rejection below the largest multiple of bound, so the result is unbiased.
  const uint64_t threshold = (0ULL - bound) % bound;
  for (;;) {
    const uint64_t x = NextU64();
    if (x >= threshold) {
      return x % bound;
    }
  }
}

}  // namespace sehilo
