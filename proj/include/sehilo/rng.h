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

#ifndef SEHILO_RNG_H_
#define SEHILO_RNG_H_

#include <array>
#include <cstdint>

namespace sehilo {

// Deterministic 64-bit random stream: xoshiro256++ with splitmix64 seeding.
//
// The seed -> stream mapping is a compatibility contract of this repo and is
// pinned by golden-sample tests; changing the algorithm or the seeding
// procedure is a breaking change. Sub-streams for parallel workers are derived
// as Derived(seed, worker_index), i.e. seed ^ worker_index fed through the
// same seeding procedure.
class RngStream {
 public:
  explicit RngStream(uint64_t seed);

  static RngStream Derived(uint64_t base_seed, uint64_t index) {
    return RngStream(base_seed ^ index);
  }

  // Raw 64-bit output of the underlying generator.
  uint64_t NextU64();

  // Uniform double in [0, 1) with 53-bit resolution.
  double NextUnit();

  // Standard normal deviate via the Box-Muller transform. The second value of
  // each pair is cached, so draws come in deterministic pairs per stream.
  double NextGaussian();

  // Unbiased uniform integer in [0, bound); bound must be nonzero.
  uint64_t NextBelow(uint64_t bound);

 private:
  std::array<uint64_t, 4> state_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace sehilo

#endif  // SEHILO_RNG_H_
