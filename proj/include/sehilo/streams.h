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

#ifndef SEHILO_STREAMS_H_
#define SEHILO_STREAMS_H_

#include <vector>

#include "sehilo/tensor.h"

namespace sehilo {

// Level indices for a batch of tokens, row-major: token t, dimension j at
// values[t * d + j].
struct TokenIndices {
  int n_tokens = 0;
  int d = 0;
  std::vector<int> values;

  int At(int token, int dim) const { return values[token * d + dim]; }
};

// Paired high/low-frequency payloads moving through the pipeline together.
struct DualStream {
  Tensor hi;
  Tensor lo;
};

struct DualIndices {
  TokenIndices hi;
  TokenIndices lo;
};

}  // namespace sehilo

#endif  // SEHILO_STREAMS_H_
