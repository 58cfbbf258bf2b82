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

#ifndef SEHILO_NN_OPS_H_
#define SEHILO_NN_OPS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sehilo/rng.h"
#include "sehilo/tensor.h"

namespace sehilo {

// C = A * B for rank-2 tensors, (n,k) x (k,m) -> (n,m). Accumulation order is
// fixed (k innermost ascending) so results are bit-reproducible.
Tensor MatMul(const Tensor& a, const Tensor& b);

// Row-wise softmax of a rank-2 tensor with max subtraction.
Tensor SoftmaxRows(const Tensor& x);

// Per-row layer normalization of a rank-2 (n, d) tensor:
// (x - mean) / sqrt(var + eps) * scale + bias, with scale and bias of shape
// (d). Variance uses the biased 1/d convention.
Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor& bias,
                 double eps);

// Non-overlapping stride x stride mean pooling of a rank-3 (h, w, c) tensor.
// h and w must be divisible by stride.
Tensor AvgPool2d(const Tensor& x, int stride);

// Rearranges a rank-3 (h, w, c) tensor into (n_windows, window*window, c)
// tiles of non-overlapping window x window blocks, windows ordered row-major
// over the grid and pixels row-major inside each block.
Tensor WindowPartition(const Tensor& x, int window);

// Inverse of WindowPartition.
Tensor WindowMerge(const Tensor& windows, int h, int w, int window);

// Named parameter collection for a model, keyed by dotted path.
struct WeightSet {
  uint64_t init_seed = 0;
  std::map<std::string, Tensor> tensors;

  const Tensor& Get(const std::string& name) const;
  bool Has(const std::string& name) const { return tensors.count(name) > 0; }
};

// Tensor with entries drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor UniformInitTensor(std::vector<int64_t> shape, int fan_in,
                         RngStream& rng);

}  // namespace sehilo

#endif  // SEHILO_NN_OPS_H_
