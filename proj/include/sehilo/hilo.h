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

#ifndef SEHILO_HILO_H_
#define SEHILO_HILO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sehilo/channel.h"
#include "sehilo/fsq.h"
#include "sehilo/nn_ops.h"
#include "sehilo/streams.h"
#include "sehilo/tensor.h"

namespace sehilo {

// Dual-branch transformer configuration. Channels [0, d_hi) of each token are
// the high-frequency branch (windowed self-attention), the remaining d_lo the
// low-frequency branch (cross-attention against pooled keys/values).
struct HiLoConfig {
  int d_model = 32;
  int d_hi = 16;
  int d_lo = 16;
  int pool_stride = 2;
  int window_size = 2;
  int n_heads = 4;
  int n_blocks = 8;
  int patch_size = 4;
  int d_fsq = 5;
  int mlp_ratio = 4;
  int in_channels = 3;
  double layernorm_eps = 1e-5;

  void Validate() const;
};

// Splits (h, w, d_model) into channels [0, d_hi) and [d_hi, d_model). A
// degenerate branch (zero channels) comes back as a default, rank-0 tensor.
void SplitChannels(const Tensor& x, const HiLoConfig& cfg, Tensor* x_hi,
                   Tensor* x_lo);

// Inverse of SplitChannels; rank-0 inputs contribute no channels.
Tensor ConcatChannels(const Tensor& x_hi, const Tensor& x_lo,
                      const HiLoConfig& cfg);

// Per-head attention weights captured for inspection; each entry is a
// row-stochastic (n_queries, n_keys) matrix.
struct AttentionProbe {
  std::vector<Tensor> head_weights;
};

// Windowed multi-head self-attention over (h, w, d_hi): tokens attend only
// within their own window_size x window_size tile.
Tensor HiBranch(const Tensor& x_hi, const WeightSet& ws,
                const std::string& prefix, const HiLoConfig& cfg,
                AttentionProbe* probe = nullptr);

// Cross-attention over (h, w, d_lo): full-resolution queries, keys/values
// from the pool_stride-downsampled map, so each attention row has
// h * w / pool_stride^2 entries.
Tensor LoBranch(const Tensor& x_lo, const WeightSet& ws,
                const std::string& prefix, const HiLoConfig& cfg,
                AttentionProbe* probe = nullptr);

// Pre-norm block: x + concat(HiBranch, LoBranch)(LN(x)), then y + MLP(LN(y)).
// Shape-preserving on (h, w, d_model).
Tensor HiLoBlock(const Tensor& x, const WeightSet& ws,
                 const std::string& prefix, const HiLoConfig& cfg,
                 AttentionProbe* probe_hi = nullptr,
                 AttentionProbe* probe_lo = nullptr);

// Fresh random parameter set for the encoder/decoder pair. The draw order is
// fixed, so (cfg, seed) determines every tensor.
WeightSet InitWeights(const HiLoConfig& cfg, uint64_t seed);

// Weight serialization: one tensor file per entry plus manifest.json in dir.
void SaveWeightSet(const WeightSet& ws, const std::string& dir);
WeightSet LoadWeightSet(const std::string& dir);

struct EncodeResult {
  DualStream values;   // scaled-domain representatives, shape (n, d_fsq)
  DualIndices indices;
};

// Image (h_img, w_img, in_channels) -> patch embed -> n_blocks HiLo blocks ->
// channel split -> per-stream linear heads -> FSQ.
EncodeResult Encode(const Tensor& image, const WeightSet& ws,
                    const HiLoConfig& cfg, const QuantizerConfig& qcfg);

struct DecodeResult {
  Tensor image;
  DualIndices recovered;  // indices after receiver-side requantization
};

// Received scaled-domain streams -> requantize -> linear maps -> concat ->
// n_blocks HiLo blocks -> patch unembed.
DecodeResult Decode(const DualStream& received, int image_h, int image_w,
                    const WeightSet& ws, const HiLoConfig& cfg,
                    const QuantizerConfig& qcfg);

struct PipelineStats {
  int n_tokens = 0;
  double sigma_hi = 0.0;
  double sigma_lo = 0.0;
  double measured_snr_hi_db = 0.0;
  double measured_snr_lo_db = 0.0;
  // Fraction of tokens whose full index tuple survived the channel.
  double symbol_acc_hi = 0.0;
  double symbol_acc_lo = 0.0;
  // Token recovery rate over tokens whose sent indices are all interior,
  // the regime where the erf law is exact.
  double interior_acc_hi = 0.0;
  double interior_acc_lo = 0.0;
  long long n_interior_hi = 0;
  long long n_interior_lo = 0;
  // erf(alpha / (2 sqrt(2) sigma))^d_fsq at the realized sigma.
  double theory_acc_hi = 0.0;
  double theory_acc_lo = 0.0;
};

struct PipelineResult {
  Tensor reconstruction;
  EncodeResult encoded;
  DualIndices recovered;
  PipelineStats stats;
};

// encode -> independent AWGN per stream -> decode, with accuracy bookkeeping.
PipelineResult RunPipeline(const Tensor& image, const WeightSet& ws,
                           const HiLoConfig& cfg, const QuantizerConfig& qcfg,
                           const ChannelConfig& channel_hi,
                           const ChannelConfig& channel_lo);

}  // namespace sehilo

#endif  // SEHILO_HILO_H_
