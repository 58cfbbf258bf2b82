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

#ifndef SEHILO_METRICS_H_
#define SEHILO_METRICS_H_

#include <vector>

#include "sehilo/streams.h"
#include "sehilo/tensor.h"

namespace sehilo {

// Mean squared error between a reconstruction and its reference, averaged
// over every element. Shapes must match.
double ReconLoss(const Tensor& reconstructed, const Tensor& reference);

// Discriminator-style adversarial loss,
// -mean(log d_real) - mean(log(1 - d_fake)), with both score vectors clamped
// into [1e-12, 1 - 1e-12] before the logs. Scores outside [0, 1] are errors.
double AdvLoss(const std::vector<double>& d_real,
               const std::vector<double>& d_fake);

struct LossWeights {
  double lambda1 = 1.0;  // perceptual term
  double lambda2 = 1.0;  // adversarial term
};

// recon + lambda1 * perceptual + lambda2 * adversarial.
double TotalLoss(double recon, double perceptual, double adversarial,
                 const LossWeights& weights);

// 10 * log10(peak^2 / mse), capped at 99.0 for (near-)zero error.
double Psnr(const Tensor& reconstructed, const Tensor& reference, double peak);

// Mean structural similarity over all valid (sliding) window x window
// patches with a uniform window, computed per channel and averaged.
// Rank-2 tensors are treated as single-channel; rank-3 as (h, w, c).
// Stabilizers follow the usual choice c1 = (k1*peak)^2, c2 = (k2*peak)^2.
double Ssim(const Tensor& reconstructed, const Tensor& reference, double peak,
            int window = 8, double k1 = 0.01, double k2 = 0.03);

struct SymbolAccuracy {
  // Fraction of tokens whose full index tuple was recovered.
  double overall = 0.0;
  double hi = 0.0;
  double lo = 0.0;
  // Per-token fraction of recovered dimensions (1.0 means exact recovery).
  std::vector<double> per_token_hi;
  std::vector<double> per_token_lo;
};

// Token-level recovery rates between sent and recovered streams.
SymbolAccuracy ComputeSymbolAccuracy(const DualIndices& sent,
                                     const DualIndices& recovered);

}  // namespace sehilo

#endif  // SEHILO_METRICS_H_
