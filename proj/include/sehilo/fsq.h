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

#ifndef SEHILO_FSQ_H_
#define SEHILO_FSQ_H_

#include <cstdint>
#include <span>
#include <vector>

namespace sehilo {

// Finite scalar quantizer configuration. Each latent dimension i is quantized
// independently to levels[i] values on a grid with spacing alpha in the
// scaled domain, so the implicit codebook is the product of the per-dimension
// grids and needs no learned code vectors.
//
// Derived per dimension:
//   half-width h = (m - 1)(1 + epsilon) / 2
//   offset     o = 0.5 for even m, 0 for odd m
//   shift      s = atanh(o / h)
struct QuantizerConfig {
  std::vector<int> levels;  // m_i, each >= 2
  double alpha = 2.0;       // span scaling factor, > 0
  double epsilon = 1e-3;    // stability margin, > 0

  int num_dims() const { return static_cast<int>(levels.size()); }
  double HalfWidth(int dim) const;
  double Offset(int dim) const;
  double Shift(int dim) const;
  // Edge of the scaled quantization span, alpha * h.
  double SpanEdge(int dim) const;
  uint64_t CodebookSize() const;

  // Throws std::invalid_argument on any violated invariant.
  void Validate() const;
};

// One quantized latent vector: per-dimension level indices plus the
// representative values in the scaled domain and normalized to [-1, 1].
struct TokenCode {
  std::vector<int> indices;               // indices[i] in [0, m_i)
  std::vector<double> scaled_values;      // representative, scaled domain
  std::vector<double> normalized_values;  // scaled / (alpha * h), in [-1, 1]

  bool operator==(const TokenCode&) const = default;
};

// Rounds to nearest with ties away from zero, the repo-wide rounding rule.
// Fixed explicitly so exact .5 boundaries behave identically everywhere.
double RoundHalfAwayFromZero(double x);

// Compresses z into the scaled quantization span:
//   alpha * (tanh(z + s) * h - o).
// Strictly increasing in z. Throws std::invalid_argument on non-finite z.
// For odd m the output lies strictly inside (-alpha*h, alpha*h); for even m
// the offset makes the range (-alpha*(h+o), alpha*(h-o)).
double Bound(double z, int dim, const QuantizerConfig& cfg);

struct QuantizeResult {
  int index = 0;          // level index in [0, m)
  double scaled_value = 0;  // representative in the scaled domain
};

// Rounds a bounded value to its nearest level.
//
// The level grid is symmetric for every parity: representatives sit at
//   (index - (m-1)/2) * alpha,   index = 0..m-1,
// which is the integer grid ell*alpha for odd m (ell = round(b/alpha)) and
// the half-integer grid (ell + 0.5)*alpha for even m (the bounding offset
// o = 0.5 folded back after rounding). index = round(b/alpha) + floor(m/2).
QuantizeResult Quantize(double bounded, int dim, const QuantizerConfig& cfg);

// scaled_value / (alpha * h); lies in [-1, 1] for every representative.
double Normalize(double scaled_value, int dim, const QuantizerConfig& cfg);

// Representative in the scaled domain for a level index.
double RepresentativeValue(int index, int dim, const QuantizerConfig& cfg);

// Full per-dimension chain bound -> quantize -> normalize.
// z must have exactly cfg.num_dims() entries.
TokenCode FsqForward(std::span<const double> z, const QuantizerConfig& cfg);

// Receiver-side re-quantization of channel output: clamps each value to the
// scaled span [-alpha*h, alpha*h], then rounds to the nearest representative.
// Recovers the transmitted code exactly whenever every |noise_i| < alpha/2
// and the code is interior.
TokenCode Requantize(std::span<const double> received, const QuantizerConfig& cfg);

// Single-dimension requantization, returning just the recovered level index.
int RequantizeIndex(double received, int dim, const QuantizerConfig& cfg);

// TokenCode for a given index tuple (each indices[i] in [0, m_i)).
TokenCode TokenFromIndices(std::span<const int> indices, const QuantizerConfig& cfg);

// All prod(m_i) codewords, ordered with dimension 0 fastest.
std::vector<TokenCode> EnumerateCodewords(const QuantizerConfig& cfg);

}  // namespace sehilo

#endif  // SEHILO_FSQ_H_
