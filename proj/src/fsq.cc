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

#include "sehilo/fsq.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sehilo {
namespace {

void CheckDim(int dim, const QuantizerConfig& cfg) {
  if (dim < 0 || dim >= cfg.num_dims()) {
    throw std::out_of_range("QuantizerConfig: dimension index out of range");
  }
}

// Maps a value on the centered level grid (integer multiples of alpha after
// offset removal) to its level index, clamped into [0, m-1].
int IndexFromCentered(double centered, int m) {
  const int level = static_cast<int>(RoundHalfAwayFromZero(centered));
  const int index = level + m / 2;
  return std::clamp(index, 0, m - 1);
}

}  // namespace

double RoundHalfAwayFromZero(double x) { return std::round(x); }

double QuantizerConfig::HalfWidth(int dim) const {
  CheckDim(dim, *this);
  return (levels[dim] - 1) * (1.0 + epsilon) / 2.0;
}

double QuantizerConfig::Offset(int dim) const {
  CheckDim(dim, *this);
  return levels[dim] % 2 == 0 ? 0.5 : 0.0;
}

double QuantizerConfig::Shift(int dim) const {
  return std::atanh(Offset(dim) / HalfWidth(dim));
}

double QuantizerConfig::SpanEdge(int dim) const { return alpha * HalfWidth(dim); }

uint64_t QuantizerConfig::CodebookSize() const {
  uint64_t size = 1;
  for (int m : levels) {
    size *= static_cast<uint64_t>(m);
  }
  return size;
}

void QuantizerConfig::Validate() const {
  if (levels.empty()) {
    throw std::invalid_argument("QuantizerConfig: levels must be nonempty");
  }
  for (int m : levels) {
    if (m < 2) {
      throw std::invalid_argument("QuantizerConfig: every level count must be >= 2");
    }
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("QuantizerConfig: alpha must be positive and finite");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("QuantizerConfig: epsilon must be positive and finite");
  }
}

double Bound(double z, int dim, const QuantizerConfig& cfg) {
  CheckDim(dim, cfg);
  if (!std::isfinite(z)) {
    throw std::invalid_argument("Bound: input must be finite");
  }
  const double h = cfg.HalfWidth(dim);
  const double o = cfg.Offset(dim);
  const double s = cfg.Shift(dim);
  return cfg.alpha * (std::tanh(z + s) * h - o);
}

QuantizeResult Quantize(double bounded, int dim, const QuantizerConfig& cfg) {
  CheckDim(dim, cfg);
  const int m = cfg.levels[dim];
  QuantizeResult result;
  result.index = IndexFromCentered(bounded / cfg.alpha, m);
  result.scaled_value = RepresentativeValue(result.index, dim, cfg);
  return result;
}

double Normalize(double scaled_value, int dim, const QuantizerConfig& cfg) {
  return scaled_value / (cfg.alpha * cfg.HalfWidth(dim));
}

double RepresentativeValue(int index, int dim, const QuantizerConfig& cfg) {
  CheckDim(dim, cfg);
  const int m = cfg.levels[dim];
  if (index < 0 || index >= m) {
    throw std::out_of_range("RepresentativeValue: index out of range");
  }
  return (index - (m - 1) / 2.0) * cfg.alpha;
}

TokenCode FsqForward(std::span<const double> z, const QuantizerConfig& cfg) {
  if (static_cast<int>(z.size()) != cfg.num_dims()) {
    throw std::invalid_argument("FsqForward: dimension mismatch");
  }
  TokenCode code;
  code.indices.reserve(z.size());
  code.scaled_values.reserve(z.size());
  code.normalized_values.reserve(z.size());
  for (int dim = 0; dim < cfg.num_dims(); ++dim) {
    const double bounded = Bound(z[dim], dim, cfg);
    const QuantizeResult q = Quantize(bounded, dim, cfg);
    code.indices.push_back(q.index);
    code.scaled_values.push_back(q.scaled_value);
    code.normalized_values.push_back(Normalize(q.scaled_value, dim, cfg));
  }
  return code;
}

TokenCode Requantize(std::span<const double> received, const QuantizerConfig& cfg) {
  if (static_cast<int>(received.size()) != cfg.num_dims()) {
    throw std::invalid_argument("Requantize: dimension mismatch");
  }
  TokenCode code;
  code.indices.reserve(received.size());
  code.scaled_values.reserve(received.size());
  code.normalized_values.reserve(received.size());
  for (int dim = 0; dim < cfg.num_dims(); ++dim) {
    const int index = RequantizeIndex(received[dim], dim, cfg);
    code.indices.push_back(index);
    const double scaled = RepresentativeValue(index, dim, cfg);
    code.scaled_values.push_back(scaled);
    code.normalized_values.push_back(Normalize(scaled, dim, cfg));
  }
  return code;
}

int RequantizeIndex(double received, int dim, const QuantizerConfig& cfg) {
  CheckDim(dim, cfg);
  const double edge = cfg.SpanEdge(dim);
  const double clamped = std::clamp(received, -edge, edge);
  // Representatives carry the even-m offset, so remove it before rounding on
  // the centered grid.
  return IndexFromCentered(clamped / cfg.alpha - cfg.Offset(dim),
                           cfg.levels[dim]);
}

TokenCode TokenFromIndices(std::span<const int> indices, const QuantizerConfig& cfg) {
  if (static_cast<int>(indices.size()) != cfg.num_dims()) {
    throw std::invalid_argument("TokenFromIndices: dimension mismatch");
  }
  TokenCode code;
  code.indices.assign(indices.begin(), indices.end());
  code.scaled_values.reserve(indices.size());
  code.normalized_values.reserve(indices.size());
  for (int dim = 0; dim < cfg.num_dims(); ++dim) {
    const double scaled = RepresentativeValue(indices[dim], dim, cfg);
    code.scaled_values.push_back(scaled);
    code.normalized_values.push_back(Normalize(scaled, dim, cfg));
  }
  return code;
}

std::vector<TokenCode> EnumerateCodewords(const QuantizerConfig& cfg) {
  cfg.Validate();
  const uint64_t total = cfg.CodebookSize();
  std::vector<TokenCode> codewords;
  codewords.reserve(total);
  std::vector<int> indices(cfg.num_dims(), 0);
  for (uint64_t n = 0; n < total; ++n) {
    codewords.push_back(TokenFromIndices(indices, cfg));
    for (int dim = 0; dim < cfg.num_dims(); ++dim) {
      if (++indices[dim] < cfg.levels[dim]) {
        break;
      }
      indices[dim] = 0;
    }
  }
  return codewords;
}

}  // namespace sehilo
