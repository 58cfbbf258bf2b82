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

#include "sehilo/nn_ops.h"

#include <cmath>
#include <stdexcept>

namespace sehilo {
namespace {

void CheckRank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw std::invalid_argument(std::string(what) + ": wrong tensor rank");
  }
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckRank(a, 2, "MatMul");
  CheckRank(b, 2, "MatMul");
  if (a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("MatMul: inner dimensions disagree");
  }
  const int64_t n = a.dim(0);
  const int64_t k = a.dim(1);
  const int64_t m = b.dim(1);
  Tensor c({n, m});
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) {
        acc += a.at(i, p) * b.at(p, j);
      }
      c.at(i, j) = acc;
    }
  }
  return c;
}

Tensor SoftmaxRows(const Tensor& x) {
  CheckRank(x, 2, "SoftmaxRows");
  const int64_t n = x.dim(0);
  const int64_t d = x.dim(1);
  if (d == 0) {
    throw std::invalid_argument("SoftmaxRows: empty rows");
  }
  Tensor out({n, d});
  for (int64_t i = 0; i < n; ++i) {
    double row_max = x.at(i, 0);
    for (int64_t j = 1; j < d; ++j) row_max = std::max(row_max, x.at(i, j));
    double sum = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double e = std::exp(x.at(i, j) - row_max);
      out.at(i, j) = e;
      sum += e;
    }
    for (int64_t j = 0; j < d; ++j) out.at(i, j) /= sum;
  }
  return out;
}

Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor& bias,
                 double eps) {
  CheckRank(x, 2, "LayerNorm");
  CheckRank(scale, 1, "LayerNorm");
  CheckRank(bias, 1, "LayerNorm");
  const int64_t n = x.dim(0);
  const int64_t d = x.dim(1);
  if (scale.dim(0) != d || bias.dim(0) != d) {
    throw std::invalid_argument("LayerNorm: scale/bias length mismatch");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("LayerNorm: eps must be positive");
  }
  Tensor out({n, d});
  for (int64_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int64_t j = 0; j < d; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double delta = x.at(i, j) - mean;
      var += delta * delta;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t j = 0; j < d; ++j) {
      out.at(i, j) = (x.at(i, j) - mean) * inv * scale.at(j) + bias.at(j);
    }
  }
  return out;
}

Tensor AvgPool2d(const Tensor& x, int stride) {
  CheckRank(x, 3, "AvgPool2d");
  if (stride < 1) {
    throw std::invalid_argument("AvgPool2d: stride must be >= 1");
  }
  const int64_t h = x.dim(0);
  const int64_t w = x.dim(1);
  const int64_t c = x.dim(2);
  if (h % stride != 0 || w % stride != 0) {
    throw std::invalid_argument("AvgPool2d: shape not divisible by stride");
  }
  Tensor out({h / stride, w / stride, c});
  const double inv = 1.0 / (static_cast<double>(stride) * stride);
  for (int64_t i = 0; i < h / stride; ++i) {
    for (int64_t j = 0; j < w / stride; ++j) {
      for (int64_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int di = 0; di < stride; ++di) {
          for (int dj = 0; dj < stride; ++dj) {
            acc += x.at(i * stride + di, j * stride + dj, ch);
          }
        }
        out.at(i, j, ch) = acc * inv;
      }
    }
  }
  return out;
}

Tensor WindowPartition(const Tensor& x, int window) {
  CheckRank(x, 3, "WindowPartition");
  if (window < 1) {
    throw std::invalid_argument("WindowPartition: window must be >= 1");
  }
  const int64_t h = x.dim(0);
  const int64_t w = x.dim(1);
  const int64_t c = x.dim(2);
  if (h % window != 0 || w % window != 0) {
    throw std::invalid_argument(
        "WindowPartition: shape not divisible by window");
  }
  const int64_t rows = h / window;
  const int64_t cols = w / window;
  Tensor out({rows * cols, static_cast<int64_t>(window) * window, c});
  for (int64_t wi = 0; wi < rows; ++wi) {
    for (int64_t wj = 0; wj < cols; ++wj) {
      const int64_t win = wi * cols + wj;
      for (int di = 0; di < window; ++di) {
        for (int dj = 0; dj < window; ++dj) {
          const int64_t pixel = di * window + dj;
          for (int64_t ch = 0; ch < c; ++ch) {
            out.at(win, pixel, ch) =
                x.at(wi * window + di, wj * window + dj, ch);
          }
        }
      }
    }
  }
  return out;
}

Tensor WindowMerge(const Tensor& windows, int h, int w, int window) {
  CheckRank(windows, 3, "WindowMerge");
  if (window < 1 || h < 1 || w < 1 || h % window != 0 || w % window != 0) {
    throw std::invalid_argument("WindowMerge: invalid target shape");
  }
  const int64_t rows = h / window;
  const int64_t cols = w / window;
  const int64_t c = windows.dim(2);
  if (windows.dim(0) != rows * cols ||
      windows.dim(1) != static_cast<int64_t>(window) * window) {
    throw std::invalid_argument("WindowMerge: window tensor shape mismatch");
  }
  Tensor out({static_cast<int64_t>(h), static_cast<int64_t>(w), c});
  for (int64_t wi = 0; wi < rows; ++wi) {
    for (int64_t wj = 0; wj < cols; ++wj) {
      const int64_t win = wi * cols + wj;
      for (int di = 0; di < window; ++di) {
        for (int dj = 0; dj < window; ++dj) {
          const int64_t pixel = di * window + dj;
          for (int64_t ch = 0; ch < c; ++ch) {
            out.at(wi * window + di, wj * window + dj, ch) =
                windows.at(win, pixel, ch);
          }
        }
      }
    }
  }
  return out;
}

const Tensor& WeightSet::Get(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw std::out_of_range("WeightSet: missing tensor " + name);
  }
  return it->second;
}

Tensor UniformInitTensor(std::vector<int64_t> shape, int fan_in,
                         RngStream& rng) {
  if (fan_in < 1) {
    throw std::invalid_argument("UniformInitTensor: fan_in must be >= 1");
  }
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (int64_t i = 0; i < t.size(); ++i) {
    t.at(i) = (2.0 * rng.NextUnit() - 1.0) * bound;
  }
  return t;
}

}  // namespace sehilo
