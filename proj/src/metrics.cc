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

#include "sehilo/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sehilo {
namespace {

constexpr double kLogClamp = 1e-12;
constexpr double kPsnrCap = 99.0;

double MeanSquaredError(const Tensor& a, const Tensor& b) {
  if (!a.SameShape(b)) {
    throw std::invalid_argument("metrics: tensor shapes disagree");
  }
  if (a.size() == 0) {
    throw std::invalid_argument("metrics: empty tensors");
  }
  double acc = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = a.at(i) - b.at(i);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double MeanLog(const std::vector<double>& scores, bool complement) {
  if (scores.empty()) {
    throw std::invalid_argument("AdvLoss: empty score vector");
  }
  double acc = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw std::invalid_argument("AdvLoss: scores must lie in [0, 1]");
    }
    const double v = complement ? 1.0 - s : s;
    acc += std::log(std::clamp(v, kLogClamp, 1.0 - kLogClamp));
  }
  return acc / static_cast<double>(scores.size());
}

struct ChannelView {
  const Tensor* t;
  int64_t h, w, c;
  double At(int64_t i, int64_t j, int64_t ch) const {
    return t->rank() == 2 ? t->at(i, j) : t->at(i, j, ch);
  }
};

ChannelView ViewOf(const Tensor& t, const char* what) {
  if (t.rank() == 2) return {&t, t.dim(0), t.dim(1), 1};
  if (t.rank() == 3) return {&t, t.dim(0), t.dim(1), t.dim(2)};
  throw std::invalid_argument(std::string(what) + ": need a rank-2 or rank-3 tensor");
}

}  // namespace

double ReconLoss(const Tensor& reconstructed, const Tensor& reference) {
  return MeanSquaredError(reconstructed, reference);
}

double AdvLoss(const std::vector<double>& d_real,
               const std::vector<double>& d_fake) {
  return -MeanLog(d_real, false) - MeanLog(d_fake, true);
}

double TotalLoss(double recon, double perceptual, double adversarial,
                 const LossWeights& weights) {
  return recon + weights.lambda1 * perceptual + weights.lambda2 * adversarial;
}

double Psnr(const Tensor& reconstructed, const Tensor& reference,
            double peak) {
  if (!std::isfinite(peak) || peak <= 0.0) {
    throw std::invalid_argument("Psnr: peak must be finite and positive");
  }
  const double mse = MeanSquaredError(reconstructed, reference);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double Ssim(const Tensor& reconstructed, const Tensor& reference, double peak,
            int window, double k1, double k2) {
  if (!std::isfinite(peak) || peak <= 0.0) {
    throw std::invalid_argument("Ssim: peak must be finite and positive");
  }
  if (window < 1) {
    throw std::invalid_argument("Ssim: window must be >= 1");
  }
  if (!reconstructed.SameShape(reference)) {
    throw std::invalid_argument("Ssim: tensor shapes disagree");
  }
  const ChannelView x = ViewOf(reconstructed, "Ssim");
  const ChannelView y = ViewOf(reference, "Ssim");
  if (x.h < window || x.w < window) {
    throw std::invalid_argument("Ssim: image smaller than window");
  }

  const double c1 = (k1 * peak) * (k1 * peak);
  const double c2 = (k2 * peak) * (k2 * peak);
  const double inv_n = 1.0 / (static_cast<double>(window) * window);

  double total = 0.0;
  int64_t count = 0;
  for (int64_t ch = 0; ch < x.c; ++ch) {
    for (int64_t i = 0; i + window <= x.h; ++i) {
      for (int64_t j = 0; j + window <= x.w; ++j) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int di = 0; di < window; ++di) {
          for (int dj = 0; dj < window; ++dj) {
            const double a = x.At(i + di, j + dj, ch);
            const double b = y.At(i + di, j + dj, ch);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
          }
        }
        const double mx = sx * inv_n;
        const double my = sy * inv_n;
        const double vx = sxx * inv_n - mx * mx;
        const double vy = syy * inv_n - my * my;
        const double cov = sxy * inv_n - mx * my;
        const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
        total += num / den;
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

SymbolAccuracy ComputeSymbolAccuracy(const DualIndices& sent,
                                     const DualIndices& recovered) {
  const auto check = [](const TokenIndices& a, const TokenIndices& b) {
    if (a.n_tokens != b.n_tokens || a.d != b.d ||
        a.values.size() != b.values.size() ||
        a.values.size() !=
            static_cast<size_t>(a.n_tokens) * static_cast<size_t>(a.d)) {
      throw std::invalid_argument("ComputeSymbolAccuracy: stream shape mismatch");
    }
    if (a.n_tokens == 0 || a.d == 0) {
      throw std::invalid_argument("ComputeSymbolAccuracy: empty stream");
    }
  };
  check(sent.hi, recovered.hi);
  check(sent.lo, recovered.lo);

  // A token counts as recovered only when every dimension matches.
  const auto stream_acc = [](const TokenIndices& a, const TokenIndices& b,
                             std::vector<double>& per_token) {
    long long exact = 0;
    per_token.resize(a.n_tokens);
    for (int t = 0; t < a.n_tokens; ++t) {
      int ok = 0;
      for (int j = 0; j < a.d; ++j) {
        if (a.At(t, j) == b.At(t, j)) ++ok;
      }
      per_token[t] = static_cast<double>(ok) / a.d;
      if (ok == a.d) ++exact;
    }
    return exact;
  };

  SymbolAccuracy acc;
  const long long hi_exact = stream_acc(sent.hi, recovered.hi, acc.per_token_hi);
  const long long lo_exact = stream_acc(sent.lo, recovered.lo, acc.per_token_lo);
  acc.hi = static_cast<double>(hi_exact) / sent.hi.n_tokens;
  acc.lo = static_cast<double>(lo_exact) / sent.lo.n_tokens;
  acc.overall = static_cast<double>(hi_exact + lo_exact) /
                (sent.hi.n_tokens + sent.lo.n_tokens);
  return acc;
}

}  // namespace sehilo
