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

#include "sehilo/robustness.h"

#include <cmath>
#include <future>
#include <stdexcept>
#include <vector>

#include "sehilo/rng.h"

namespace sehilo {
namespace {

void CheckSigma(double sigma) {
  // sigma == 0 is allowed as the noiseless limit; the erf argument becomes
  // +inf and every trial recovers.
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw std::invalid_argument("sigma must be finite and non-negative");
  }
}

bool HasEdgeIndex(const std::vector<int>& indices,
                  const std::vector<int>& levels) {
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == 0 || indices[i] == levels[i] - 1) return true;
  }
  return false;
}

struct TrialCounts {
  long long token_correct = 0;
  long long dim_correct = 0;
  long long n_trials = 0;
  long long n_dims_total = 0;
};

TrialCounts RunTrials(const QuantizerConfig& cfg, double sigma,
                      long long n_trials, uint64_t seed, CodewordPool pool) {
  RngStream rng(seed);
  const int d = cfg.num_dims();

  // Representatives looked up once; the hot loop still goes through the real
  // RequantizeIndex path.
  std::vector<std::vector<double>> reps(d);
  for (int dim = 0; dim < d; ++dim) {
    reps[dim].resize(cfg.levels[dim]);
    for (int j = 0; j < cfg.levels[dim]; ++j) {
      reps[dim][j] = RepresentativeValue(j, dim, cfg);
    }
  }

  TrialCounts counts;
  std::vector<int> sent(d);
  for (long long t = 0; t < n_trials; ++t) {
    switch (pool) {
      case CodewordPool::kAll:
        for (int i = 0; i < d; ++i) {
          sent[i] = static_cast<int>(rng.NextBelow(cfg.levels[i]));
        }
        break;
      case CodewordPool::kInterior:
        for (int i = 0; i < d; ++i) {
          sent[i] = 1 + static_cast<int>(rng.NextBelow(cfg.levels[i] - 2));
        }
        break;
      case CodewordPool::kEdge:
        do {
          for (int i = 0; i < d; ++i) {
            sent[i] = static_cast<int>(rng.NextBelow(cfg.levels[i]));
          }
        } while (!HasEdgeIndex(sent, cfg.levels));
        break;
    }

    int ok = 0;
    for (int i = 0; i < d; ++i) {
      const double received = reps[i][sent[i]] + sigma * rng.NextGaussian();
      if (RequantizeIndex(received, i, cfg) == sent[i]) ++ok;
    }
    counts.dim_correct += ok;
    counts.n_dims_total += d;
    if (ok == d) ++counts.token_correct;
    ++counts.n_trials;
  }
  return counts;
}

}  // namespace

void UniformQuantizerSpec::Validate() const {
  if (levels < 2) {
    throw std::invalid_argument("UniformQuantizerSpec: levels must be >= 2");
  }
  if (!std::isfinite(lower) || !std::isfinite(upper) || upper <= lower) {
    throw std::invalid_argument("UniformQuantizerSpec: need upper > lower");
  }
}

double PCorrectSingle(double step, double sigma) {
  if (!std::isfinite(step) || step <= 0.0) {
    throw std::invalid_argument("step must be finite and positive");
  }
  CheckSigma(sigma);
  return std::erf(step / (2.0 * std::sqrt(2.0) * sigma));
}

double PCorrectSingle(const UniformQuantizerSpec& spec, double sigma) {
  spec.Validate();
  return PCorrectSingle(spec.Step(), sigma);
}

double PCorrectMulti(std::span<const UniformQuantizerSpec> specs,
                     double sigma) {
  if (specs.empty()) {
    throw std::invalid_argument("PCorrectMulti: need at least one dimension");
  }
  double p = 1.0;
  for (const auto& spec : specs) p *= PCorrectSingle(spec, sigma);
  return p;
}

double PCorrectMulti(const UniformQuantizerSpec& spec, double sigma,
                     int n_dims) {
  if (n_dims < 1) {
    throw std::invalid_argument("PCorrectMulti: n_dims must be >= 1");
  }
  return std::pow(PCorrectSingle(spec, sigma), n_dims);
}

McEstimate McCorrectRate(const QuantizerConfig& cfg, double sigma,
                         long long n_trials, uint64_t seed, CodewordPool pool,
                         int n_workers) {
  cfg.Validate();
  CheckSigma(sigma);
  if (n_trials < 1) {
    throw std::invalid_argument("McCorrectRate: n_trials must be >= 1");
  }
  if (n_workers < 1) {
    throw std::invalid_argument("McCorrectRate: n_workers must be >= 1");
  }
  if (pool == CodewordPool::kInterior) {
    for (int m : cfg.levels) {
      if (m < 3) {
        throw std::invalid_argument(
            "McCorrectRate: interior pool needs every level count >= 3");
      }
    }
  }
  // Trials are split as evenly as possible; worker w runs on the sub-stream
  // seeded with seed ^ w so the merged estimate is independent of scheduling.
  const long long base = n_trials / n_workers;
  const long long rem = n_trials % n_workers;
  std::vector<std::future<TrialCounts>> futures;
  futures.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    const long long share = base + (w < rem ? 1 : 0);
    if (share == 0) continue;
    const uint64_t sub_seed = seed ^ static_cast<uint64_t>(w);
    futures.push_back(std::async(std::launch::async, RunTrials, cfg, sigma,
                                 share, sub_seed, pool));
  }

  TrialCounts total;
  for (auto& f : futures) {
    const TrialCounts c = f.get();
    total.token_correct += c.token_correct;
    total.dim_correct += c.dim_correct;
    total.n_trials += c.n_trials;
    total.n_dims_total += c.n_dims_total;
  }

  McEstimate est;
  est.n = total.n_trials;
  est.rate = static_cast<double>(total.token_correct) / total.n_trials;
  est.dim_rate = static_cast<double>(total.dim_correct) / total.n_dims_total;
  est.std_error = std::sqrt(est.rate * (1.0 - est.rate) / total.n_trials);
  return est;
}

std::vector<RobustnessRow> RobustnessReport(const QuantizerConfig& cfg,
                                            std::span<const double> sigma_grid,
                                            long long n_trials, uint64_t seed,
                                            int n_workers) {
  cfg.Validate();
  for (int m : cfg.levels) {
    if (m < 3) {
      throw std::invalid_argument(
          "RobustnessReport: needs every level count >= 3");
    }
  }
  std::vector<RobustnessRow> rows;
  rows.reserve(sigma_grid.size());
  for (size_t i = 0; i < sigma_grid.size(); ++i) {
    const double sigma = sigma_grid[i];
    RobustnessRow row;
    row.sigma = sigma;
    row.p_single = PCorrectSingle(cfg.alpha, sigma);
    row.p_multi = std::pow(row.p_single, cfg.num_dims());
    // Row stride and pool salt sit far above any worker index, so the
    // seed ^ worker sub-streams never collide across rows or pools.
    const uint64_t row_seed = seed ^ ((i + 1) * 0x9E3779B97F4A7C15ULL);
    const McEstimate interior = McCorrectRate(
        cfg, sigma, n_trials, row_seed, CodewordPool::kInterior, n_workers);
    const McEstimate all =
        McCorrectRate(cfg, sigma, n_trials, row_seed ^ 0x414C4C00ULL,
                      CodewordPool::kAll, n_workers);
    row.mc_interior = interior.rate;
    row.mc_interior_se = interior.std_error;
    row.mc_all = all.rate;
    row.mc_all_se = all.std_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sehilo
