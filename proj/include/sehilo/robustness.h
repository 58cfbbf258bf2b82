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

#ifndef SEHILO_ROBUSTNESS_H_
#define SEHILO_ROBUSTNESS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sehilo/fsq.h"

namespace sehilo {

// Generic uniform quantizer over a span: m points v_j = lower + j * step,
// step = (upper - lower) / (m - 1). Note the quantizer span bounds are named
// lower/upper and the level count `levels` to keep them apart; the FSQ side
// uses `levels` for the per-dimension counts as well.
struct UniformQuantizerSpec {
  double lower = -1.0;
  double upper = 1.0;
  int levels = 2;

  double Step() const { return (upper - lower) / (levels - 1); }
  double Point(int j) const { return lower + j * Step(); }
  void Validate() const;
};

// Probability that AWGN with standard deviation sigma leaves a value in its
// own decision region of width step: erf(step / (2 * sqrt(2) * sigma)).
// Exact for interior levels; a lower bound for the two extreme levels, whose
// decision regions are one-sided and larger. sigma == 0 gives exactly 1.
double PCorrectSingle(double step, double sigma);
double PCorrectSingle(const UniformQuantizerSpec& spec, double sigma);

// Joint correct-quantization probability over independent dimensions: the
// product of the per-dimension probabilities.
double PCorrectMulti(std::span<const UniformQuantizerSpec> specs, double sigma);

// Identical-dimension shortcut: PCorrectSingle(spec, sigma) ^ n_dims.
double PCorrectMulti(const UniformQuantizerSpec& spec, double sigma, int n_dims);

// Which codewords the Monte Carlo estimator draws from.
//   kAll      uniform over the full codebook
//   kInterior uniform over codewords whose every index is in [1, m-2]
//   kEdge     uniform over codewords with at least one extreme index
enum class CodewordPool { kAll, kInterior, kEdge };

struct McEstimate {
  double rate = 0.0;       // fraction of trials with every index recovered
  double std_error = 0.0;  // binomial sqrt(p(1-p)/n)
  double dim_rate = 0.0;   // per-dimension recovery fraction, pooled
  long long n = 0;
};

// Empirical counterpart of the erf formula: draws codewords from the pool,
// perturbs the scaled-domain representatives with AWGN, re-quantizes, and
// counts exact index recovery. Trials may be partitioned across workers; each
// worker w uses the sub-stream seeded with seed ^ w, and merged counts do not
// depend on completion order.
McEstimate McCorrectRate(const QuantizerConfig& cfg, double sigma,
                         long long n_trials, uint64_t seed,
                         CodewordPool pool = CodewordPool::kAll,
                         int n_workers = 1);

struct RobustnessRow {
  double sigma = 0.0;
  double p_single = 0.0;     // erf theory, one dimension
  double p_multi = 0.0;      // erf theory ^ num_dims
  double mc_interior = 0.0;  // interior-conditioned empirical rate
  double mc_interior_se = 0.0;
  double mc_all = 0.0;  // unconditional empirical rate
  double mc_all_se = 0.0;
};

// Theory and Monte Carlo side by side over a sigma grid. Interior and
// unconditional rates are reported separately so the edge-effect gap stays
// visible. Requires every level count >= 3 (otherwise no interior codewords).
std::vector<RobustnessRow> RobustnessReport(const QuantizerConfig& cfg,
                                            std::span<const double> sigma_grid,
                                            long long n_trials, uint64_t seed,
                                            int n_workers = 1);

}  // namespace sehilo

#endif  // SEHILO_ROBUSTNESS_H_
