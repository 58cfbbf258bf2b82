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

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "sehilo/rng.h"

namespace sehilo {
namespace {

QuantizerConfig Config(std::vector<int> levels, double alpha = 2.0,
                       double epsilon = 1e-3) {
  QuantizerConfig cfg;
  cfg.levels = std::move(levels);
  cfg.alpha = alpha;
  cfg.epsilon = epsilon;
  return cfg;
}

TEST(QuantizerConfig, DerivedQuantities) {
  const QuantizerConfig odd = Config({5});
  EXPECT_DOUBLE_EQ(odd.HalfWidth(0), 2.002);
  EXPECT_DOUBLE_EQ(odd.Offset(0), 0.0);
  EXPECT_DOUBLE_EQ(odd.Shift(0), 0.0);
  EXPECT_DOUBLE_EQ(odd.SpanEdge(0), 4.004);

  const QuantizerConfig even = Config({4});
  EXPECT_DOUBLE_EQ(even.HalfWidth(0), 1.5015);
  EXPECT_DOUBLE_EQ(even.Offset(0), 0.5);
  EXPECT_NEAR(even.Shift(0), 0.34619901166337774, 1e-14);

  EXPECT_EQ(Config({5, 5, 5, 5, 5}).CodebookSize(), 3125u);
  EXPECT_EQ(Config({8, 6, 5}).CodebookSize(), 240u);
}

TEST(QuantizerConfig, ValidateRejectsBadConfigs) {
  EXPECT_NO_THROW(Config({5, 5}).Validate());
  EXPECT_THROW(Config({}).Validate(), std::invalid_argument);
  EXPECT_THROW(Config({1}).Validate(), std::invalid_argument);
  EXPECT_THROW(Config({5}, 0.0).Validate(), std::invalid_argument);
  EXPECT_THROW(Config({5}, -1.0).Validate(), std::invalid_argument);
  EXPECT_THROW(Config({5}, 2.0, 0.0).Validate(), std::invalid_argument);
  EXPECT_THROW(Config({5}, std::nan("")).Validate(), std::invalid_argument);
}

TEST(Rounding, HalfAwayFromZero) {
  EXPECT_EQ(RoundHalfAwayFromZero(0.5), 1.0);
  EXPECT_EQ(RoundHalfAwayFromZero(-0.5), -1.0);
  EXPECT_EQ(RoundHalfAwayFromZero(1.5), 2.0);
  EXPECT_EQ(RoundHalfAwayFromZero(-1.5), -2.0);
  EXPECT_EQ(RoundHalfAwayFromZero(2.5), 3.0);
  EXPECT_EQ(RoundHalfAwayFromZero(0.49999), 0.0);
  EXPECT_EQ(RoundHalfAwayFromZero(-0.49999), 0.0);
}

// Reference values computed with 40-digit arithmetic for m=5, alpha=2,
// epsilon=1e-3: alpha * tanh(z) * h with h = 2.002.
TEST(Bound, ReferenceValues) {
  const QuantizerConfig cfg = Config({5});
  EXPECT_NEAR(Bound(1.0, 0, cfg), 3.0494230004468826, 1e-12);
  EXPECT_NEAR(Bound(0.5, 0, cfg), 1.8503170976690790, 1e-12);
  EXPECT_DOUBLE_EQ(Bound(0.0, 0, cfg), 0.0);
  EXPECT_DOUBLE_EQ(Bound(-1.0, 0, cfg), -Bound(1.0, 0, cfg));
}

TEST(Bound, EvenLevelShiftCentersZero) {
  const QuantizerConfig cfg = Config({4});
  // The atanh shift makes tanh(s)*h equal the offset, so zero maps to zero.
  EXPECT_NEAR(Bound(0.0, 0, cfg), 0.0, 1e-12);
}

TEST(Bound, StrictlyIncreasingAndRangeLimited) {
  for (int m : {2, 3, 4, 5, 8}) {
    const QuantizerConfig cfg = Config({m});
    const double h = cfg.HalfWidth(0);
    const double o = cfg.Offset(0);
    // Strict growth where tanh is far from its float64 saturation plateau,
    // monotone and range-limited everywhere else.
    double prev = -1e18;
    for (double z = -6.0; z <= 6.0; z += 0.25) {
      const double b = Bound(z, 0, cfg);
      ASSERT_GT(b, prev) << "m=" << m << " z=" << z;
      prev = b;
    }
    prev = -1e18;
    for (double z = -20.0; z <= 20.0; z += 0.25) {
      const double b = Bound(z, 0, cfg);
      ASSERT_GE(b, prev) << "m=" << m << " z=" << z;
      // tanh reaches +-1 exactly once z saturates in float64, so the image
      // is the closed interval.
      ASSERT_GE(b, -cfg.alpha * (h + o));
      ASSERT_LE(b, cfg.alpha * (h - o));
      prev = b;
    }
  }
}

TEST(Bound, RejectsNonFiniteInput) {
  const QuantizerConfig cfg = Config({5});
  EXPECT_THROW(Bound(std::nan(""), 0, cfg), std::invalid_argument);
  EXPECT_THROW(Bound(std::numeric_limits<double>::infinity(), 0, cfg),
               std::invalid_argument);
  EXPECT_THROW(Bound(0.0, 1, cfg), std::out_of_range);
}

TEST(Quantize, ChainExampleFiveLevels) {
  const QuantizerConfig cfg = Config({5});
  // z=1.0 -> bounded 3.04942 -> level round(1.52471)=2 -> index 4 -> value 4.
  const double bounded = Bound(1.0, 0, cfg);
  const QuantizeResult q = Quantize(bounded, 0, cfg);
  EXPECT_EQ(q.index, 4);
  EXPECT_DOUBLE_EQ(q.scaled_value, 4.0);
  EXPECT_NEAR(Normalize(q.scaled_value, 0, cfg), 4.0 / 4.004, 1e-15);
}

TEST(Quantize, CoversAllLevels) {
  for (int m : {2, 3, 4, 5, 6, 8}) {
    const QuantizerConfig cfg = Config({m});
    std::vector<int> seen(m, 0);
    for (double z = -12.0; z <= 12.0; z += 0.01) {
      const QuantizeResult q = Quantize(Bound(z, 0, cfg), 0, cfg);
      ASSERT_GE(q.index, 0);
      ASSERT_LT(q.index, m);
      ++seen[q.index];
    }
    for (int idx = 0; idx < m; ++idx) {
      EXPECT_GT(seen[idx], 0) << "m=" << m << " index " << idx << " never hit";
    }
  }
}

TEST(Representatives, SymmetricGridWithAlphaSpacing) {
  for (int m : {2, 3, 4, 5, 8}) {
    const QuantizerConfig cfg = Config({m}, 1.5);
    for (int idx = 0; idx < m; ++idx) {
      const double rep = RepresentativeValue(idx, 0, cfg);
      EXPECT_DOUBLE_EQ(rep, (idx - (m - 1) / 2.0) * 1.5);
      if (idx > 0) {
        EXPECT_DOUBLE_EQ(rep - RepresentativeValue(idx - 1, 0, cfg), 1.5);
      }
      // Mirror symmetry of the grid.
      EXPECT_DOUBLE_EQ(rep, -RepresentativeValue(m - 1 - idx, 0, cfg));
    }
  }
  EXPECT_THROW(RepresentativeValue(-1, 0, Config({5})), std::out_of_range);
  EXPECT_THROW(RepresentativeValue(5, 0, Config({5})), std::out_of_range);
}

TEST(Normalize, RepresentativesStayInsideUnitInterval) {
  for (int m : {2, 3, 4, 5, 6, 8}) {
    const QuantizerConfig cfg = Config({m});
    for (int idx = 0; idx < m; ++idx) {
      const double n = Normalize(RepresentativeValue(idx, 0, cfg), 0, cfg);
      EXPECT_LE(std::abs(n), 1.0 / (1.0 + cfg.epsilon) + 1e-15);
    }
    // The extreme representatives reach exactly 1/(1+epsilon).
    EXPECT_NEAR(Normalize(RepresentativeValue(m - 1, 0, cfg), 0, cfg),
                1.0 / (1.0 + cfg.epsilon), 1e-15);
  }
}

TEST(FsqForward, MatchesPerDimensionChain) {
  const QuantizerConfig cfg = Config({5, 4, 3});
  const std::vector<double> z = {0.3, -1.2, 2.5};
  const TokenCode code = FsqForward(z, cfg);
  ASSERT_EQ(code.indices.size(), 3u);
  for (int dim = 0; dim < 3; ++dim) {
    const QuantizeResult q = Quantize(Bound(z[dim], dim, cfg), dim, cfg);
    EXPECT_EQ(code.indices[dim], q.index);
    EXPECT_DOUBLE_EQ(code.scaled_values[dim], q.scaled_value);
    EXPECT_DOUBLE_EQ(code.normalized_values[dim],
                     Normalize(q.scaled_value, dim, cfg));
  }
  EXPECT_THROW(FsqForward(std::vector<double>{1.0}, cfg),
               std::invalid_argument);
}

// Re-quantizing noiseless representatives must return the identical code for
// every codeword of every tested configuration, even level counts included.
TEST(Requantize, ExhaustiveIdempotence) {
  const std::vector<std::vector<int>> level_sets = {
      {2}, {3}, {4}, {5}, {6}, {8}, {5, 5, 5, 5, 5}, {8, 6, 5}, {2, 2, 2}};
  for (const auto& levels : level_sets) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      const QuantizerConfig cfg = Config(levels, alpha);
      for (const TokenCode& code : EnumerateCodewords(cfg)) {
        const TokenCode back = Requantize(code.scaled_values, cfg);
        ASSERT_EQ(back, code);
      }
    }
  }
}

TEST(Requantize, GuaranteedRecoveryUnderSmallNoise) {
  const double kMargin = 1e-9;
  const std::vector<std::vector<int>> level_sets = {
      {2}, {3}, {4}, {5}, {8}, {5, 5, 5, 5, 5}, {8, 6, 5}};
  RngStream rng(1234);
  for (const auto& levels : level_sets) {
    for (double alpha : {1.0, 2.0}) {
      const QuantizerConfig cfg = Config(levels, alpha);
      const double eta = alpha / 2.0 - kMargin;
      for (const TokenCode& code : EnumerateCodewords(cfg)) {
        for (int sign : {-1, 1}) {
          std::vector<double> received = code.scaled_values;
          for (auto& v : received) v += sign * eta;
          ASSERT_EQ(Requantize(received, cfg).indices, code.indices)
              << "alpha=" << alpha << " sign=" << sign;
        }
        // Random per-dimension noise inside the guarantee region.
        std::vector<double> received = code.scaled_values;
        for (auto& v : received) {
          v += (2.0 * rng.NextUnit() - 1.0) * eta;
        }
        ASSERT_EQ(Requantize(received, cfg).indices, code.indices);
      }
    }
  }
}

TEST(Requantize, NoiseBeyondHalfStepMovesInteriorCode) {
  const QuantizerConfig cfg = Config({5});
  // Interior representative 0 pushed a full step lands on the neighbor.
  EXPECT_EQ(RequantizeIndex(0.0 + cfg.alpha, 0, cfg), 3);
  EXPECT_EQ(RequantizeIndex(0.0 - cfg.alpha, 0, cfg), 1);
}

TEST(Requantize, EdgeLevelsAbsorbOutwardNoise) {
  for (int m : {3, 4, 5, 8}) {
    const QuantizerConfig cfg = Config({m});
    const double top = RepresentativeValue(m - 1, 0, cfg);
    const double bottom = RepresentativeValue(0, 0, cfg);
    for (double excess : {1.0, 100.0, 1e9}) {
      EXPECT_EQ(RequantizeIndex(top + excess, 0, cfg), m - 1);
      EXPECT_EQ(RequantizeIndex(bottom - excess, 0, cfg), 0);
    }
  }
}

TEST(TokenFromIndices, ReconstructsRepresentatives) {
  const QuantizerConfig cfg = Config({5, 4});
  const std::vector<int> indices = {4, 0};
  const TokenCode code = TokenFromIndices(indices, cfg);
  EXPECT_EQ(code.indices, indices);
  EXPECT_DOUBLE_EQ(code.scaled_values[0], 4.0);
  EXPECT_DOUBLE_EQ(code.scaled_values[1], -3.0);
  EXPECT_THROW(TokenFromIndices(std::vector<int>{1}, cfg),
               std::invalid_argument);
}

TEST(EnumerateCodewords, SizeAndOrder) {
  const QuantizerConfig cfg = Config({2, 3});
  const std::vector<TokenCode> all = EnumerateCodewords(cfg);
  ASSERT_EQ(all.size(), 6u);
  // Dimension 0 cycles fastest.
  const std::vector<std::vector<int>> expected = {
      {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}};
  for (size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].indices, expected[i]) << "position " << i;
    EXPECT_EQ(all[i], TokenFromIndices(all[i].indices, cfg));
  }
}

}  // namespace
}  // namespace sehilo
