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
#include <vector>

#include <gtest/gtest.h>

#include "sehilo/rng.h"
#include "sehilo/tensor.h"

namespace sehilo {
namespace {

TEST(MatMul, HandComputedValues) {
  const Tensor a = Tensor::FromData({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::FromData({3, 2}, {7, 8, 9, 10, 11, 12});
  const Tensor c = MatMul(a, b);
  ASSERT_EQ(c.rank(), 2);
  ASSERT_EQ(c.dim(0), 2);
  ASSERT_EQ(c.dim(1), 2);
  EXPECT_DOUBLE_EQ(c.at(0, 0), 58.0);
  EXPECT_DOUBLE_EQ(c.at(0, 1), 64.0);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 139.0);
  EXPECT_DOUBLE_EQ(c.at(1, 1), 154.0);
}

TEST(MatMul, IdentityAndShapeErrors) {
  const Tensor x = Tensor::FromData({2, 2}, {1.5, -2.0, 0.25, 4.0});
  const Tensor eye = Tensor::FromData({2, 2}, {1, 0, 0, 1});
  const Tensor y = MatMul(x, eye);
  for (int64_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(y.at(i), x.at(i));
  }
  EXPECT_THROW(MatMul(x, Tensor({3, 2})), std::invalid_argument);
  EXPECT_THROW(MatMul(Tensor({2, 2, 2}), x), std::invalid_argument);
}

TEST(MatMul, BitReproducible) {
  RngStream rng(6);
  Tensor a({17, 23});
  Tensor b({23, 11});
  for (auto& v : a.flat()) v = rng.NextGaussian();
  for (auto& v : b.flat()) v = rng.NextGaussian();
  const Tensor c1 = MatMul(a, b);
  const Tensor c2 = MatMul(a, b);
  EXPECT_EQ(c1.flat(), c2.flat());
}

TEST(SoftmaxRows, RowsSumToOneAndOrderPreserved) {
  const Tensor x =
      Tensor::FromData({2, 3}, {1.0, 2.0, 3.0, -1000.0, 0.0, 1000.0});
  const Tensor s = SoftmaxRows(x);
  for (int64_t i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < 3; ++j) {
      ASSERT_GE(s.at(i, j), 0.0);
      sum += s.at(i, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_LT(s.at(0, 0), s.at(0, 1));
  EXPECT_LT(s.at(0, 1), s.at(0, 2));
  // Max subtraction keeps the huge row finite; the losing entries underflow
  // to zero rather than dragging the row to NaN.
  EXPECT_NEAR(s.at(1, 2), 1.0, 1e-12);
  EXPECT_EQ(s.at(1, 0), 0.0);
}

TEST(SoftmaxRows, UniformInputGivesUniformWeights) {
  const Tensor x = Tensor::FromData({1, 4}, {3.25, 3.25, 3.25, 3.25});
  const Tensor s = SoftmaxRows(x);
  for (int64_t j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(s.at(0, j), 0.25);
  }
}

TEST(SoftmaxRows, ShiftInvariance) {
  const Tensor x = Tensor::FromData({1, 3}, {0.1, -0.7, 2.3});
  const Tensor y = Tensor::FromData({1, 3}, {100.1, 99.3, 102.3});
  const Tensor sx = SoftmaxRows(x);
  const Tensor sy = SoftmaxRows(y);
  for (int64_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(sx.at(0, j), sy.at(0, j), 1e-12);
  }
}

TEST(LayerNorm, NormalizesEachRow) {
  const Tensor x = Tensor::FromData({2, 4}, {1, 2, 3, 4, -10, 0, 10, 20});
  const Tensor ones = Tensor::FromData({4}, {1, 1, 1, 1});
  const Tensor zeros = Tensor::FromData({4}, {0, 0, 0, 0});
  const Tensor out = LayerNorm(x, ones, zeros, 1e-12);
  for (int64_t i = 0; i < 2; ++i) {
    double mean = 0.0, var = 0.0;
    for (int64_t j = 0; j < 4; ++j) mean += out.at(i, j);
    mean /= 4.0;
    for (int64_t j = 0; j < 4; ++j) {
      var += (out.at(i, j) - mean) * (out.at(i, j) - mean);
    }
    var /= 4.0;
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-6);
  }
}

TEST(LayerNorm, HandValueWithBiasedVariance) {
  // Row {1,3}: mean 2, biased variance 1, so outputs are -1 and +1 before the
  // affine part, then scaled by 2 and shifted by 0.5.
  const Tensor x = Tensor::FromData({1, 2}, {1, 3});
  const Tensor scale = Tensor::FromData({2}, {2, 2});
  const Tensor bias = Tensor::FromData({2}, {0.5, 0.5});
  const Tensor out = LayerNorm(x, scale, bias, 1e-12);
  EXPECT_NEAR(out.at(0, 0), -1.5, 1e-9);
  EXPECT_NEAR(out.at(0, 1), 2.5, 1e-9);
}

TEST(LayerNorm, ScaleBiasPassThroughAndErrors) {
  const Tensor x = Tensor::FromData({1, 3}, {5, 5, 5});
  const Tensor scale = Tensor::FromData({3}, {1, 1, 1});
  const Tensor bias = Tensor::FromData({3}, {7, 8, 9});
  // A constant row normalizes to zero, leaving only the bias.
  const Tensor out = LayerNorm(x, scale, bias, 1e-5);
  EXPECT_NEAR(out.at(0, 0), 7.0, 1e-12);
  EXPECT_NEAR(out.at(0, 2), 9.0, 1e-12);
  EXPECT_THROW(LayerNorm(x, Tensor({2}), bias, 1e-5), std::invalid_argument);
  EXPECT_THROW(LayerNorm(x, scale, bias, 0.0), std::invalid_argument);
}

TEST(AvgPool2d, MeansOverBlocks) {
  // 4x4 single channel with distinct quadrant values.
  Tensor x({4, 4, 1});
  for (int64_t i = 0; i < 4; ++i) {
    for (int64_t j = 0; j < 4; ++j) {
      x.at(i, j, 0) = static_cast<double>(i * 4 + j);
    }
  }
  const Tensor p = AvgPool2d(x, 2);
  ASSERT_EQ(p.dim(0), 2);
  ASSERT_EQ(p.dim(1), 2);
  EXPECT_DOUBLE_EQ(p.at(0, 0, 0), (0 + 1 + 4 + 5) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(0, 1, 0), (2 + 3 + 6 + 7) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(1, 0, 0), (8 + 9 + 12 + 13) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(1, 1, 0), (10 + 11 + 14 + 15) / 4.0);
}

TEST(AvgPool2d, StrideOneIsIdentityAndErrors) {
  RngStream rng(44);
  Tensor x({3, 3, 2});
  for (auto& v : x.flat()) v = rng.NextGaussian();
  const Tensor p = AvgPool2d(x, 1);
  EXPECT_EQ(p.flat(), x.flat());
  EXPECT_THROW(AvgPool2d(x, 2), std::invalid_argument);
  EXPECT_THROW(AvgPool2d(x, 0), std::invalid_argument);
  EXPECT_THROW(AvgPool2d(Tensor({4, 4}), 2), std::invalid_argument);
}

TEST(WindowPartition, LayoutAndRoundTrip) {
  Tensor x({4, 6, 2});
  RngStream rng(9);
  for (auto& v : x.flat()) v = rng.NextGaussian();

  const Tensor win = WindowPartition(x, 2);
  ASSERT_EQ(win.dim(0), 6);  // (4/2) * (6/2)
  ASSERT_EQ(win.dim(1), 4);
  ASSERT_EQ(win.dim(2), 2);
  // Window 1 covers columns 2..3 of rows 0..1; pixel 3 is its (1,1) corner.
  EXPECT_EQ(win.at(1, 3, 0), x.at(1, 3, 0));
  EXPECT_EQ(win.at(1, 0, 1), x.at(0, 2, 1));
  // Window 4 = grid position (1,1) -> rows 2..3, cols 2..3.
  EXPECT_EQ(win.at(4, 2, 0), x.at(3, 2, 0));

  const Tensor back = WindowMerge(win, 4, 6, 2);
  EXPECT_EQ(back.flat(), x.flat());
}

TEST(WindowPartition, FullImageWindowKeepsRowMajorOrder) {
  Tensor x({2, 2, 1});
  x.at(0, 0, 0) = 1;
  x.at(0, 1, 0) = 2;
  x.at(1, 0, 0) = 3;
  x.at(1, 1, 0) = 4;
  const Tensor win = WindowPartition(x, 2);
  ASSERT_EQ(win.dim(0), 1);
  for (int64_t p = 0; p < 4; ++p) {
    EXPECT_EQ(win.at(0, p, 0), static_cast<double>(p + 1));
  }
}

TEST(WindowPartition, RejectsIndivisibleShapes) {
  EXPECT_THROW(WindowPartition(Tensor({3, 4, 1}), 2), std::invalid_argument);
  EXPECT_THROW(WindowMerge(Tensor({4, 4, 1}), 3, 4, 2), std::invalid_argument);
  EXPECT_THROW(WindowMerge(Tensor({4, 3, 1}), 4, 4, 2), std::invalid_argument);
}

TEST(WeightSet, GetAndHas) {
  WeightSet ws;
  ws.tensors["enc.w"] = Tensor::FromData({2}, {1, 2});
  EXPECT_TRUE(ws.Has("enc.w"));
  EXPECT_FALSE(ws.Has("enc.b"));
  EXPECT_EQ(ws.Get("enc.w").at(1), 2.0);
  EXPECT_THROW(ws.Get("enc.b"), std::out_of_range);
}

TEST(UniformInitTensor, RangeScalesWithFanIn) {
  RngStream rng(15);
  const Tensor t = UniformInitTensor({50, 40}, 16, rng);
  const double bound = 1.0 / 4.0;
  double lo = 1e9, hi = -1e9;
  for (int64_t i = 0; i < t.size(); ++i) {
    ASSERT_GE(t.at(i), -bound);
    ASSERT_LT(t.at(i), bound);
    lo = std::min(lo, t.at(i));
    hi = std::max(hi, t.at(i));
  }
  // 2000 draws should come close to both ends of the interval.
  EXPECT_LT(lo, -0.9 * bound);
  EXPECT_GT(hi, 0.9 * bound);
  EXPECT_THROW(UniformInitTensor({2, 2}, 0, rng), std::invalid_argument);
}

TEST(UniformInitTensor, DeterministicPerStream) {
  RngStream a(123);
  RngStream b(123);
  const Tensor ta = UniformInitTensor({8, 8}, 8, a);
  const Tensor tb = UniformInitTensor({8, 8}, 8, b);
  EXPECT_EQ(ta.flat(), tb.flat());
}

}  // namespace
}  // namespace sehilo
