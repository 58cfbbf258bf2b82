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

#include "sehilo/tensor.h"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sehilo/rng.h"

namespace sehilo {
namespace {

std::string DataDir() {
  const char* dir = std::getenv("SEHILO_DATA_DIR");
  return dir != nullptr ? std::string(dir) : std::string("tests/data");
}

std::string TempPath(const std::string& name) {
  return testing::TempDir() + "/" + name;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void Spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  ASSERT_TRUE(out.good()) << path;
}

TEST(Tensor, ZeroFilledConstruction) {
  Tensor t({2, 3});
  EXPECT_EQ(t.rank(), 2);
  EXPECT_EQ(t.dim(0), 2);
  EXPECT_EQ(t.dim(1), 3);
  EXPECT_EQ(t.size(), 6);
  for (int64_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t.at(i), 0.0);
  }
}

TEST(Tensor, RowMajorIndexing) {
  Tensor t = Tensor::FromData({2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t.at(0, 0), 0.0);
  EXPECT_EQ(t.at(0, 2), 2.0);
  EXPECT_EQ(t.at(1, 0), 3.0);
  EXPECT_EQ(t.at(1, 2), 5.0);

  Tensor u = Tensor::FromData({2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
  EXPECT_EQ(u.at(0, 0, 0), 0.0);
  EXPECT_EQ(u.at(0, 0, 1), 1.0);
  EXPECT_EQ(u.at(0, 1, 0), 2.0);
  EXPECT_EQ(u.at(1, 0, 0), 4.0);
  EXPECT_EQ(u.at(1, 1, 1), 7.0);
}

TEST(Tensor, InvalidShapesThrow) {
  EXPECT_THROW(Tensor(std::vector<int64_t>{}), std::invalid_argument);
  EXPECT_THROW(Tensor({0}), std::invalid_argument);
  EXPECT_THROW(Tensor({2, -1}), std::invalid_argument);
  EXPECT_THROW(Tensor({1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(Tensor::FromData({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(Tensor, ReshapePreservesDataOrder) {
  Tensor t = Tensor::FromData({2, 3}, {0, 1, 2, 3, 4, 5});
  Tensor r = t.Reshaped({3, 2});
  EXPECT_EQ(r.rank(), 2);
  EXPECT_EQ(r.dim(0), 3);
  EXPECT_EQ(r.at(0, 1), 1.0);
  EXPECT_EQ(r.at(2, 1), 5.0);
  EXPECT_EQ(r.flat(), t.flat());
  EXPECT_THROW(t.Reshaped({4, 2}), std::invalid_argument);
}

TEST(Tensor, SameShapeComparison) {
  Tensor a({2, 3});
  Tensor b({2, 3});
  Tensor c({3, 2});
  EXPECT_TRUE(a.SameShape(b));
  EXPECT_FALSE(a.SameShape(c));
}

TEST(TensorFile, RoundTripExactAfterFloat32Narrowing) {
  RngStream rng(2718);
  Tensor t({5, 4, 3});
  for (auto& v : t.flat()) v = rng.NextGaussian();

  const std::string path = TempPath("roundtrip.shlt");
  WriteTensorFile(t, path);
  const Tensor back = ReadTensorFile(path);

  ASSERT_TRUE(back.SameShape(t));
  for (int64_t i = 0; i < t.size(); ++i) {
    // Writing narrows to float32, so the reloaded value must equal the
    // float32 cast of the original, bit for bit.
    EXPECT_EQ(back.at(i), static_cast<double>(static_cast<float>(t.at(i))));
  }
  std::remove(path.c_str());
}

TEST(TensorFile, SecondRoundTripIsIdentity) {
  RngStream rng(35);
  Tensor t({7, 9});
  for (auto& v : t.flat()) v = rng.NextGaussian();

  const std::string p1 = TempPath("rt1.shlt");
  const std::string p2 = TempPath("rt2.shlt");
  WriteTensorFile(t, p1);
  const Tensor once = ReadTensorFile(p1);
  WriteTensorFile(once, p2);
  const Tensor twice = ReadTensorFile(p2);
  // Values already sit on the float32 grid after one pass, so the second
  // pass must not move them and the files must be byte-identical.
  EXPECT_EQ(once.flat(), twice.flat());
  EXPECT_EQ(Slurp(p1), Slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST(TensorFile, HeaderLayout) {
  Tensor t = Tensor::FromData({2, 3}, {1, 2, 3, 4, 5, 6});
  const std::string path = TempPath("header.shlt");
  WriteTensorFile(t, path);
  const std::string bytes = Slurp(path);
  ASSERT_EQ(bytes.size(), 8u + 4u + 8u + 24u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("SHLT\0\0\0\1", 8));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);   // rank, LE u32
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);  // dim 0
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3);  // dim 1
  std::remove(path.c_str());
}

TEST(TensorFile, RejectsCorruptInputs) {
  Tensor t = Tensor::FromData({2, 2}, {1, 2, 3, 4});
  const std::string path = TempPath("corrupt.shlt");
  WriteTensorFile(t, path);
  const std::string good = Slurp(path);

  Spit(path, good.substr(0, good.size() - 1));
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  Spit(path, good + std::string(1, '\0'));
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  Spit(path, bad_magic);
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  std::string bad_rank = good;
  bad_rank[8] = 9;
  Spit(path, bad_rank);
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  std::string zero_dim = good;
  zero_dim[12] = 0;
  Spit(path, zero_dim);
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  Spit(path, good.substr(0, 10));
  EXPECT_THROW(ReadTensorFile(path), std::runtime_error);

  EXPECT_THROW(ReadTensorFile(TempPath("does_not_exist.shlt")),
               std::runtime_error);
  std::remove(path.c_str());
}

// The shipped sample is the reference input for the CLI forward path; its
// generator seed is part of the data contract.
TEST(TensorFile, ShippedSampleMatchesGeneratorSeed) {
  const Tensor sample = ReadTensorFile(DataDir() + "/sample_32x32x3.shlt");
  ASSERT_EQ(sample.rank(), 3);
  EXPECT_EQ(sample.dim(0), 32);
  EXPECT_EQ(sample.dim(1), 32);
  EXPECT_EQ(sample.dim(2), 3);

  RngStream rng(7);
  for (int64_t i = 0; i < sample.size(); ++i) {
    const float expect = static_cast<float>(rng.NextGaussian());
    ASSERT_EQ(sample.at(i), static_cast<double>(expect)) << "index " << i;
  }
}

}  // namespace
}  // namespace sehilo
