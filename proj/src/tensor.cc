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

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sehilo {
namespace {

constexpr char kMagic[8] = {'S', 'H', 'L', 'T', 0, 0, 0, 1};
constexpr int kMaxRank = 3;

int64_t CheckedElementCount(const std::vector<int64_t>& shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw std::invalid_argument("Tensor: rank must be 1 to 3");
  }
  int64_t count = 1;
  for (int64_t d : shape) {
    if (d <= 0) {
      throw std::invalid_argument("Tensor: dimensions must be positive");
    }
    count *= d;
  }
  return count;
}

void AppendU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

uint32_t ReadU32(const std::string& in, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[offset + i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) {
  const int64_t count = CheckedElementCount(shape);
  shape_ = std::move(shape);
  data_.assign(static_cast<size_t>(count), 0.0);
}

Tensor Tensor::FromData(std::vector<int64_t> shape, std::vector<double> data) {
  const int64_t count = CheckedElementCount(shape);
  if (count != static_cast<int64_t>(data.size())) {
    throw std::invalid_argument("Tensor::FromData: data length does not match shape");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::Reshaped(std::vector<int64_t> new_shape) const {
  const int64_t count = CheckedElementCount(new_shape);
  if (count != size()) {
    throw std::invalid_argument("Tensor::Reshaped: element count mismatch");
  }
  Tensor t;
  t.shape_ = std::move(new_shape);
  t.data_ = data_;
  return t;
}

void WriteTensorFile(const Tensor& tensor, const std::string& path) {
  std::string bytes(kMagic, sizeof(kMagic));
  AppendU32(bytes, static_cast<uint32_t>(tensor.rank()));
  for (int i = 0; i < tensor.rank(); ++i) {
    AppendU32(bytes, static_cast<uint32_t>(tensor.dim(i)));
  }
  for (int64_t i = 0; i < tensor.size(); ++i) {
    const float narrowed = static_cast<float>(tensor.data()[i]);
    AppendU32(bytes, std::bit_cast<uint32_t>(narrowed));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("WriteTensorFile: cannot open " + path);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("WriteTensorFile: write failed for " + path);
  }
}

Tensor ReadTensorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("ReadTensorFile: cannot open " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) + 4) {
    throw std::runtime_error("ReadTensorFile: truncated header in " + path);
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("ReadTensorFile: bad magic in " + path);
  }
  const uint32_t rank = ReadU32(bytes, 8);
  if (rank < 1 || rank > kMaxRank) {
    throw std::runtime_error("ReadTensorFile: unsupported rank in " + path);
  }
  if (bytes.size() < 12 + 4 * static_cast<size_t>(rank)) {
    throw std::runtime_error("ReadTensorFile: truncated dims in " + path);
  }
  std::vector<int64_t> shape;
  int64_t count = 1;
  for (uint32_t i = 0; i < rank; ++i) {
    const uint32_t d = ReadU32(bytes, 12 + 4 * i);
    if (d == 0) {
      throw std::runtime_error("ReadTensorFile: zero dimension in " + path);
    }
    shape.push_back(static_cast<int64_t>(d));
    count *= d;
  }
  const size_t payload_offset = 12 + 4 * static_cast<size_t>(rank);
  const size_t expected = payload_offset + 4 * static_cast<size_t>(count);
  if (bytes.size() != expected) {
    throw std::runtime_error("ReadTensorFile: payload size mismatch in " + path);
  }
  std::vector<double> data;
  data.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    const uint32_t raw = ReadU32(bytes, payload_offset + 4 * static_cast<size_t>(i));
    data.push_back(static_cast<double>(std::bit_cast<float>(raw)));
  }
  return Tensor::FromData(std::move(shape), std::move(data));
}

}  // namespace sehilo
