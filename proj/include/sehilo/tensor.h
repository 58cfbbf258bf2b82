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

#ifndef SEHILO_TENSOR_H_
#define SEHILO_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace sehilo {

// Dense row-major tensor of doubles, rank 1 to 3. Compute runs in 64-bit
// floats throughout; 32-bit floats appear only at the file/wire boundary.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<int64_t> shape);

  static Tensor FromData(std::vector<int64_t> shape, std::vector<double> data);

  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(i); }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& flat() { return data_; }
  const std::vector<double>& flat() const { return data_; }

  double& at(int64_t i) { return data_[i]; }
  double at(int64_t i) const { return data_[i]; }
  double& at(int64_t i, int64_t j) { return data_[i * shape_[1] + j]; }
  double at(int64_t i, int64_t j) const { return data_[i * shape_[1] + j]; }
  double& at(int64_t i, int64_t j, int64_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(int64_t i, int64_t j, int64_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  // Same data, new shape; element count must match.
  Tensor Reshaped(std::vector<int64_t> new_shape) const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

// Normative tensor file format, shared with the CLI:
//   magic   8 bytes  "SHLT\0\0\0\1"
//   rank    u32 LE
//   dims    rank x u32 LE
//   payload little-endian IEEE-754 float32, row-major
// The writer narrows to float32; the loader upcasts to float64. Truncated or
// oversized files are rejected.
void WriteTensorFile(const Tensor& tensor, const std::string& path);
Tensor ReadTensorFile(const std::string& path);

}  // namespace sehilo

#endif  // SEHILO_TENSOR_H_
