// Copyright 2026 The SAFD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "safd/error.h"

namespace safd {

// Dense row-major array, either (channels, height, width) or (length).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0))
      : shape_(std::move(shape)) {
    for (int d : shape_) {
      if (d < 0) throw Error(ErrorKind::kShape, "negative tensor dimension");
    }
    data_.assign(Count(shape_), fill);
  }
  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}
  Tensor(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != Count(shape_)) {
      throw Error(ErrorKind::kShape, "tensor data length does not match shape");
    }
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  int channels() const { return shape_.at(0); }
  int height() const { return shape_.at(1); }
  int width() const { return shape_.at(2); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  const T& at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  T* plane(int c) {
    return data_.data() + static_cast<std::size_t>(c) * shape_[1] * shape_[2];
  }
  const T* plane(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * shape_[1] * shape_[2];
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> Cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t Count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * b; });
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

inline std::string ShapeString(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

}  // namespace safd
