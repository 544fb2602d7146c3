// Copyright 2026 The ifcgrasp Authors
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

#ifndef IFCGRASP_NUMERICS_ARRAY_H_
#define IFCGRASP_NUMERICS_ARRAY_H_

#include <cmath>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::num {

using Shape = std::vector<int>;

inline int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int e : shape) {
    if (e < 0) throw ShapeError("negative extent in shape");
    n *= e;
  }
  return n;
}

inline std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Cache-line aligned storage. Vectorized reductions peel differently at
// different alignments, so a fixed alignment keeps results independent of
// where a buffer happens to land.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, size_t n) { ::operator delete(p, n * sizeof(T), kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major array. Owns its storage; copies are deep.
template <typename T>
class Array {
 public:
  using value_type = T;

  Array() = default;
  explicit Array(Shape shape)
      : shape_(std::move(shape)), data_(NumElements(shape_), T(0)) {}
  Array(Shape shape, const std::vector<T>& data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    if (NumElements(shape_) != static_cast<int64_t>(data_.size())) {
      throw ShapeError("array data length " + std::to_string(data_.size()) +
                       " does not match shape " + ShapeString(shape_));
    }
  }

  static Array Filled(Shape shape, T value) {
    Array a(std::move(shape));
    a.Fill(value);
    return a;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const {
    if (axis < 0) axis += rank();
    if (axis < 0 || axis >= rank()) throw ShapeError("axis out of range");
    return shape_[axis];
  }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](int64_t i) { return data_[i]; }
  const T& operator[](int64_t i) const { return data_[i]; }

  // 2-D element access.
  T& at(int r, int c) { return data_[static_cast<int64_t>(r) * shape_[1] + c]; }
  const T& at(int r, int c) const {
    return data_[static_cast<int64_t>(r) * shape_[1] + c];
  }

  Array Reshaped(Shape shape) const& {
    Array out = *this;
    out.Reshape(std::move(shape));
    return out;
  }
  Array Reshaped(Shape shape) && {
    Reshape(std::move(shape));
    return std::move(*this);
  }
  void Reshape(Shape shape) {
    if (NumElements(shape) != size()) {
      throw ShapeError("cannot reshape " + ShapeString(shape_) + " to " +
                       ShapeString(shape));
    }
    shape_ = std::move(shape);
  }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool AllFinite() const {
    for (const T& v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  Array<U> Cast() const {
    Array<U> out(shape_);
    std::copy(data_.begin(), data_.end(), out.data());
    return out;
  }

  bool operator==(const Array& other) const = default;

 private:
  Shape shape_;
  std::vector<T, AlignedAllocator<T>> data_;
};

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_ARRAY_H_
