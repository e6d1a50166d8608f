#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace specsense {

/// Dense row-major 2-D array.
template <typename T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(std::size_t rows, std::size_t cols, T value = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Array2D&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Dense 3-D array indexed (a, b, c) with c fastest.
template <typename T>
class Array3D {
 public:
  Array3D() = default;
  Array3D(std::size_t n0, std::size_t n1, std::size_t n2, T value = T{})
      : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, value) {}

  std::size_t dim0() const { return n0_; }
  std::size_t dim1() const { return n1_; }
  std::size_t dim2() const { return n2_; }

  T& operator()(std::size_t a, std::size_t b, std::size_t c) {
    assert(a < n0_ && b < n1_ && c < n2_);
    return data_[(a * n1_ + b) * n2_ + c];
  }
  const T& operator()(std::size_t a, std::size_t b, std::size_t c) const {
    assert(a < n0_ && b < n1_ && c < n2_);
    return data_[(a * n1_ + b) * n2_ + c];
  }

  std::span<const T> flat() const { return data_; }
  std::span<T> flat() { return data_; }

  bool operator==(const Array3D&) const = default;

 private:
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<T> data_;
};

}  // namespace specsense
