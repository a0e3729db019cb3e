#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gsgd/errors.hpp"

namespace gsgd {

// Dense row-major matrix of doubles. Holds model weights, gradients and
// optimizer accumulators, all of shape K x (F + 1).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  bool all_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
  }

  // this += alpha * other
  void add_scaled(const Matrix& other, double alpha) {
    if (!same_shape(other)) throw InputError("matrix shape mismatch in add_scaled");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
  }

  void scale(double alpha) {
    for (double& v : data_) v *= alpha;
  }

  // Bitwise-meaningful equality: same shape and every entry compares equal.
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using WeightMatrix = Matrix;
using GradientMatrix = Matrix;

// Largest |a - b| / max(|a|, |b|, floor) over all entries.
inline double max_relative_difference(const Matrix& a, const Matrix& b, double floor = 1e-300) {
  if (!a.same_shape(b)) throw InputError("matrix shape mismatch");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double denom = std::max({std::abs(av[i]), std::abs(bv[i]), floor});
    worst = std::max(worst, std::abs(av[i] - bv[i]) / denom);
  }
  return worst;
}

}  // namespace gsgd
