#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cogsl {

/// Dense row-major matrix of doubles. Vectors are N x 1, scalars 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& storage() const { return data_; }

  /// Value of a 1 x 1 tensor; throws otherwise.
  double item() const;

  void fill(double v);
  /// this += other (same shape).
  void add_inplace(const Tensor& other);

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace cogsl
