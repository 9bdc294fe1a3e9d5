#include "cogsl/tensor.hpp"

#include <algorithm>
#include <string>

#include "cogsl/error.hpp"

namespace cogsl {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) {
    throw ArgumentError("item() on a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                        " tensor");
  }
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_inplace(const Tensor& other) {
  if (!same_shape(other)) throw ArgumentError("add_inplace: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

}  // namespace cogsl
