#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cogsl/tensor.hpp"

namespace cogsl {

using Index = std::uint32_t;

/// Immutable CSR sparsity structure. Column indices are sorted and unique
/// within each row. A column-major index (the transpose) is built at
/// construction so that A^T x products can run row-parallel.
class SparsePattern {
 public:
  SparsePattern(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                std::vector<Index> col);

  /// Sorts and dedups every row.
  static std::shared_ptr<const SparsePattern> from_rows(std::size_t rows, std::size_t cols,
                                                         std::vector<std::vector<Index>> lists);
  static std::shared_ptr<const SparsePattern> identity(std::size_t n);
  static std::shared_ptr<const SparsePattern> dense(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }

  std::size_t row_begin(std::size_t r) const { return row_ptr_[r]; }
  std::size_t row_end(std::size_t r) const { return row_ptr_[r + 1]; }
  std::span<const Index> row_cols(std::size_t r) const {
    return {col_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col() const { return col_; }
  /// Row of every stored entry.
  const std::vector<Index>& entry_row() const { return entry_row_; }

  /// Entries of column c, ordered by row: indices into the nnz arrays.
  std::span<const std::size_t> col_entries(std::size_t c) const {
    return {t_entry_.data() + t_ptr_[c], t_ptr_[c + 1] - t_ptr_[c]};
  }

  std::optional<std::size_t> find(std::size_t r, std::size_t c) const;
  bool operator==(const SparsePattern& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && row_ptr_ == o.row_ptr_ && col_ == o.col_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> col_;
  std::vector<Index> entry_row_;
  std::vector<std::size_t> t_ptr_;
  std::vector<std::size_t> t_entry_;
};

using PatternPtr = std::shared_ptr<const SparsePattern>;

/// Union of two patterns with identical shape.
PatternPtr pattern_union(const SparsePattern& a, const SparsePattern& b);
/// Pattern with the full diagonal added.
PatternPtr with_diagonal(const SparsePattern& p);
/// For every entry of `from`, its position inside `to`. Throws if `from` is
/// not a subset of `to`.
std::vector<std::size_t> embed_map(const SparsePattern& from, const SparsePattern& to);

/// Pattern plus one value per stored entry.
struct CsrMatrix {
  PatternPtr pattern;
  std::vector<double> values;

  CsrMatrix() = default;
  CsrMatrix(PatternPtr p, std::vector<double> v);

  struct Triplet {
    Index row;
    Index col;
    double value;
  };
  /// Duplicate coordinates are summed.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t);
  /// Keeps every entry whose magnitude exceeds `drop_below`.
  static CsrMatrix from_dense(const Tensor& dense, double drop_below = 0.0);

  std::size_t rows() const { return pattern ? pattern->rows() : 0; }
  std::size_t cols() const { return pattern ? pattern->cols() : 0; }
  std::size_t nnz() const { return values.size(); }

  double at(std::size_t r, std::size_t c) const;
  double row_sum(std::size_t r) const;
  Tensor to_dense() const;
  CsrMatrix transpose() const;
  /// Same entries re-expressed on a superset pattern (missing entries are 0).
  CsrMatrix embed_into(const PatternPtr& superset) const;
};

}  // namespace cogsl
