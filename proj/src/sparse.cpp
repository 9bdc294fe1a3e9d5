#include "cogsl/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cogsl/error.hpp"

namespace cogsl {

SparsePattern::SparsePattern(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                             std::vector<Index> col)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_.size()) {
    throw ArgumentError("malformed CSR row pointer");
  }
  entry_row_.resize(col_.size());
  t_ptr_.assign(cols_ + 1, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw ArgumentError("CSR row pointer not monotone");
    for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
      if (col_[e] >= cols_) throw ArgumentError("CSR column index out of range");
      if (e > row_ptr_[r] && col_[e] <= col_[e - 1]) {
        throw ArgumentError("CSR columns must be strictly increasing within a row");
      }
      entry_row_[e] = static_cast<Index>(r);
      ++t_ptr_[col_[e] + 1];
    }
  }
  for (std::size_t c = 0; c < cols_; ++c) t_ptr_[c + 1] += t_ptr_[c];
  t_entry_.resize(col_.size());
  std::vector<std::size_t> fill(t_ptr_.begin(), t_ptr_.end() - 1);
  for (std::size_t e = 0; e < col_.size(); ++e) t_entry_[fill[col_[e]]++] = e;
}

PatternPtr SparsePattern::from_rows(std::size_t rows, std::size_t cols,
                                    std::vector<std::vector<Index>> lists) {
  if (lists.size() != rows) throw ArgumentError("from_rows: list count != rows");
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<Index> col;
  for (std::size_t r = 0; r < rows; ++r) {
    auto& l = lists[r];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    col.insert(col.end(), l.begin(), l.end());
    ptr[r + 1] = col.size();
  }
  return std::make_shared<const SparsePattern>(rows, cols, std::move(ptr), std::move(col));
}

PatternPtr SparsePattern::identity(std::size_t n) {
  std::vector<std::size_t> ptr(n + 1);
  std::vector<Index> col(n);
  for (std::size_t i = 0; i <= n; ++i) ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) col[i] = static_cast<Index>(i);
  return std::make_shared<const SparsePattern>(n, n, std::move(ptr), std::move(col));
}

PatternPtr SparsePattern::dense(std::size_t rows, std::size_t cols) {
  std::vector<std::size_t> ptr(rows + 1);
  std::vector<Index> col(rows * cols);
  for (std::size_t r = 0; r <= rows; ++r) ptr[r] = r * cols;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) col[r * cols + c] = static_cast<Index>(c);
  return std::make_shared<const SparsePattern>(rows, cols, std::move(ptr), std::move(col));
}

std::optional<std::size_t> SparsePattern::find(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(c));
  if (it == cols.end() || *it != c) return std::nullopt;
  return row_ptr_[r] + static_cast<std::size_t>(it - cols.begin());
}

PatternPtr pattern_union(const SparsePattern& a, const SparsePattern& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("pattern_union: shape");
  std::vector<std::size_t> ptr(a.rows() + 1, 0);
  std::vector<Index> col;
  col.reserve(std::max(a.nnz(), b.nnz()));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ra = a.row_cols(r);
    auto rb = b.row_cols(r);
    std::set_union(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(col));
    ptr[r + 1] = col.size();
  }
  return std::make_shared<const SparsePattern>(a.rows(), a.cols(), std::move(ptr), std::move(col));
}

PatternPtr with_diagonal(const SparsePattern& p) {
  return pattern_union(p, *SparsePattern::identity(p.rows()));
}

std::vector<std::size_t> embed_map(const SparsePattern& from, const SparsePattern& to) {
  if (from.rows() != to.rows() || from.cols() != to.cols()) throw ArgumentError("embed_map: shape");
  std::vector<std::size_t> map(from.nnz());
  for (std::size_t r = 0; r < from.rows(); ++r) {
    std::size_t t = to.row_begin(r);
    const std::size_t tend = to.row_end(r);
    for (std::size_t e = from.row_begin(r); e < from.row_end(r); ++e) {
      while (t < tend && to.col()[t] < from.col()[e]) ++t;
      if (t == tend || to.col()[t] != from.col()[e]) {
        throw ArgumentError("embed_map: entry (" + std::to_string(r) + "," +
                            std::to_string(from.col()[e]) + ") missing from target pattern");
      }
      map[e] = t;
    }
  }
  return map;
}

CsrMatrix::CsrMatrix(PatternPtr p, std::vector<double> v) : pattern(std::move(p)), values(std::move(v)) {
  if (!pattern || values.size() != pattern->nnz()) throw ArgumentError("CsrMatrix: nnz mismatch");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].row >= rows || t[i].col >= cols) throw ArgumentError("triplet out of range");
    if (!col.empty() && i > 0 && t[i].row == t[i - 1].row && t[i].col == t[i - 1].col) {
      val.back() += t[i].value;
      continue;
    }
    col.push_back(t[i].col);
    val.push_back(t[i].value);
    ptr[t[i].row + 1] = col.size();
  }
  for (std::size_t r = 0; r < rows; ++r) ptr[r + 1] = std::max(ptr[r + 1], ptr[r]);
  auto p = std::make_shared<const SparsePattern>(rows, cols, std::move(ptr), std::move(col));
  return CsrMatrix(std::move(p), std::move(val));
}

CsrMatrix CsrMatrix::from_dense(const Tensor& dense, double drop_below) {
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < dense.rows(); ++r)
    for (std::size_t c = 0; c < dense.cols(); ++c)
      if (std::abs(dense(r, c)) > drop_below)
        t.push_back({static_cast<Index>(r), static_cast<Index>(c), dense(r, c)});
  return from_triplets(dense.rows(), dense.cols(), std::move(t));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto e = pattern->find(r, c);
  return e ? values[*e] : 0.0;
}

double CsrMatrix::row_sum(std::size_t r) const {
  double s = 0.0;
  for (std::size_t e = pattern->row_begin(r); e < pattern->row_end(r); ++e) s += values[e];
  return s;
}

Tensor CsrMatrix::to_dense() const {
  Tensor out(rows(), cols());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t e = pattern->row_begin(r); e < pattern->row_end(r); ++e)
      out(r, pattern->col()[e]) = values[e];
  return out;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<std::size_t> ptr(cols() + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  col.reserve(nnz());
  val.reserve(nnz());
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t e : pattern->col_entries(c)) {
      col.push_back(pattern->entry_row()[e]);
      val.push_back(values[e]);
    }
    ptr[c + 1] = col.size();
  }
  auto p = std::make_shared<const SparsePattern>(cols(), rows(), std::move(ptr), std::move(col));
  return CsrMatrix(std::move(p), std::move(val));
}

CsrMatrix CsrMatrix::embed_into(const PatternPtr& superset) const {
  auto map = embed_map(*pattern, *superset);
  std::vector<double> v(superset->nnz(), 0.0);
  for (std::size_t e = 0; e < map.size(); ++e) v[map[e]] = values[e];
  return CsrMatrix(superset, std::move(v));
}

}  // namespace cogsl
