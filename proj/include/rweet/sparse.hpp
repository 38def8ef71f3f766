#pragma once

// Row-compressed sparse matrix: only (row, col, value) of nonzeros are kept.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rweet/error.hpp"

namespace rweet {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;

  bool operator==(const Triplet&) const = default;
};

// Non-owning view of one sparse row.
struct SparseRowView {
  std::size_t dim = 0;
  std::span<const std::uint32_t> cols;
  std::span<const double> values;

  std::size_t nnz() const { return cols.size(); }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }
};

class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_{0} {}
  SparseMatrix(std::size_t rows, std::size_t cols) : cols_(cols), row_ptr_(rows + 1, 0) {}

  // Triplets may arrive in any order; duplicates and zeros are rejected.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    SparseMatrix m(0, cols);
    m.row_ptr_.assign(1, 0);
    std::size_t next = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::pair<std::uint32_t, double>> entries;
      for (; next < triplets.size() && triplets[next].row == r; ++next)
        entries.emplace_back(static_cast<std::uint32_t>(triplets[next].col), triplets[next].value);
      m.append_row(entries);
    }
    if (next != triplets.size())
      fail(ErrorKind::kValidation, "triplet row " + std::to_string(triplets[next].row) +
                                       " out of range for " + std::to_string(rows) + " rows");
    return m;
  }

  // Entries must be sorted by column, unique, finite and nonzero.
  void append_row(std::span<const std::pair<std::uint32_t, double>> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto [c, v] = entries[i];
      if (c >= cols_)
        fail(ErrorKind::kValidation, "column " + std::to_string(c) + " out of range for " +
                                         std::to_string(cols_) + " columns");
      if (i > 0 && entries[i - 1].first >= c)
        fail(ErrorKind::kValidation, "row entries must be strictly increasing by column");
      if (!std::isfinite(v) || v == 0.0)
        fail(ErrorKind::kValidation, "sparse values must be finite and nonzero");
      col_idx_.push_back(c);
      values_.push_back(v);
    }
    row_ptr_.push_back(col_idx_.size());
  }

  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  SparseRowView row(std::size_t r) const {
    auto b = row_ptr_[r], e = row_ptr_[r + 1];
    return {cols_, std::span<const std::uint32_t>(col_idx_).subspan(b, e - b),
            std::span<const double>(values_).subspan(b, e - b)};
  }

  double at(std::size_t r, std::size_t c) const {
    auto view = row(r);
    auto it = std::lower_bound(view.cols.begin(), view.cols.end(), c);
    if (it == view.cols.end() || *it != c) return 0.0;
    return view.values[static_cast<std::size_t>(it - view.cols.begin())];
  }

  // Row-major, column-sorted.
  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows(); ++r)
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
    return out;
  }

  SparseMatrix select_rows(std::span<const std::size_t> rows_to_keep) const {
    SparseMatrix out(0, cols_);
    for (auto r : rows_to_keep) {
      auto v = row(r);
      std::vector<std::pair<std::uint32_t, double>> entries;
      entries.reserve(v.nnz());
      for (std::size_t k = 0; k < v.nnz(); ++k) entries.emplace_back(v.cols[k], v.values[k]);
      out.append_row(entries);
    }
    return out;
  }

  // In-place per-row scaling; `scale` receives the row index.
  template <typename F>
  void scale_rows(F&& scale) {
    for (std::size_t r = 0; r < rows(); ++r) {
      double s = scale(r);
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) values_[k] *= s;
    }
  }

  template <typename F>
  void scale_columns(F&& scale) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= scale(col_idx_[k]);
  }

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

// dot(a,b) / (|a||b|); 0 when either norm is 0.
inline double cosine_similarity(const SparseRowView& a, const SparseRowView& b) {
  if (a.dim != b.dim)
    fail(ErrorKind::kValidation, "cosine similarity of rows with different dimensions (" +
                                     std::to_string(a.dim) + " vs " + std::to_string(b.dim) + ")");
  double na = a.squared_norm(), nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.nnz() && j < b.nnz()) {
    if (a.cols[i] < b.cols[j]) ++i;
    else if (a.cols[i] > b.cols[j]) ++j;
    else dot += a.values[i++] * b.values[j++];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Every nonempty row scaled to unit Euclidean norm; empty rows untouched.
inline SparseMatrix l2_normalize_rows(SparseMatrix m) {
  m.scale_rows([&](std::size_t r) {
    double n = std::sqrt(m.row(r).squared_norm());
    return n > 0.0 ? 1.0 / n : 1.0;
  });
  return m;
}

}  // namespace rweet
