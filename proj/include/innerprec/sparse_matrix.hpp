#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "innerprec/errors.hpp"
#include "innerprec/vector_ops.hpp"

namespace innerprec {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Immutable once built.
///
/// Invariants (checked on construction): row pointers nondecreasing with
/// row_ptr[0] == 0 and row_ptr[nrows] == nnz, column indices strictly
/// increasing within a row and below ncols, every stored value finite.
class SparseMatrix {
public:
  SparseMatrix() : row_ptr_(1, 0) {}

  SparseMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values)
      : nrows_(nrows), ncols_(ncols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Builds from unordered triplets; duplicate (i, j) entries are summed.
  static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                    std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row >= nrows || t.col >= ncols) {
        throw DimensionError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                             ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
      }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<std::size_t> row_ptr(nrows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size();) {
      const auto [r, c, v0] = entries[k];
      double v = v0;
      std::size_t j = k + 1;
      for (; j < entries.size() && entries[j].row == r && entries[j].col == c; ++j) {
        v += entries[j].value;
      }
      col_idx.push_back(c);
      values.push_back(v);
      ++row_ptr[r + 1];
      k = j;
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return SparseMatrix(nrows, ncols, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  /// Builds from a row-major dense array, dropping exact zeros.
  static SparseMatrix from_row_major(std::size_t nrows, std::size_t ncols,
                                     std::span<const double> data) {
    require_same_length(data.size(), nrows * ncols, "from_row_major");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < nrows; ++i) {
      for (std::size_t j = 0; j < ncols; ++j) {
        const double v = data[i * ncols + j];
        if (v != 0.0) t.push_back({i, j, v});
      }
    }
    return from_triplets(nrows, ncols, std::move(t));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  static SparseMatrix diagonal(std::span<const double> d) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] != 0.0) t.push_back({i, i, d[i]});
    }
    return from_triplets(d.size(), d.size(), std::move(t));
  }

  std::size_t rows() const noexcept { return nrows_; }
  std::size_t cols() const noexcept { return ncols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  bool is_square() const noexcept { return nrows_ == ncols_; }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const double> row_values(std::size_t i) const {
    return std::span<const double>(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  /// Stored value at (i, j), or 0 when not stored.
  double at(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
  }

  Vector diagonal_values() const {
    Vector d(std::min(nrows_, ncols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
  }

  SparseMatrix transpose() const {
    std::vector<std::size_t> ptr(ncols_ + 1, 0);
    for (std::size_t c : col_idx_) ++ptr[c + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<std::size_t> idx(nnz());
    std::vector<double> val(nnz());
    std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
    for (std::size_t i = 0; i < nrows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t dst = next[col_idx_[k]]++;
        idx[dst] = i;
        val[dst] = values_[k];
      }
    }
    return SparseMatrix(ncols_, nrows_, std::move(ptr), std::move(idx), std::move(val));
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// max |A_ij - A_ji| over all entries.
  double asymmetry() const {
    if (!is_square()) {
      throw DimensionError("asymmetry: matrix is " + std::to_string(nrows_) + "x" +
                           std::to_string(ncols_));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < nrows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        m = std::max(m, std::abs(values_[k] - at(col_idx_[k], i)));
      }
    }
    return m;
  }

  bool operator==(const SparseMatrix& other) const = default;

private:
  void validate() const {
    if (row_ptr_.size() != nrows_ + 1) throw DimensionError("row pointer array has wrong length");
    if (row_ptr_.front() != 0) throw DimensionError("row pointer array must start at 0");
    if (row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
      throw DimensionError("nnz disagrees with row pointers / index / value arrays");
    }
    for (std::size_t i = 0; i < nrows_; ++i) {
      if (row_ptr_[i + 1] < row_ptr_[i]) throw DimensionError("row pointers decrease");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] >= ncols_) throw DimensionError("column index out of range");
        if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
          throw DimensionError("column indices not strictly increasing in row " + std::to_string(i));
        }
      }
    }
    if (!all_finite(values_)) throw Error("sparse matrix holds a non-finite value");
  }

  std::size_t nrows_ = 0;
  std::size_t ncols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// y = A x, accumulated row by row in stored index order.
inline void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  require_same_length(a.cols(), x.size(), "spmv");
  require_same_length(a.rows(), y.size(), "spmv output");
  const auto ptr = a.row_ptr();
  const auto idx = a.col_idx();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[idx[k]];
    y[i] = s;
  }
}

inline Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.rows());
  spmv(a, x, y);
  return y;
}

/// y = A^T x without materializing the transpose (scatter over rows).
inline void spmv_t(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  require_same_length(a.rows(), x.size(), "spmv_t");
  require_same_length(a.cols(), y.size(), "spmv_t output");
  std::fill(y.begin(), y.end(), 0.0);
  const auto ptr = a.row_ptr();
  const auto idx = a.col_idx();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) y[idx[k]] += val[k] * xi;
  }
}

inline Vector spmv_t(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.cols());
  spmv_t(a, x, y);
  return y;
}

/// Sparse product A^T A (n x n). Used for explicit-route comparisons.
inline SparseMatrix gram_left(const SparseMatrix& a) {
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto cols = a.row_cols(r);
    const auto vals = a.row_values(r);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      for (std::size_t q = 0; q < cols.size(); ++q) t.push_back({cols[p], cols[q], vals[p] * vals[q]});
    }
  }
  return SparseMatrix::from_triplets(a.cols(), a.cols(), std::move(t));
}

/// Sparse product A A^T (m x m).
inline SparseMatrix gram_right(const SparseMatrix& a) { return gram_left(a.transpose()); }

} // namespace innerprec
