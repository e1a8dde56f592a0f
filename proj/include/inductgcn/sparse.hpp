#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inductgcn/error.hpp"

namespace inductgcn {

// Row-major dense matrix of doubles.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix. Column indices within a row are strictly
// increasing, so there are never duplicate coordinates.
class CsrMatrix {
public:
  CsrMatrix() : row_ptr_(1, 0) {}
  CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Builds from unordered triplets. Duplicate coordinates and out-of-range
  // indices are rejected; explicit zeros are kept only if keep_zeros is set.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                                 bool keep_zeros = false) {
    std::sort(entries.begin(), entries.end(), [](const Triplet &a, const Triplet &b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    m.col_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const Triplet &t = entries[k];
      if (t.row >= rows || t.col >= cols) {
        throw Error("sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                    ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
      }
      if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
        throw Error("duplicate sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
      }
      if (!std::isfinite(t.value)) {
        throw NumericError("non-finite sparse entry at (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ")");
      }
      if (t.value == 0.0 && !keep_zeros) {
        continue;
      }
      m.col_idx_.push_back(t.col);
      m.values_.push_back(t.value);
      ++m.row_ptr_[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) {
      m.row_ptr_[r + 1] += m.row_ptr_[r];
    }
    return m;
  }

  static CsrMatrix identity(std::size_t n) {
    CsrMatrix m(n, n);
    m.col_idx_.resize(n);
    m.values_.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      m.col_idx_[i] = i;
      m.row_ptr_[i + 1] = i + 1;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<double> row_values(std::size_t r) {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Stored value at (r, c), or 0 when the coordinate is structurally empty.
  double at(std::size_t r, std::size_t c) const {
    const auto cols = row_cols(r);
    const auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) {
      return 0.0;
    }
    return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
  }

  bool contains(std::size_t r, std::size_t c) const {
    const auto cols = row_cols(r);
    return std::binary_search(cols.begin(), cols.end(), c);
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        out.push_back({r, col_idx_[k], values_[k]});
      }
    }
    return out;
  }

  CsrMatrix transpose() const {
    auto entries = triplets();
    for (auto &t : entries) {
      std::swap(t.row, t.col);
    }
    return from_triplets(cols_, rows_, std::move(entries), true);
  }

  std::vector<double> row_sums() const {
    std::vector<double> sums(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (double v : row_values(r)) {
        sums[r] += v;
      }
    }
    return sums;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto cols = row_cols(r);
      const auto vals = row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        d(r, cols[k]) = vals[k];
      }
    }
    return d;
  }

  bool is_symmetric() const {
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto cols = row_cols(r);
      const auto vals = row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= rows_ || !contains(cols[k], r) || at(cols[k], r) != vals[k]) {
          return false;
        }
      }
    }
    return rows_ == cols_;
  }

  friend bool operator==(const CsrMatrix &, const CsrMatrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// out = a * b
inline DenseMatrix spmm(const CsrMatrix &a, const DenseMatrix &b) {
  assert(a.cols() == b.rows());
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    const auto cols = a.row_cols(r);
    const auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto src = b.row(cols[k]);
      const double w = vals[k];
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] += w * src[j];
      }
    }
  }
  return out;
}

// out = a^T * b, accumulated by scattering rows of b.
inline DenseMatrix spmm_transposed(const CsrMatrix &a, const DenseMatrix &b) {
  assert(a.rows() == b.rows());
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto src = b.row(r);
    const auto cols = a.row_cols(r);
    const auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto dst = out.row(cols[k]);
      const double w = vals[k];
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] += w * src[j];
      }
    }
  }
  return out;
}

// out = a * b
inline DenseMatrix matmul(const DenseMatrix &a, const DenseMatrix &b) {
  assert(a.cols() == b.rows());
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double w = a(i, k);
      if (w == 0.0) {
        continue;
      }
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] += w * src[j];
      }
    }
  }
  return out;
}

// out = a^T * b
inline DenseMatrix matmul_tn(const DenseMatrix &a, const DenseMatrix &b) {
  assert(a.rows() == b.rows());
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto src = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double w = a(r, i);
      if (w == 0.0) {
        continue;
      }
      auto dst = out.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] += w * src[j];
      }
    }
  }
  return out;
}

// out = a * b^T
inline DenseMatrix matmul_nt(const DenseMatrix &a, const DenseMatrix &b) {
  assert(a.cols() == b.cols());
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto lhs = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto rhs = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        acc += lhs[k] * rhs[k];
      }
      out(i, j) = acc;
    }
  }
  return out;
}

// Numerically stable softmax applied to each row in place.
inline void softmax_rows(DenseMatrix &m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    if (row.empty()) {
      continue;
    }
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double &v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double &v : row) {
      v /= total;
    }
  }
}

} // namespace inductgcn
