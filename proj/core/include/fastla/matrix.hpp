#pragma once

// Dense row-major matrices and strided views over them.
//
// Recursive algorithms partition by contiguous index ranges, so every block of
// a matrix is addressable as a view (pointer + stride) without copying.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "fastla/double_word.hpp"
#include "fastla/error.hpp"

namespace fastla {

using Index = std::size_t;

template <class T>
class BasicConstRef;

/// Mutable view of a rows x cols block with row stride `stride`.
template <class T>
class BasicRef {
 public:
  BasicRef() = default;
  BasicRef(T* data, Index rows, Index cols, Index stride)
      : data_(data), rows_(rows), cols_(cols), stride_(stride) {}

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index stride() const noexcept { return stride_; }
  T* data() const noexcept { return data_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(Index i, Index j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * stride_ + j];
  }
  T* row(Index i) const noexcept { return data_ + i * stride_; }

  BasicRef block(Index r0, Index c0, Index nr, Index nc) const noexcept {
    assert(r0 + nr <= rows_ && c0 + nc <= cols_);
    return BasicRef(data_ + r0 * stride_ + c0, nr, nc, stride_);
  }

  void fill(const T& v) const {
    for (Index i = 0; i < rows_; ++i) std::fill(row(i), row(i) + cols_, v);
  }

  /// Element-wise copy from a view of identical shape.
  void assign(const BasicConstRef<T>& src) const;

 private:
  T* data_ = nullptr;
  Index rows_ = 0;
  Index cols_ = 0;
  Index stride_ = 0;
};

template <class T>
class BasicConstRef {
 public:
  BasicConstRef() = default;
  BasicConstRef(const T* data, Index rows, Index cols, Index stride)
      : data_(data), rows_(rows), cols_(cols), stride_(stride) {}
  BasicConstRef(const BasicRef<T>& r)  // NOLINT: views decay to const views
      : data_(r.data()), rows_(r.rows()), cols_(r.cols()), stride_(r.stride()) {}

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index stride() const noexcept { return stride_; }
  const T* data() const noexcept { return data_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  const T& operator()(Index i, Index j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * stride_ + j];
  }
  const T* row(Index i) const noexcept { return data_ + i * stride_; }

  BasicConstRef block(Index r0, Index c0, Index nr, Index nc) const noexcept {
    assert(r0 + nr <= rows_ && c0 + nc <= cols_);
    return BasicConstRef(data_ + r0 * stride_ + c0, nr, nc, stride_);
  }

 private:
  const T* data_ = nullptr;
  Index rows_ = 0;
  Index cols_ = 0;
  Index stride_ = 0;
};

template <class T>
void BasicRef<T>::assign(const BasicConstRef<T>& src) const {
  if (src.rows() != rows_ || src.cols() != cols_) throw DimensionError("assign: shape mismatch");
  for (Index i = 0; i < rows_; ++i) std::copy(src.row(i), src.row(i) + cols_, row(i));
}

/// Owning dense matrix, row-major.
template <class T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;

  BasicMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
      throw DimensionError("matrix dimensions must be positive, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
    data_.assign(rows * cols, T(0.0));
  }

  BasicMatrix(Index rows, Index cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    if (data_.size() != rows * cols) throw DimensionError("data length does not match rows x cols");
  }

  explicit BasicMatrix(const BasicConstRef<T>& v) : BasicMatrix(v.rows(), v.cols()) { view().assign(v); }

  /// Row-wise literal: BasicMatrix::from_rows({{1, 2}, {3, 4}}).
  static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    const Index r = rows.size();
    const Index c = r ? rows.begin()->size() : 0;
    BasicMatrix m(r, c);
    Index i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("from_rows: ragged rows");
      std::copy(row.begin(), row.end(), m.data_.begin() + i * c);
      ++i;
    }
    return m;
  }

  static BasicMatrix identity(Index n) {
    BasicMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  static BasicMatrix diagonal(const std::vector<double>& d) {
    BasicMatrix m(d.size(), d.size());
    for (Index i = 0; i < d.size(); ++i) m(i, i) = T(d[i]);
    return m;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(Index i, Index j) noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const T& operator()(Index i, Index j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  const std::vector<T>& values() const noexcept { return data_; }

  BasicRef<T> view() noexcept { return BasicRef<T>(data_.data(), rows_, cols_, cols_); }
  BasicConstRef<T> view() const noexcept { return BasicConstRef<T>(data_.data(), rows_, cols_, cols_); }
  BasicConstRef<T> cview() const noexcept { return view(); }
  operator BasicConstRef<T>() const noexcept { return view(); }  // NOLINT

  BasicRef<T> block(Index r0, Index c0, Index nr, Index nc) noexcept { return view().block(r0, c0, nr, nc); }
  BasicConstRef<T> block(Index r0, Index c0, Index nr, Index nc) const noexcept {
    return view().block(r0, c0, nr, nc);
  }

  BasicMatrix transpose() const {
    BasicMatrix t(cols_, rows_);
    for (Index i = 0; i < rows_; ++i)
      for (Index j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const BasicMatrix& a, const BasicMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using MatrixRef = BasicRef<double>;
using ConstMatrixRef = BasicConstRef<double>;
using MatrixDW = BasicMatrix<DoubleWord>;

/// Copy of a view into a new matrix.
template <class T>
BasicMatrix<T> to_matrix(const BasicConstRef<T>& v) {
  return BasicMatrix<T>(v);
}

template <class T>
BasicMatrix<T> transpose(const BasicConstRef<T>& v) {
  BasicMatrix<T> t(v.cols(), v.rows());
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.cols(); ++j) t(j, i) = v(i, j);
  return t;
}

inline Matrix transpose(const Matrix& m) { return m.transpose(); }

template <class T>
BasicMatrix<T> add(const BasicConstRef<T>& a, const BasicConstRef<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  BasicMatrix<T> c(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

template <class T>
BasicMatrix<T> subtract(const BasicConstRef<T>& a, const BasicConstRef<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("subtract: shape mismatch");
  BasicMatrix<T> c(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

inline Matrix add(const Matrix& a, const Matrix& b) { return add<double>(a, b); }
inline Matrix subtract(const Matrix& a, const Matrix& b) { return subtract<double>(a, b); }

inline Matrix scaled(const ConstMatrixRef& a, double s) {
  Matrix c(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

/// Lossless promotion to double-word storage.
inline MatrixDW widen(const ConstMatrixRef& a) {
  MatrixDW w(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) w(i, j) = DoubleWord(a(i, j));
  return w;
}

/// Rounds each double-word entry to the nearest binary64.
inline Matrix narrow(const BasicConstRef<DoubleWord>& a) {
  Matrix m(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m(i, j) = a(i, j).to_double();
  return m;
}

/// Zeros strictly below the diagonal (or below the first subdiagonal when
/// `keep_subdiagonal` is set).
inline bool is_upper_triangular(const ConstMatrixRef& a) {
  for (Index i = 1; i < a.rows(); ++i)
    for (Index j = 0; j < std::min(i, a.cols()); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

inline bool is_lower_triangular(const ConstMatrixRef& a) {
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

/// Upper quasi-triangular: zero below the first subdiagonal and no two
/// consecutive nonzero subdiagonal entries.
inline bool is_quasi_upper_triangular(const ConstMatrixRef& a) {
  if (a.rows() != a.cols()) return false;
  for (Index i = 2; i < a.rows(); ++i)
    for (Index j = 0; j + 1 < i; ++j)
      if (a(i, j) != 0.0) return false;
  for (Index i = 2; i < a.rows(); ++i)
    if (a(i, i - 1) != 0.0 && a(i - 1, i - 2) != 0.0) return false;
  return true;
}

}  // namespace fastla
