/**
 * @file linalg.hpp
 * @brief Small dense matrices and LU factorization with partial pivoting.
 *
 * Sized for the handful-of-agents problems the bound machinery works on
 * (m, n up to a few dozen). Everything is value-semantic and row-major.
 */

#ifndef FAIRBOUND_LINALG_HPP
#define FAIRBOUND_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fairbound {

template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Row-major literal, mostly for tests: {{1, 2}, {3, 4}}.
  DenseMatrix(std::initializer_list<std::initializer_list<T>> init)
      : rows_(init.size()), cols_(init.size() ? init.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) {
        throw std::invalid_argument("DenseMatrix: ragged initializer");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  /// Builds a matrix whose c-th column is cols[c].
  static DenseMatrix from_columns(const std::vector<std::vector<T>>& cols) {
    if (cols.empty()) return {};
    DenseMatrix m(cols.front().size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].size() != m.rows_) {
        throw std::invalid_argument("DenseMatrix: columns of unequal length");
      }
      for (std::size_t r = 0; r < m.rows_; ++r) m(r, c) = cols[c][r];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void set_column(std::size_t c, std::span<const T> values) {
    if (values.size() != rows_) {
      throw std::invalid_argument("DenseMatrix::set_column: size mismatch");
    }
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
  }

  /// Copy keeping only the listed rows, in the listed order.
  DenseMatrix select_rows(std::span<const std::size_t> which) const {
    DenseMatrix out(which.size(), cols_);
    for (std::size_t i = 0; i < which.size(); ++i) {
      std::copy_n(row(which[i]).begin(), cols_, out.row(i).begin());
    }
    return out;
  }

  /// Copy with column c removed.
  DenseMatrix drop_column(std::size_t c) const {
    DenseMatrix out(rows_, cols_ - 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = 0, o = 0; k < cols_; ++k) {
        if (k != c) out(r, o++) = (*this)(r, k);
      }
    }
    return out;
  }

  std::vector<T> operator*(std::span<const T> x) const {
    if (x.size() != cols_) {
      throw std::invalid_argument("DenseMatrix: product size mismatch");
    }
    std::vector<T> y(rows_, T{0});
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto rr = row(r);
      y[r] = std::inner_product(rr.begin(), rr.end(), x.begin(), T{0});
    }
    return y;
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;

template <typename T>
T norm2(std::span<const T> v) {
  T s{0};
  for (const T x : v) s += x * x;
  return std::sqrt(s);
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), T{0});
}

/// PA = LU for a square matrix. A singular input is not an error: the
/// factorization is still formed and determinant() reports zero.
template <typename T>
class LuDecomposition {
 public:
  explicit LuDecomposition(DenseMatrix<T> a) : lu_(std::move(a)) {
    if (lu_.rows() != lu_.cols()) {
      throw std::invalid_argument("LuDecomposition: matrix is not square");
    }
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      T best = std::abs(lu_(k, k));
      for (std::size_t r = k + 1; r < n; ++r) {
        if (std::abs(lu_(r, k)) > best) {
          best = std::abs(lu_(r, k));
          p = r;
        }
      }
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
        sign_ = -sign_;
      }
      const T pivot = lu_(k, k);
      if (pivot == T{0}) {
        singular_ = true;
        continue;
      }
      for (std::size_t r = k + 1; r < n; ++r) {
        const T f = lu_(r, k) / pivot;
        lu_(r, k) = f;
        if (f == T{0}) continue;
        for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= f * lu_(k, c);
      }
    }
  }

  std::size_t size() const noexcept { return lu_.rows(); }
  bool singular() const noexcept { return singular_; }

  T determinant() const {
    T d = static_cast<T>(sign_);
    for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
  }

  std::vector<T> solve(std::span<const T> b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw std::invalid_argument("LuDecomposition::solve: size");
    if (singular_) throw std::domain_error("LuDecomposition::solve: singular matrix");
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      T s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      T s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
      x[i] = s / lu_(i, i);
    }
    return x;
  }

  DenseMatrix<T> inverse() const {
    const std::size_t n = lu_.rows();
    DenseMatrix<T> inv(n, n);
    std::vector<T> e(n, T{0});
    for (std::size_t c = 0; c < n; ++c) {
      std::fill(e.begin(), e.end(), T{0});
      e[c] = T{1};
      inv.set_column(c, solve(e));
    }
    return inv;
  }

 private:
  DenseMatrix<T> lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

template <typename T>
T determinant(DenseMatrix<T> a) {
  if (a.rows() == 0) return T{1};
  return LuDecomposition<T>(std::move(a)).determinant();
}

}  // namespace fairbound

#endif  // FAIRBOUND_LINALG_HPP
