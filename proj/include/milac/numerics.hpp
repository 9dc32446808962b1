// SPDX-License-Identifier: Apache-2.0
//
// milac-sim: analog matrix computing and beamforming simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/**
 * @file numerics.hpp
 * @brief Dense complex matrix type and the small set of kernels the rest of
 * the library needs: products, LU-based solves, inverses and norms.
 *
 * Everything is double precision. Factorizations use partial pivoting with a
 * fixed, deterministic pivot order (first row of maximal magnitude wins), so
 * repeated runs produce bit-identical results.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace milac {

using Complex = std::complex<double>;

/// Raised when operand dimensions are incompatible.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization meets a pivot below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::string expression, std::size_t pivot_index)
      : std::runtime_error(
            (expression.empty() ? std::string("matrix") : expression) +
            " is singular to working precision (pivot " +
            std::to_string(pivot_index) + ")"),
        expression_(std::move(expression)),
        pivot_index_(pivot_index) {}

  /// Name of the matrix or expression that failed ("" when unnamed).
  const std::string& expression() const noexcept { return expression_; }
  /// Zero-based elimination step at which the pivot vanished.
  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::string expression_;
  std::size_t pivot_index_;
};

/// Relative pivot threshold: |pivot| < kSingularPivotTol * max|column| fails.
inline constexpr double kSingularPivotTol = 1e-12;

/**
 * Dense complex matrix, row-major. Vectors are n x 1 matrices.
 */
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("ComplexMatrix: " + std::to_string(data_.size()) +
                       " entries for a " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " matrix");
  }

  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ComplexMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
  }

  static ComplexMatrix column(std::span<const Complex> values) {
    return ComplexMatrix(values.size(), 1,
                         std::vector<Complex>(values.begin(), values.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr,
                      std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_)
      throw ShapeError("ComplexMatrix::block out of range");
    ComplexMatrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
      throw ShapeError("ComplexMatrix::set_block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  ComplexMatrix col(std::size_t j) const { return block(0, j, rows_, 1); }

  /// Conjugate transpose.
  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void check_same_shape(const ComplexMatrix& o, const char* op) const {
    if (o.rows_ != rows_ || o.cols_ != cols_)
      throw ShapeError(std::string("ComplexMatrix ") + op + ": shape mismatch " +
                       std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                       std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("mat_mul: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                     "x" + std::to_string(b.cols()));
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  return mat_mul(a, b);
}

inline double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const auto& z : a.data()) m = std::max(m, std::abs(z));
  return m;
}

/// ||a - b||_F / max(||b||_F, tiny). Used throughout the tests and diagnostics.
inline double relative_error(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double nb = frobenius_norm(b);
  return frobenius_norm(a - b) / (nb > 0.0 ? nb : 1.0);
}

/**
 * LU factorization with partial pivoting, PA = LU, packed in place.
 *
 * A pivot is rejected when its magnitude is below kSingularPivotTol times the
 * largest magnitude found in the same column of the original matrix, which
 * makes the test invariant to column scaling.
 */
class LuFactorization {
 public:
  explicit LuFactorization(ComplexMatrix a, std::string_view label = {})
      : lu_(std::move(a)), perm_(lu_.rows()) {
    if (!lu_.is_square())
      throw ShapeError("LU: matrix " + std::string(label) + " is not square");
    const std::size_t n = lu_.rows();
    std::vector<double> col_scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        col_scale[j] = std::max(col_scale[j], std::abs(lu_(i, j)));
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    double umax = 0.0;
    double umin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == 0.0 || best < kSingularPivotTol * col_scale[k])
        throw SingularMatrixError(std::string(label), k);
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      const Complex piv = lu_(k, k);
      umax = std::max(umax, best);
      umin = std::min(umin, best);
      for (std::size_t i = k + 1; i < n; ++i) {
        const Complex f = lu_(i, k) / piv;
        lu_(i, k) = f;
        if (f == Complex{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
    pivot_ratio_ = n == 0 ? 1.0 : umax / umin;
  }

  std::size_t order() const noexcept { return lu_.rows(); }

  /// max|u_kk| / min|u_kk|; a cheap lower-bound style conditioning indicator.
  double pivot_ratio() const noexcept { return pivot_ratio_; }

  ComplexMatrix solve(const ComplexMatrix& b) const {
    const std::size_t n = lu_.rows();
    if (b.rows() != n)
      throw ShapeError("LU solve: right-hand side has " + std::to_string(b.rows()) +
                       " rows, expected " + std::to_string(n));
    const std::size_t m = b.cols();
    ComplexMatrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) x(i, j) = b(perm_[i], j);
    // forward substitution, unit lower triangle
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) {
        const Complex l = lu_(i, k);
        if (l == Complex{}) continue;
        for (std::size_t j = 0; j < m; ++j) x(i, j) -= l * x(k, j);
      }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) {
        const Complex u = lu_(ii, k);
        if (u == Complex{}) continue;
        for (std::size_t j = 0; j < m; ++j) x(ii, j) -= u * x(k, j);
      }
      const Complex d = lu_(ii, ii);
      for (std::size_t j = 0; j < m; ++j) x(ii, j) /= d;
    }
    return x;
  }

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
  double pivot_ratio_ = 1.0;
};

/// Solves A X = B. The label names A in any SingularMatrixError.
inline ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b,
                                  std::string_view label = {}) {
  if (!a.is_square()) throw ShapeError("solve_linear: A is not square");
  if (a.rows() != b.rows())
    throw ShapeError("solve_linear: A is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but B has " +
                     std::to_string(b.rows()) + " rows");
  return LuFactorization(a, label).solve(b);
}

inline ComplexMatrix inverse(const ComplexMatrix& a, std::string_view label = {}) {
  if (!a.is_square()) throw ShapeError("inverse: matrix is not square");
  return solve_linear(a, ComplexMatrix::identity(a.rows()), label);
}

/// True when a is Hermitian to within tol * max(1, max|a_ij|).
inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12) {
  if (!a.is_square()) return false;
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol * scale) return false;
  return true;
}

/// Attempts a Cholesky factorization; success means positive definite.
inline bool is_positive_definite(const ComplexMatrix& a) {
  if (!a.is_square()) return false;
  const std::size_t n = a.rows();
  ComplexMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return true;
}

/// Stacks [top; bottom] vertically.
inline ComplexMatrix vstack(const ComplexMatrix& top, const ComplexMatrix& bottom) {
  if (top.cols() != bottom.cols()) throw ShapeError("vstack: column mismatch");
  ComplexMatrix out(top.rows() + bottom.rows(), top.cols());
  out.set_block(0, 0, top);
  out.set_block(top.rows(), 0, bottom);
  return out;
}

}  // namespace milac
