#pragma once

// Dense row-major matrix used throughout the library. Sizes in this problem
// never exceed a few dozen, so everything is straightforward loops.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmmi {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("Matrix: dimensions must be at least 1x1");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
      throw std::invalid_argument("Matrix: dimensions must be at least 1x1");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) {
        throw std::invalid_argument("Matrix: ragged initializer");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = T{d[i]};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::vector<T> col(std::size_t j) const {
    std::vector<T> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_col(std::size_t j, std::span<const T> v) {
    if (v.size() != rows_) throw std::invalid_argument("set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  // Conjugate transpose (plain transpose for real T).
  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = conj_of((*this)(i, j));
    return out;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw std::invalid_argument("Matrix product: inner dimensions " +
                                  std::to_string(a.cols_) + " vs " +
                                  std::to_string(b.rows_));
    }
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        if (aik == T{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend std::vector<T> operator*(const Matrix& a, std::span<const T> x) {
    if (a.cols_ != x.size()) {
      throw std::invalid_argument("Matrix-vector product: length mismatch");
    }
    std::vector<T> y(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      T acc{};
      for (std::size_t j = 0; j < a.cols_; ++j) acc += a(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }
  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& x) {
    return a * std::span<const T>(x);
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows_; ++i) {
      for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? " " : "") << m(i, j);
      os << '\n';
    }
    return os;
  }

 private:
  static T conj_of(const T& x) {
    if constexpr (std::is_same_v<T, cplx>) {
      return std::conj(x);
    } else {
      return x;
    }
  }

  void check_same(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument(std::string("Matrix ") + op + ": shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

template <typename T>
double frobenius_norm_sq(const Matrix<T>& a) {
  double acc = 0.0;
  for (const auto& x : a.data()) acc += std::norm(x);
  return acc;
}

template <typename T>
double frobenius_norm(const Matrix<T>& a) {
  return std::sqrt(frobenius_norm_sq(a));
}

inline double norm_sq(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc;
}

inline double norm(std::span<const cplx> v) { return std::sqrt(norm_sq(v)); }

// a^H b
inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: length mismatch");
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

// v v^H
inline ComplexMatrix outer(std::span<const cplx> v) {
  ComplexMatrix out(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = v[i] * std::conj(v[j]);
  return out;
}

// x^H A x, real part (A Hermitian).
inline double quadratic_form(const ComplexMatrix& a, std::span<const cplx> x) {
  return std::real(inner(x, a * x));
}

inline ComplexMatrix to_complex(const RealMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  return out;
}

// Horizontal concatenation of column vectors into a matrix.
inline ComplexMatrix from_columns(std::span<const CVector> cols) {
  if (cols.empty()) throw std::invalid_argument("from_columns: no columns");
  ComplexMatrix out(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.set_col(j, cols[j]);
  return out;
}

/// Hermitian matrix. Construction symmetrizes the input and forces a real
/// diagonal; `checked` additionally rejects inputs that are not Hermitian to
/// the given relative tolerance.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(std::size_t dim) : m_(dim, dim) {}

  // Symmetrizes (A + A^H)/2 unconditionally.
  static HermitianMatrix symmetrized(const ComplexMatrix& a) {
    if (!a.square()) throw std::invalid_argument("HermitianMatrix: matrix is not square");
    HermitianMatrix h;
    h.m_ = a;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
      h.m_(i, i) = cplx(a(i, i).real(), 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
        h.m_(i, j) = v;
        h.m_(j, i) = std::conj(v);
      }
    }
    return h;
  }

  static HermitianMatrix checked(const ComplexMatrix& a, double tol = 1e-12) {
    if (!a.square()) throw std::invalid_argument("HermitianMatrix: matrix is not square");
    const double scale = std::max(1.0, frobenius_norm(a));
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = i; j < a.cols(); ++j)
        if (std::abs(a(i, j) - std::conj(a(j, i))) > tol * scale) {
          throw std::invalid_argument("HermitianMatrix: entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") breaks conjugate symmetry");
        }
    return symmetrized(a);
  }

  static HermitianMatrix identity(std::size_t n) {
    return symmetrized(ComplexMatrix::identity(n));
  }

  std::size_t dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double diag(std::size_t i) const { return m_(i, i).real(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= cplx(s, 0.0);
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

  // A - s I
  HermitianMatrix shifted(double s) const {
    HermitianMatrix out = *this;
    for (std::size_t i = 0; i < dim(); ++i) out.m_(i, i) -= s;
    return out;
  }

  // Rank-one Hermitian update A += w v v^H.
  void add_outer(std::span<const cplx> v, double w = 1.0) {
    const std::size_t n = dim();
    if (v.size() != n) throw std::invalid_argument("add_outer: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      m_(i, i) += w * std::norm(v[i]);
      for (std::size_t j = i + 1; j < n; ++j) {
        const cplx x = w * v[i] * std::conj(v[j]);
        m_(i, j) += x;
        m_(j, i) += std::conj(x);
      }
    }
  }

 private:
  friend class HermitianAccess;
  ComplexMatrix m_;
};

/// Mutable access for in-place kernels that preserve Hermitian structure
/// (rotations applied symmetrically on both sides).
class HermitianAccess {
 public:
  static ComplexMatrix& raw(HermitianMatrix& h) noexcept { return h.m_; }
};

}  // namespace cmmi
