#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wsi/errors.hpp"
#include "wsi/real.hpp"

namespace wsi {

// Dense row-major matrix for the small orders (n <= ~10) this project works
// with. Value semantics throughout.
template <class R>
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, R(0)) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = R(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  R& operator()(int i, int j) { return a_[i * cols_ + j]; }
  const R& operator()(int i, int j) const { return a_[i * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& b) const {
    Matrix c(rows_, b.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const R& aik = (*this)(i, k);
        if (aik == 0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  Matrix operator-(const Matrix& b) const {
    Matrix c(rows_, cols_);
    for (int i = 0; i < rows_ * cols_; ++i) c.a_[i] = a_[i] - b.a_[i];
    return c;
  }

  Matrix operator+(const Matrix& b) const {
    Matrix c(rows_, cols_);
    for (int i = 0; i < rows_ * cols_; ++i) c.a_[i] = a_[i] + b.a_[i];
    return c;
  }

  Matrix scaled(const R& s) const {
    Matrix c(rows_, cols_);
    for (int i = 0; i < rows_ * cols_; ++i) c.a_[i] = a_[i] * s;
    return c;
  }

  R max_abs() const {
    using std::abs;
    R m(0);
    for (const R& v : a_) {
      R av = abs(v);
      if (av > m) m = av;
    }
    return m;
  }

  R frobenius() const {
    using std::sqrt;
    R s(0);
    for (const R& v : a_) s += v * v;
    return sqrt(s);
  }

 private:
  int rows_, cols_;
  std::vector<R> a_;
};

template <class R>
Matrix<R> symmetrized(const Matrix<R>& a) {
  Matrix<R> s(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s(i, j) = (a(i, j) + a(j, i)) / R(2);
  return s;
}

template <class R>
struct SymEigen {
  std::vector<R> values;  // ascending
  Matrix<R> vectors;      // columns: A = V diag(values) V^T
};

// Cyclic Jacobi eigensolver. Robust at any precision; quadratic convergence
// makes the sweep count ~ log of the digit count.
template <class R>
SymEigen<R> sym_eigen(Matrix<R> a, int max_sweeps = 128) {
  using std::abs;
  using std::sqrt;
  const int n = a.rows();
  Matrix<R> v = Matrix<R>::identity(n);
  const R eps = real_epsilon<R>();
  R scale = a.max_abs();
  if (scale == 0) scale = R(1);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    R off(0);
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= eps * eps * scale * scale * R(n * n)) {
      SymEigen<R> out;
      out.values.resize(n);
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(),
                [&](int i, int j) { return a(i, i) < a(j, j); });
      out.vectors = Matrix<R>(n, n);
      for (int j = 0; j < n; ++j) {
        out.values[j] = a(idx[j], idx[j]);
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
      }
      return out;
    }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (abs(a(p, q)) <= eps * scale / R(1000000)) continue;
        R tau = (a(q, q) - a(p, p)) / (R(2) * a(p, q));
        R t;
        if (tau >= 0)
          t = R(1) / (tau + sqrt(R(1) + tau * tau));
        else
          t = R(-1) / (-tau + sqrt(R(1) + tau * tau));
        R c = R(1) / sqrt(R(1) + t * t);
        R s = t * c;
        for (int k = 0; k < n; ++k) {
          R akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          R apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          R vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  throw Error("sym_eigen: Jacobi sweeps did not converge");
}

template <class R>
struct QRFactors {
  Matrix<R> q;  // orthogonal
  Matrix<R> r;  // upper triangular, positive diagonal
};

// Dense QR by Givens rotations, normalized so R has nonnegative diagonal.
template <class R>
QRFactors<R> qr_positive(const Matrix<R>& a) {
  using std::sqrt;
  const int n = a.rows();
  Matrix<R> r = a;
  Matrix<R> qt = Matrix<R>::identity(n);
  for (int j = 0; j < n; ++j) {
    for (int i = n - 1; i > j; --i) {
      R x = r(j, j), y = r(i, j);
      if (y == 0) continue;
      R h = sqrt(x * x + y * y);
      R c = x / h, s = y / h;
      for (int k = 0; k < n; ++k) {
        R rjk = r(j, k), rik = r(i, k);
        r(j, k) = c * rjk + s * rik;
        r(i, k) = -s * rjk + c * rik;
        R qjk = qt(j, k), qik = qt(i, k);
        qt(j, k) = c * qjk + s * qik;
        qt(i, k) = -s * qjk + c * qik;
      }
    }
    if (r(j, j) < 0) {
      for (int k = 0; k < n; ++k) {
        r(j, k) = -r(j, k);
        qt(j, k) = -qt(j, k);
      }
    }
  }
  return {qt.transpose(), r};
}

template <class R>
struct LUFactors {
  Matrix<R> l;        // unit lower triangular
  Matrix<R> u;        // upper triangular
  bool singular;      // a leading minor fell below the relative tolerance
  int singular_col;   // first offending column, -1 otherwise
};

// Unpivoted Doolittle LU. A leading principal minor is deemed zero when the
// running pivot product drops below rel_tol times the Hadamard bound of the
// corresponding rows.
template <class R>
LUFactors<R> lu_unpivoted(const Matrix<R>& a, const R& rel_tol) {
  using std::abs;
  using std::sqrt;
  const int n = a.rows();
  Matrix<R> l = Matrix<R>::identity(n);
  Matrix<R> u(n, n);
  R minor(1), hadamard(1);
  LUFactors<R> out;
  out.singular = false;
  out.singular_col = -1;
  for (int k = 0; k < n; ++k) {
    for (int j = k; j < n; ++j) {
      R s = a(k, j);
      for (int m = 0; m < k; ++m) s -= l(k, m) * u(m, j);
      u(k, j) = s;
    }
    R row_norm(0);
    for (int j = 0; j < n; ++j) row_norm += a(k, j) * a(k, j);
    hadamard *= sqrt(row_norm);
    minor *= u(k, k);
    if (abs(minor) < rel_tol * hadamard || u(k, k) == 0) {
      out.singular = true;
      out.singular_col = k;
      break;
    }
    for (int i = k + 1; i < n; ++i) {
      R s = a(i, k);
      for (int m = 0; m < k; ++m) s -= l(i, m) * u(m, k);
      l(i, k) = s / u(k, k);
    }
  }
  out.l = std::move(l);
  out.u = std::move(u);
  return out;
}

// Inverse of a unit lower triangular matrix.
template <class R>
Matrix<R> invert_unit_lower(const Matrix<R>& l) {
  const int n = l.rows();
  Matrix<R> m = Matrix<R>::identity(n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      R s(0);
      for (int k = j; k < i; ++k) s += l(i, k) * m(k, j);
      m(i, j) = -s;
    }
  return m;
}

}  // namespace wsi
