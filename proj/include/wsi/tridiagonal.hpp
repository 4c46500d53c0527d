#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wsi/dense.hpp"
#include "wsi/real.hpp"

namespace wsi {

// Real symmetric tridiagonal matrix; the off-diagonal is stored once, so the
// representation is symmetric by construction.
template <class R>
struct Tridiagonal {
  std::vector<R> diag;  // length n
  std::vector<R> off;   // length n-1, entry (i+1, i) == (i, i+1)

  Tridiagonal() = default;
  Tridiagonal(std::vector<R> d, std::vector<R> e)
      : diag(std::move(d)), off(std::move(e)) {
    if (diag.size() < 2 || off.size() + 1 != diag.size())
      throw std::invalid_argument("Tridiagonal: need n >= 2 and n-1 off entries");
  }

  static Tridiagonal diagonal(std::vector<R> d) {
    std::vector<R> e(d.size() - 1, R(0));
    return Tridiagonal(std::move(d), std::move(e));
  }

  int order() const { return static_cast<int>(diag.size()); }

  const R& bottom_corner() const { return diag.back(); }
  const R& bottom_off() const { return off.back(); }

  Matrix<R> dense() const {
    const int n = order();
    Matrix<R> a(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) {
      a(i + 1, i) = off[i];
      a(i, i + 1) = off[i];
    }
    return a;
  }

  static Tridiagonal from_dense(const Matrix<R>& a) {
    const int n = a.rows();
    std::vector<R> d(n), e(n - 1);
    for (int i = 0; i < n; ++i) d[i] = a(i, i);
    for (int i = 0; i + 1 < n; ++i) e[i] = (a(i + 1, i) + a(i, i + 1)) / R(2);
    return Tridiagonal(std::move(d), std::move(e));
  }

  R max_abs() const {
    using std::abs;
    R m(0);
    for (const R& v : diag)
      if (abs(v) > m) m = abs(v);
    for (const R& v : off)
      if (abs(v) > m) m = abs(v);
    return m;
  }

  Tridiagonal leading_block(int m) const {
    std::vector<R> d(diag.begin(), diag.begin() + m);
    std::vector<R> e(off.begin(), off.begin() + (m - 1));
    return Tridiagonal(std::move(d), std::move(e));
  }
};

// Simple spectrum, strictly increasing. ap_free records whether no three
// distinct values form an arithmetic progression (exact arithmetic on the
// stored values).
template <class R>
struct Spectrum {
  std::vector<R> values;
  bool ap_free = false;

  static bool compute_ap_free(const std::vector<R>& v) {
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          if (v[i] + v[j] == R(2) * v[k]) return false;
        }
    return true;
  }

  static Spectrum from_values(std::vector<R> v) {
    for (size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i] < v[i + 1]))
        throw std::invalid_argument("Spectrum: values must be strictly increasing");
    Spectrum s;
    s.ap_free = compute_ap_free(v);
    s.values = std::move(v);
    return s;
  }

  int order() const { return static_cast<int>(values.size()); }
  R spread() const { return values.back() - values.front(); }
};

template <class R>
std::vector<R> eigenvalues_of(const Tridiagonal<R>& t) {
  return sym_eigen(t.dense()).values;
}

}  // namespace wsi
