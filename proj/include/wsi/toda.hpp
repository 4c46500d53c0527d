#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wsi/errors.hpp"
#include "wsi/jacobi_core.hpp"
#include "wsi/tridiagonal.hpp"

namespace wsi {

// Strictly decreasing weights mu_1 > ... > mu_m, the diagonal of M.
template <class R>
struct WeightMatrix {
  std::vector<R> mu;

  explicit WeightMatrix(std::vector<R> m) : mu(std::move(m)) {
    for (size_t i = 0; i + 1 < mu.size(); ++i)
      if (!(mu[i] > mu[i + 1]))
        throw std::invalid_argument("WeightMatrix: weights must strictly decrease");
  }

  static WeightMatrix descending(int n) {
    std::vector<R> m(n);
    for (int i = 0; i < n; ++i) m[i] = R(n - i);
    return WeightMatrix(std::move(m));
  }
};

// A scalar field g with g(lambda_i) pairwise distinct on the given spectrum;
// checked at construction.
template <class R>
struct TodaField {
  std::function<R(const R&)> g;
  Spectrum<R> spectrum;

  TodaField(std::function<R(const R&)> fn, Spectrum<R> s)
      : g(std::move(fn)), spectrum(std::move(s)) {
    using std::abs;
    const auto& v = spectrum.values;
    R scale(0);
    std::vector<R> gv(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      gv[i] = g(v[i]);
      if (abs(gv[i]) > scale) scale = abs(gv[i]);
    }
    if (scale == 0) scale = R(1);
    for (size_t i = 0; i < v.size(); ++i)
      for (size_t j = i + 1; j < v.size(); ++j)
        if (abs(gv[i] - gv[j]) <= real_epsilon<R>() * scale * R(1024))
          throw std::invalid_argument("TodaField: g not injective on the spectrum");
  }
};

// Skew projection: S = Pi_a M has M's strict lower part, zero diagonal,
// upper part the negated transpose.
template <class R>
Matrix<R> pi_a(const Matrix<R>& m) {
  const int n = m.rows();
  Matrix<R> s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      s(i, j) = m(i, j);
      s(j, i) = -m(i, j);
    }
  return s;
}

// Lyapunov functional h_{M,g}(T) = tr(M g(T)).
template <class R>
R h_functional(const Tridiagonal<R>& t, const WeightMatrix<R>& m,
               const TodaField<R>& field) {
  if (static_cast<int>(m.mu.size()) != t.order())
    throw std::invalid_argument("h: order mismatch");
  Matrix<R> gt = matrix_function(t, field.g, default_degenerate_tol(t));
  R s(0);
  for (int i = 0; i < t.order(); ++i) s += m.mu[i] * gt(i, i);
  return s;
}

// d/dt h_{M,g} along the Toda flow at t = 0:
// sum_{i<j} 2 (mu_i - mu_j) (g(T))_{ij}^2, strictly positive off the
// diagonal matrices.
template <class R>
R toda_derivative(const Tridiagonal<R>& t, const WeightMatrix<R>& m,
                  const TodaField<R>& field) {
  if (static_cast<int>(m.mu.size()) != t.order())
    throw std::invalid_argument("toda_derivative: order mismatch");
  Matrix<R> gt = matrix_function(t, field.g, default_degenerate_tol(t));
  R s(0);
  for (int i = 0; i < t.order(); ++i)
    for (int j = i + 1; j < t.order(); ++j)
      s += R(2) * (m.mu[i] - m.mu[j]) * gt(i, j) * gt(i, j);
  return s;
}

// General QR step F(T) = Q(f(T))^T T Q(f(T)) for f nonzero on the spectrum.
template <class R, class F>
Tridiagonal<R> qr_step_general(const Tridiagonal<R>& t, F&& f, const R& tol) {
  using std::abs;
  SymEigen<R> eig = sym_eigen(t.dense());
  for (const R& lam : eig.values)
    if (abs(f(lam)) < tol)
      throw SingularFunctionValue("qr_step_general: f vanishes on the spectrum");
  const int n = t.order();
  Matrix<R> ft(n, n);
  {
    std::vector<R> fv(n);
    for (int i = 0; i < n; ++i) fv[i] = f(eig.values[i]);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        R s(0);
        for (int k = 0; k < n; ++k)
          s += eig.vectors(i, k) * fv[k] * eig.vectors(j, k);
        ft(i, j) = s;
        ft(j, i) = s;
      }
  }
  QRFactors<R> qr = qr_positive(ft);
  Matrix<R> w = qr.q.transpose() * t.dense() * qr.q;
  return Tridiagonal<R>::from_dense(w);
}

template <class R>
R default_function_tol(const Tridiagonal<R>& t) {
  return real_epsilon<R>() * t.max_abs() * R(1024);
}

// Number of k in [0, max_iter] with F^k(T0) in the region.
template <class R, class F, class Pred>
int visit_count(const Tridiagonal<R>& t0, F&& f, Pred&& in_region, int max_iter) {
  using std::abs;
  {
    std::vector<R> lam = eigenvalues_of(t0);
    R scale(0);
    std::vector<R> av(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) {
      av[i] = abs(f(lam[i]));
      if (av[i] > scale) scale = av[i];
    }
    for (size_t i = 0; i < lam.size(); ++i) {
      if (av[i] <= real_epsilon<R>() * scale * R(1024))
        throw std::invalid_argument("visit_count: |f| vanishes on the spectrum");
      for (size_t j = i + 1; j < lam.size(); ++j)
        if (abs(av[i] - av[j]) <= real_epsilon<R>() * scale * R(1024))
          throw std::invalid_argument("visit_count: |f| not injective on spectrum");
    }
  }
  Tridiagonal<R> t = t0;
  int count = in_region(t) ? 1 : 0;
  for (int k = 1; k <= max_iter; ++k) {
    t = qr_step_general(t, f, default_function_tol(t));
    if (in_region(t)) ++count;
  }
  return count;
}

// Classical RK4 integration of dT/dt = [T, Pi_a g(T)]. The state is kept as a
// dense symmetric matrix; isospectral drift beyond 1e-6 (relative) raises
// StepSizeTooLarge. At t = 1 this matches the QR step with f = exp(g).
template <class R>
Tridiagonal<R> toda_flow_rk(const Tridiagonal<R>& t0, const TodaField<R>& field,
                            const R& t_final, int steps) {
  using std::abs;
  if (steps < 1) throw std::invalid_argument("toda_flow_rk: steps must be >= 1");
  const int n = t0.order();
  const R deg_tol = default_degenerate_tol(t0);

  auto vector_field = [&](const Matrix<R>& a) {
    SymEigen<R> eig = sym_eigen(a);
    for (int i = 0; i + 1 < n; ++i)
      if (eig.values[i + 1] - eig.values[i] <= deg_tol)
        throw DegenerateSpectrum("toda_flow_rk: spectrum degenerated");
    std::vector<R> gv(n);
    for (int i = 0; i < n; ++i) gv[i] = field.g(eig.values[i]);
    Matrix<R> ga(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        R s(0);
        for (int k = 0; k < n; ++k)
          s += eig.vectors(i, k) * gv[k] * eig.vectors(j, k);
        ga(i, j) = s;
        ga(j, i) = s;
      }
    Matrix<R> s = pi_a(ga);
    return a * s - s * a;
  };

  std::vector<R> lam0 = eigenvalues_of(t0);
  Matrix<R> a = t0.dense();
  R hstep = t_final / R(steps);
  for (int k = 0; k < steps; ++k) {
    Matrix<R> k1 = vector_field(a);
    Matrix<R> k2 = vector_field(a + k1.scaled(hstep / R(2)));
    Matrix<R> k3 = vector_field(a + k2.scaled(hstep / R(2)));
    Matrix<R> k4 = vector_field(a + k3.scaled(hstep));
    a = a + (k1 + k2.scaled(R(2)) + k3.scaled(R(2)) + k4).scaled(hstep / R(6));
    a = symmetrized(a);
  }

  R scale = t0.max_abs();
  SymEigen<R> eig_end = sym_eigen(a);
  for (int i = 0; i < n; ++i)
    if (abs(eig_end.values[i] - lam0[i]) > R(1e-6) * scale)
      throw StepSizeTooLarge("toda_flow_rk: isospectrality drift exceeds 1e-6");
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (abs(a(i, j)) > R(1e-6) * scale)
        throw StepSizeTooLarge("toda_flow_rk: off-band residual exceeds 1e-6");
  return Tridiagonal<R>::from_dense(a);
}

}  // namespace wsi
