#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wsi/errors.hpp"
#include "wsi/jacobi_core.hpp"
#include "wsi/tridiagonal.hpp"

namespace wsi {

// Chart label: a permutation pi of {1..n} (stored 0-based: pi[i] is the index
// into the ascending spectrum of lambda^pi_{i+1}) together with the spectrum.
template <class R>
struct ChartIndex {
  std::vector<int> pi;
  Spectrum<R> spectrum;

  ChartIndex(std::vector<int> p, Spectrum<R> s)
      : pi(std::move(p)), spectrum(std::move(s)) {
    const int n = spectrum.order();
    if (static_cast<int>(pi.size()) != n)
      throw std::invalid_argument("ChartIndex: permutation size mismatch");
    std::vector<bool> seen(n, false);
    for (int v : pi) {
      if (v < 0 || v >= n || seen[v])
        throw std::invalid_argument("ChartIndex: not a permutation");
      seen[v] = true;
    }
  }

  int order() const { return spectrum.order(); }
  // lambda^pi_{i+1} (0-based i)
  const R& lambda_pi(int i) const { return spectrum.values[pi[i]]; }
};

// Coordinates of T in chart pi: the permuted eigenvalues and the subdiagonal
// of the lower-bidiagonal B_pi.
template <class R>
struct BidiagonalCoords {
  std::vector<R> lambda_pi;  // length n
  std::vector<R> beta;       // length n-1
};

struct SignFlip {
  std::vector<int> sigma;  // entries +1/-1, diagonal of E

  explicit SignFlip(std::vector<int> s) : sigma(std::move(s)) {
    for (int v : sigma)
      if (v != 1 && v != -1)
        throw std::invalid_argument("SignFlip: entries must be +1 or -1");
  }
};

template <class R>
R default_chart_tol() {
  return R(1e-12);
}

// beta_i -> sigma_i sigma_{i+1} beta_i; phi of the result is E phi(.) E.
template <class R>
BidiagonalCoords<R> sign_flip_coords(const BidiagonalCoords<R>& c,
                                     const SignFlip& flip) {
  if (flip.sigma.size() != c.lambda_pi.size())
    throw std::invalid_argument("sign_flip: size mismatch");
  BidiagonalCoords<R> out = c;
  for (size_t i = 0; i + 1 < flip.sigma.size(); ++i)
    out.beta[i] = R(flip.sigma[i] * flip.sigma[i + 1]) * c.beta[i];
  return out;
}

// chi_pi: T -> (beta_1, ..., beta_{n-1}). Diagonalize T = Q^T Lambda Q with
// ascending Lambda and rows of Q unit eigenvectors, permute rows by pi, then
// LU with the positive-diagonal-U normalization picks the sign matrix E; the
// subdiagonal of B_pi = L_pi^{-1} Lambda^pi L_pi gives the coordinates.
template <class R>
BidiagonalCoords<R> psi(const Tridiagonal<R>& t, const ChartIndex<R>& chart,
                        const R& tol = default_chart_tol<R>()) {
  using std::abs;
  const int n = t.order();
  if (chart.order() != n) throw std::invalid_argument("psi: order mismatch");

  SymEigen<R> eig = sym_eigen(t.dense());
  R spread = chart.spectrum.spread();
  for (int i = 0; i < n; ++i)
    if (abs(eig.values[i] - chart.spectrum.values[i]) > R(1e-8) * spread &&
        abs(eig.values[i] - chart.spectrum.values[i]) >
            R(4096) * real_epsilon<R>() * spread)
      throw std::invalid_argument("psi: matrix spectrum differs from chart spectrum");

  // A = P_pi^{-1} Q: row i of A is the eigenvector for lambda_{pi(i)}.
  Matrix<R> a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = eig.vectors(j, chart.pi[i]);

  LUFactors<R> lu = lu_unpivoted(a, tol);
  if (lu.singular)
    throw NotInChart("psi: leading principal minor " +
                     std::to_string(lu.singular_col + 1) + " vanishes");

  // E makes U's diagonal positive; L_pi = E L E.
  std::vector<int> e(n);
  for (int i = 0; i < n; ++i) e[i] = lu.u(i, i) > 0 ? 1 : -1;
  Matrix<R> lpi(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) lpi(i, j) = R(e[i] * e[j]) * lu.l(i, j);

  // B = L_pi^{-1} (Lambda^pi L_pi); only the subdiagonal is needed.
  BidiagonalCoords<R> out;
  out.lambda_pi.resize(n);
  for (int i = 0; i < n; ++i) out.lambda_pi[i] = chart.lambda_pi(i);
  Matrix<R> rhs(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) rhs(i, j) = out.lambda_pi[i] * lpi(i, j);
  // Forward substitution: L_pi X = rhs.
  Matrix<R> x(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      R s = rhs(i, j);
      for (int k = 0; k < i; ++k) s -= lpi(i, k) * x(k, j);
      x(i, j) = s;
    }
  out.beta.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) out.beta[i] = x(i + 1, i);
  return out;
}

// phi_pi: coordinates -> matrix, defined for all real coordinates. The
// eigenvectors of the bidiagonal B_pi give L_pi^{-1} by a forward recurrence;
// the orthogonal factor of L_pi (positive-diagonal R convention) conjugates
// Lambda^pi back to the tridiagonal T.
template <class R>
Tridiagonal<R> phi(const BidiagonalCoords<R>& coords, const ChartIndex<R>& chart) {
  const int n = chart.order();
  if (static_cast<int>(coords.beta.size()) != n - 1)
    throw std::invalid_argument("phi: coordinate size mismatch");

  std::vector<R> lam(n);
  for (int i = 0; i < n; ++i) lam[i] = chart.lambda_pi(i);

  // Columns of M = L_pi^{-1} are eigenvectors of B_pi, unit diagonal.
  Matrix<R> m(n, n);
  for (int j = 0; j < n; ++j) {
    m(j, j) = R(1);
    for (int i = j; i + 1 < n; ++i)
      m(i + 1, j) = coords.beta[i] * m(i, j) / (lam[j] - lam[i + 1]);
  }
  Matrix<R> lpi = invert_unit_lower(m);

  QRFactors<R> qr = qr_positive(lpi);
  // T = Q^T Lambda^pi Q.
  Matrix<R> t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      R s(0);
      for (int k = 0; k < n; ++k) s += qr.q(k, i) * lam[k] * qr.q(k, j);
      t(i, j) = s;
      t(j, i) = s;
    }
  return Tridiagonal<R>::from_dense(t);
}

// Lemma 2.1 criterion: T lies in chart pi iff the eigenvalues of its
// unreduced blocks are the consecutive runs of lambda^pi.
template <class R>
bool chart_membership(const Tridiagonal<R>& t, const ChartIndex<R>& chart,
                      const R& tol) {
  using std::abs;
  const int n = t.order();
  if (chart.order() != n) return false;
  int start = 0;
  while (start < n) {
    int stop = start;
    while (stop + 1 < n && abs(t.off[stop]) > tol) ++stop;
    // Block [start, stop].
    std::vector<R> block_eigs;
    if (stop == start) {
      block_eigs.push_back(t.diag[start]);
    } else {
      std::vector<R> d(t.diag.begin() + start, t.diag.begin() + stop + 1);
      std::vector<R> e(t.off.begin() + start, t.off.begin() + stop);
      block_eigs = eigenvalues_of(Tridiagonal<R>(std::move(d), std::move(e)));
    }
    std::vector<R> expected;
    for (int i = start; i <= stop; ++i) expected.push_back(chart.lambda_pi(i));
    std::sort(expected.begin(), expected.end());
    for (size_t i = 0; i < expected.size(); ++i)
      if (abs(block_eigs[i] - expected[i]) > tol) return false;
    start = stop + 1;
  }
  return true;
}

// Wilkinson's step in chart coordinates:
// beta_i -> |(lambda_{pi(i+1)} - w) / (lambda_{pi(i)} - w)| beta_i
// with w the Wilkinson shift of phi(coords). beta_{n-1} == 0 forces
// w = lambda_{pi(n)} (removable singularity).
template <class R>
BidiagonalCoords<R> wilkinson_step_coords(const BidiagonalCoords<R>& coords,
                                          const ChartIndex<R>& chart,
                                          const R& tol) {
  using std::abs;
  const int n = chart.order();
  std::vector<R> lam(n);
  for (int i = 0; i < n; ++i) lam[i] = chart.lambda_pi(i);

  R omega;
  if (coords.beta[n - 2] == 0) {
    omega = lam[n - 1];
  } else {
    Tridiagonal<R> t = phi(coords, chart);
    ShiftChoice<R> sc = detail::trailing_shift(t);
    if (sc.tie_gap <= tol)
      throw TieBreakUndefined("wilkinson_step_coords: shift tie within tolerance");
    omega = sc.omega;
  }

  BidiagonalCoords<R> out;
  out.lambda_pi = coords.lambda_pi;
  out.beta.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    R denom = lam[i] - omega;
    if (abs(denom) <= tol)
      throw ShiftCollision("wilkinson_step_coords: shift hits lambda_pi(" +
                           std::to_string(i + 1) + ")");
    if (i == n - 2 && coords.beta[i] == 0) {
      out.beta[i] = R(0);
      continue;
    }
    out.beta[i] = abs((lam[i + 1] - omega) / denom) * coords.beta[i];
  }
  return out;
}

}  // namespace wsi
