#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "wsi/errors.hpp"
#include "wsi/tridiagonal.hpp"

namespace wsi {

enum class Branch { Plus, Minus };

inline const char* branch_name(Branch b) {
  return b == Branch::Plus ? "+" : "-";
}

// Wilkinson's shift for one matrix: both eigenvalues of the trailing 2x2
// block, the branch nearest the corner entry, and the tie diagnostics.
template <class R>
struct ShiftChoice {
  R omega;
  R omega_plus;
  R omega_minus;
  Branch branch;
  R tie_gap;  // | |T_nn - omega_+| - |T_nn - omega_-| |
  bool hits_eigenvalue = false;
};

template <class R>
struct GivensRotation {
  int index;  // acts on rows (index, index+1)
  R c, s;
};

// Orthogonal factor of the shifted QR factorization as a rotation chain.
// last_flip absorbs the sign needed to keep the final diagonal of R positive;
// when set, the last column of Q is negated.
template <class R>
struct GivensChain {
  std::vector<GivensRotation<R>> rotations;
  bool last_flip = false;
};

// Upper-triangular factor of a tridiagonal QR step: three bands.
template <class R>
struct UpperBand {
  std::vector<R> main;    // length n
  std::vector<R> super1;  // length n-1
  std::vector<R> super2;  // length n-2

  Matrix<R> dense() const {
    const int n = static_cast<int>(main.size());
    Matrix<R> r(n, n);
    for (int i = 0; i < n; ++i) r(i, i) = main[i];
    for (int i = 0; i + 1 < n; ++i) r(i, i + 1) = super1[i];
    for (int i = 0; i + 2 < n; ++i) r(i, i + 2) = super2[i];
    return r;
  }
};

namespace detail {

// Shift data without the eigenvalue-collision check (hot path).
template <class R>
ShiftChoice<R> trailing_shift(const Tridiagonal<R>& t) {
  using std::abs;
  using std::sqrt;
  const int n = t.order();
  const R& dn1 = t.diag[n - 2];
  const R& dn = t.diag[n - 1];
  const R& e = t.off[n - 2];
  R mid = (dn1 + dn) / R(2);
  R delta = (dn1 - dn) / R(2);
  R rad = sqrt(delta * delta + e * e);
  ShiftChoice<R> s;
  s.omega_plus = mid + rad;
  s.omega_minus = mid - rad;
  R dp = abs(dn - s.omega_plus);
  R dm = abs(dn - s.omega_minus);
  s.tie_gap = abs(dp - dm);
  if (dp <= dm) {
    s.branch = Branch::Plus;
    s.omega = s.omega_plus;
  } else {
    s.branch = Branch::Minus;
    s.omega = s.omega_minus;
  }
  return s;
}

}  // namespace detail

// Full shift choice including the eigenvalue-collision flag. When the caller
// already knows the spectrum, pass it to avoid an eigensolve.
template <class R>
ShiftChoice<R> wilkinson_shift(const Tridiagonal<R>& t, const R& tol,
                               const Spectrum<R>* spectrum = nullptr) {
  using std::abs;
  ShiftChoice<R> s = detail::trailing_shift(t);
  std::vector<R> lam =
      spectrum ? spectrum->values : eigenvalues_of(t);
  for (const R& l : lam)
    if (abs(s.omega - l) <= tol) {
      s.hits_eigenvalue = true;
      break;
    }
  return s;
}

// QR factorization of T - sI by a chase of n-1 Givens rotations, R with
// positive diagonal. `strict` enforces the positive-diagonal contract on the
// final pivot too (the public factorization); the step path instead tolerates
// an underflowing R_nn, which is the benign exact-eigenvalue deflation.
template <class R>
std::pair<GivensChain<R>, UpperBand<R>> shifted_qr_factor_impl(
    const Tridiagonal<R>& t, const R& s, const R& singular_tol, bool strict) {
  using std::abs;
  using std::sqrt;
  const int n = t.order();
  GivensChain<R> chain;
  chain.rotations.reserve(n - 1);
  UpperBand<R> r;
  r.main.assign(n, R(0));
  r.super1.assign(n - 1, R(0));
  if (n >= 2) r.super2.assign(n - 2, R(0));

  R a = t.diag[0] - s;   // current pivot
  R f = t.off[0];        // current (i, i+1) entry
  for (int i = 0; i + 1 < n; ++i) {
    const R& b = t.off[i];
    R h = sqrt(a * a + b * b);
    if (h <= singular_tol)
      throw SingularShift("shifted_qr_factor: pivot underflow at column " +
                          std::to_string(i));
    R c = a / h, sn = b / h;
    chain.rotations.push_back({i, c, sn});
    r.main[i] = h;
    R dnext = t.diag[i + 1] - s;
    r.super1[i] = c * f + sn * dnext;
    a = -sn * f + c * dnext;
    if (i + 2 < n) {
      const R& enext = t.off[i + 1];
      r.super2[i] = sn * enext;
      f = c * enext;
    }
  }
  if (a < 0) {
    chain.last_flip = true;
    a = -a;
  }
  r.main[n - 1] = a;
  if (strict && a <= singular_tol)
    throw SingularShift("shifted_qr_factor: final diagonal of R underflows");
  return {std::move(chain), std::move(r)};
}

template <class R>
R default_singular_tol(const Tridiagonal<R>& t, const R& s) {
  using std::abs;
  R scale = t.max_abs() + abs(s);
  return real_epsilon<R>() * scale * R(64);
}

// Public factorization: Q orthogonal as a Givens chain, R upper triangular
// with strictly positive diagonal. SingularShift signals that s is
// (numerically) an eigenvalue.
template <class R>
std::pair<GivensChain<R>, UpperBand<R>> shifted_qr_factor(
    const Tridiagonal<R>& t, const R& s) {
  return shifted_qr_factor_impl(t, s, default_singular_tol(t, s), true);
}

template <class R>
Matrix<R> chain_to_dense(const GivensChain<R>& chain, int n) {
  // Q = G_1^T G_2^T ... G_{n-1}^T E, built right to left.
  Matrix<R> q = Matrix<R>::identity(n);
  if (chain.last_flip)
    for (int k = 0; k < n; ++k) q(n - 1, k) = -q(n - 1, k);
  for (int idx = static_cast<int>(chain.rotations.size()) - 1; idx >= 0; --idx) {
    const auto& g = chain.rotations[idx];
    for (int k = 0; k < n; ++k) {
      R ri = q(g.index, k), rj = q(g.index + 1, k);
      q(g.index, k) = g.c * ri - g.s * rj;
      q(g.index + 1, k) = g.s * ri + g.c * rj;
    }
  }
  return q;
}

namespace detail {

// W = Q^T T Q applied as a similarity by the rotation chain.
template <class R>
Tridiagonal<R> apply_step(const Tridiagonal<R>& t, const GivensChain<R>& chain) {
  const int n = t.order();
  Matrix<R> w = t.dense();
  for (const auto& g : chain.rotations) {
    const int i = g.index;
    for (int k = 0; k < n; ++k) {  // rows
      R wi = w(i, k), wj = w(i + 1, k);
      w(i, k) = g.c * wi + g.s * wj;
      w(i + 1, k) = -g.s * wi + g.c * wj;
    }
    for (int k = 0; k < n; ++k) {  // columns
      R wi = w(k, i), wj = w(k, i + 1);
      w(k, i) = g.c * wi + g.s * wj;
      w(k, i + 1) = -g.s * wi + g.c * wj;
    }
  }
  // Conjugation by E = diag(1,...,1,-1) flips the last row and column; the
  // corner entry is unchanged.
  if (chain.last_flip) {
    for (int k = 0; k + 1 < n; ++k) {
      w(n - 1, k) = -w(n - 1, k);
      w(k, n - 1) = -w(k, n - 1);
    }
  }
  return Tridiagonal<R>::from_dense(w);
}

}  // namespace detail

template <class R>
struct StepResult {
  Tridiagonal<R> next;
  R omega;
  Branch branch;
  R tie_gap;
  bool removable = false;  // step was taken on the deflated leading block
};

template <class R>
struct StepOptions {
  R deflation_tol;  // |T_{n,n-1}| at or below this is the removable case
  R singular_tol;   // leading-pivot breakdown threshold

  static StepOptions defaults(const Tridiagonal<R>& t) {
    StepOptions o;
    R scale = t.max_abs();
    o.deflation_tol = RealTraits<R>::precision_bits() <= 53
                          ? R(1e-300)
                          : ldexp(R(1), -996);  // ~1e-300 at any precision
    o.singular_tol = real_epsilon<R>() * scale * R(64);
    return o;
  }
};

// One Wilkinson step W(T) = Q^T T Q with the shift chosen by wilkinson_shift.
// Ties within tie_tol raise TieBreakUndefined unless the bottom off-diagonal
// vanishes, in which case the step acts on the leading block (removable
// singularity) and the last row/column ride along unchanged.
template <class R>
StepResult<R> wilkinson_step_full(const Tridiagonal<R>& t, const R& tie_tol,
                                  std::optional<StepOptions<R>> opts = {}) {
  using std::abs;
  const int n = t.order();
  StepOptions<R> o = opts ? *opts : StepOptions<R>::defaults(t);
  ShiftChoice<R> sc = detail::trailing_shift(t);

  if (abs(t.off[n - 2]) <= o.deflation_tol) {
    StepResult<R> res;
    res.omega = t.diag[n - 1];
    res.branch = sc.branch;
    res.tie_gap = sc.tie_gap;
    res.removable = true;
    if (n == 2) {
      res.next = t;  // 1x1 leading block: fixed point
      return res;
    }
    Tridiagonal<R> lead = t.leading_block(n - 1);
    auto [chain, r] =
        shifted_qr_factor_impl(lead, res.omega, o.singular_tol, false);
    Tridiagonal<R> lead_next = detail::apply_step(lead, chain);
    std::vector<R> d(lead_next.diag), e(lead_next.off);
    d.push_back(t.diag[n - 1]);
    e.push_back(t.off[n - 2]);
    res.next = Tridiagonal<R>(std::move(d), std::move(e));
    return res;
  }

  if (sc.tie_gap <= tie_tol)
    throw TieBreakUndefined("wilkinson_step: shift tie within tolerance");

  auto [chain, r] = shifted_qr_factor_impl(t, sc.omega, o.singular_tol, false);
  StepResult<R> res;
  res.next = detail::apply_step(t, chain);
  res.omega = sc.omega;
  res.branch = sc.branch;
  res.tie_gap = sc.tie_gap;
  return res;
}

template <class R>
Tridiagonal<R> wilkinson_step(const Tridiagonal<R>& t, const R& tie_tol) {
  return wilkinson_step_full(t, tie_tol).next;
}

template <class R>
R default_tie_tol(const Spectrum<R>& s) {
  return R(1e-12) * s.spread();
}

// Membership in the sets where the step degenerates, all within tol:
// Y (shift tie), Y_0 (coincident trailing eigenvalues), Z_k (shift equals
// lambda_k), D_{0,i} (deflated slice: corner equals lambda_i, off zero).
struct SetMembership {
  bool in_y = false;
  bool in_y0 = false;
  std::optional<int> in_z;
  std::optional<int> in_d0;
};

template <class R>
SetMembership classify_sets(const Tridiagonal<R>& t, const Spectrum<R>& spectrum,
                            const R& tol) {
  using std::abs;
  const int n = t.order();
  ShiftChoice<R> sc = detail::trailing_shift(t);
  SetMembership m;
  m.in_y = sc.tie_gap <= tol;
  m.in_y0 = abs(t.diag[n - 1] - t.diag[n - 2]) <= tol && abs(t.off[n - 2]) <= tol;
  for (int i = 0; i < spectrum.order(); ++i) {
    if (!m.in_z && abs(sc.omega - spectrum.values[i]) <= tol) m.in_z = i;
    if (!m.in_d0 && abs(t.diag[n - 1] - spectrum.values[i]) <= tol &&
        abs(t.off[n - 2]) <= tol)
      m.in_d0 = i;
  }
  return m;
}

// f(T) = V f(Lambda) V^T through a full symmetric diagonalization.
template <class R, class F>
Matrix<R> matrix_function(const Tridiagonal<R>& t, F&& f, const R& tol) {
  const int n = t.order();
  SymEigen<R> eig = sym_eigen(t.dense());
  for (int i = 0; i + 1 < n; ++i)
    if (eig.values[i + 1] - eig.values[i] <= tol)
      throw DegenerateSpectrum("matrix_function: eigenvalue gap below tol");
  std::vector<R> fv(n);
  for (int i = 0; i < n; ++i) fv[i] = f(eig.values[i]);
  Matrix<R> out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      R s(0);
      for (int k = 0; k < n; ++k) s += eig.vectors(i, k) * fv[k] * eig.vectors(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

template <class R>
R default_degenerate_tol(const Tridiagonal<R>& t) {
  return real_epsilon<R>() * t.max_abs() * R(1024);
}

}  // namespace wsi
