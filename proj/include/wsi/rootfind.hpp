#pragma once

#include <cmath>
#include <utility>

#include "wsi/errors.hpp"
#include "wsi/real.hpp"

namespace wsi {

// Brent's method on a bracketing interval. The caller supplies f(a), f(b)
// with opposite signs; convergence is to |interval| <= xtol. Superlinear on
// smooth roots, which keeps the evaluation count ~ log(digits) even at very
// high precision.
template <class R, class F>
R brent_root(F&& f, R a, R b, R fa, R fb, const R& xtol, int max_iter = 256) {
  using std::abs;
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0))
    throw Error("brent_root: endpoints do not bracket a root");

  R c = a, fc = fa;
  R d = b - a, e = b - a;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (abs(fc) < abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    R tol1 = R(2) * real_epsilon<R>() * abs(b) + xtol / R(2);
    R xm = (c - b) / R(2);
    if (abs(xm) <= tol1 || fb == 0) return b;
    if (abs(e) >= tol1 && abs(fa) > abs(fb)) {
      R s = fb / fa;
      R p, q;
      if (a == c) {  // secant
        p = R(2) * xm * s;
        q = R(1) - s;
      } else {  // inverse quadratic
        q = fa / fc;
        R r = fb / fc;
        p = s * (R(2) * xm * q * (q - r) - (b - a) * (r - R(1)));
        q = (q - R(1)) * (r - R(1)) * (s - R(1));
      }
      if (p > 0) q = -q;
      p = abs(p);
      R min1 = R(3) * xm * q - abs(tol1 * q);
      R min2 = abs(e * q);
      if (R(2) * p < (min1 < min2 ? min1 : min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    if (abs(d) > tol1)
      b += d;
    else
      b += xm > 0 ? tol1 : -tol1;
    fb = f(b);
  }
  throw PrecisionExhausted("brent_root: iteration limit reached");
}

// Convenience: evaluates the endpoints itself.
template <class R, class F>
R brent_root(F&& f, const R& a, const R& b, const R& xtol, int max_iter = 256) {
  R fa = f(a), fb = f(b);
  return brent_root(std::forward<F>(f), a, b, fa, fb, xtol, max_iter);
}

}  // namespace wsi
