#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "wsi/errors.hpp"
#include "wsi/jacobi_core.hpp"
#include "wsi/tridiagonal.hpp"

// Closed forms for the arithmetic-progression case Lambda = diag(-1, 0, 1) in
// the chart pi = (3, 1, 2), coordinates (x, y) = (beta_1, beta_2). The cone
// point is p0 = (2, 0).
namespace wsi::ap3 {

template <class R>
struct PlanePoint {
  R x, y;
};

template <class R>
struct Wedge {
  R a;  // height, 0 < a <= 1/10

  explicit Wedge(const R& height) : a(height) {
    if (!(a > 0) || !(a <= R(1) / R(10)))
      throw std::invalid_argument("Wedge: height must lie in (0, 1/10]");
  }
};

// r1 = sqrt(4 + x^2 + 4 x^2 y^2), r2 = sqrt(4 + 4 y^2 + x^2 y^2)
template <class R>
std::pair<R, R> radii_squared(const PlanePoint<R>& p) {
  R x2 = p.x * p.x, y2 = p.y * p.y;
  return {R(4) + x2 + R(4) * x2 * y2, R(4) + R(4) * y2 + x2 * y2};
}

template <class R>
std::pair<R, R> radii(const PlanePoint<R>& p) {
  using std::sqrt;
  auto [r1s, r2s] = radii_squared(p);
  return {sqrt(r1s), sqrt(r2s)};
}

// The explicit T(x, y); equals phi((x, y)) in the chart (3, 1, 2).
template <class R>
Tridiagonal<R> t_from_xy(const PlanePoint<R>& p) {
  using std::sqrt;
  auto [r1s, r2s] = radii_squared(p);
  R r1 = sqrt(r1s), r2 = sqrt(r2s);
  R denom = r1s * r2s;
  R x2 = p.x * p.x, y2 = p.y * p.y;
  std::vector<R> d(3), e(2);
  d[0] = (R(4) - x2) * r2s / denom;
  d[1] = R(-4) * (R(4) - x2 - R(4) * x2 * y2 * y2 + x2 * x2 * y2 * y2) / denom;
  d[2] = y2 * (x2 - R(4)) * r1s / denom;
  e[0] = R(2) * p.x * r2s * r2 / denom;
  e[1] = R(2) * p.y * r1s * r1 / denom;
  return Tridiagonal<R>(std::move(d), std::move(e));
}

// Bottom 2x2 block of T(x, y), for oracles.
template <class R>
Matrix<R> bottom_block(const PlanePoint<R>& p) {
  Tridiagonal<R> t = t_from_xy(p);
  Matrix<R> b(2, 2);
  b(0, 0) = t.diag[1];
  b(0, 1) = t.off[1];
  b(1, 0) = t.off[1];
  b(1, 1) = t.diag[2];
  return b;
}

// The two factors of Delta = ((x+2)^2 + 8x^2y^2)((x-2)^2 + 8x^2y^2), each
// nonnegative; multiplying them before the square root avoids the quadratic
// cancellation at +-p0.
template <class R>
std::pair<R, R> discriminant_factors(const PlanePoint<R>& p) {
  R x2y2 = p.x * p.x * p.y * p.y;
  R fp = (p.x + R(2)) * (p.x + R(2)) + R(8) * x2y2;
  R fm = (p.x - R(2)) * (p.x - R(2)) + R(8) * x2y2;
  return {fp, fm};
}

template <class R>
R discriminant(const PlanePoint<R>& p) {
  auto [fp, fm] = discriminant_factors(p);
  return fp * fm;
}

enum class Branch { Plus, Minus };

inline wsi::Branch to_core_branch(Branch b) {
  return b == Branch::Plus ? wsi::Branch::Plus : wsi::Branch::Minus;
}

// omega_+- = (-4 + x^2 +- sqrt(Delta)) / (2 r1^2). The root that suffers
// cancellation (the small one on each side of x = 2) is rationalized through
// Delta - (4 - x^2)^2 = 16 x^2 y^2 r1^2, which keeps full relative accuracy
// down to y = 0 and makes omega vanish exactly on the axis.
template <class R>
R omega(const PlanePoint<R>& p, Branch b) {
  using std::sqrt;
  auto [fp, fm] = discriminant_factors(p);
  R sqrt_delta = sqrt(fp * fm);
  auto [r1s, r2s] = radii_squared(p);
  R q = p.x * p.x - R(4);  // x^2 - 4
  if (b == Branch::Plus) {
    if (q < 0)  // |x| < 2: small root, Delta - q^2 = 16 x^2 y^2 r1^2
      return R(8) * p.x * p.x * p.y * p.y / (sqrt_delta - q);
    return (q + sqrt_delta) / (R(2) * r1s);
  }
  if (q > 0)  // |x| > 2: small root
    return R(-8) * p.x * p.x * p.y * p.y / (sqrt_delta + q);
  return (q - sqrt_delta) / (R(2) * r1s);
}

// Numerator of (T)_{3,3} - (omega_+ + omega_-)/2; its sign selects the
// branch (positive -> omega_+ nearest the corner). Zero set is the tie locus.
template <class R>
R branch_boundary_numerator(const PlanePoint<R>& p) {
  R x2 = p.x * p.x, y2 = p.y * p.y;
  return (R(2) - p.x) * (R(2) + p.x) *
         (R(4) - R(4) * y2 - x2 * y2 - R(8) * x2 * y2 * y2);
}

template <class R>
R default_boundary_tol(const PlanePoint<R>& p) {
  auto [r1s, r2s] = radii_squared(p);
  R eps = real_epsilon<R>();
  // 1e-14 r1^2 r2^2 at double; scales with the working precision.
  return eps * R(64) * r1s * r2s;
}

template <class R>
Branch branch_select(const PlanePoint<R>& p, const R& tol) {
  using std::abs;
  R q = branch_boundary_numerator(p);
  if (abs(q) <= tol) throw OnBoundary("branch_select: on the tie locus");
  return q > 0 ? Branch::Plus : Branch::Minus;
}

template <class R>
Branch branch_select(const PlanePoint<R>& p) {
  return branch_select(p, default_boundary_tol(p));
}

// W(x, y) = ((1 + w)/(1 - w) x, |w|/(1 + w) y) with w = omega on the given
// branch. Points on the horizontal axis are exact fixed points.
template <class R>
PlanePoint<R> w_branch(const PlanePoint<R>& p, Branch b) {
  using std::abs;
  R w = omega(p, b);
  return {(R(1) + w) / (R(1) - w) * p.x, abs(w) / (R(1) + w) * p.y};
}

template <class R>
PlanePoint<R> w_map(const PlanePoint<R>& p, const R& tol) {
  return w_branch(p, branch_select(p, tol));
}

template <class R>
PlanePoint<R> w_map(const PlanePoint<R>& p) {
  return w_branch(p, branch_select(p));
}

namespace detail {

// (A, B) with (omega_pm)_x = (8x / (r1^4 sqrt(Delta))) (A +- B), plus the
// identity A^2 - B^2 = 8 y^2 r1^4 used to rationalize the cancelling branch.
template <class R>
struct PartialTerms {
  R sqrt_delta, r1s;
  R ax, bx;  // A = (1 + 2y^2) sqrt(Delta), B = -4 + x^2 + 8y^2 + 6x^2y^2 + 16x^2y^4
  R ay, by;  // A' = (4 - x^2) sqrt(Delta), B' = 16 + 24x^2 + x^4 + 32x^2y^2 + 8x^4y^2
};

template <class R>
PartialTerms<R> partial_terms(const PlanePoint<R>& p) {
  using std::sqrt;
  PartialTerms<R> t;
  auto [fp, fm] = discriminant_factors(p);
  t.sqrt_delta = sqrt(fp * fm);
  auto [r1s, r2s] = radii_squared(p);
  t.r1s = r1s;
  R x2 = p.x * p.x, y2 = p.y * p.y;
  t.ax = (R(1) + R(2) * y2) * t.sqrt_delta;
  t.bx = R(-4) + x2 + R(8) * y2 + R(6) * x2 * y2 + R(16) * x2 * y2 * y2;
  t.ay = (R(4) - x2) * t.sqrt_delta;
  t.by = R(16) + R(24) * x2 + x2 * x2 + R(32) * x2 * y2 + R(8) * x2 * x2 * y2;
  return t;
}

}  // namespace detail

// Closed-form partials (omega_pm)_x, (omega_pm)_y. ConePoint at +-(2, 0).
template <class R>
std::pair<R, R> omega_partials(const PlanePoint<R>& p, Branch b) {
  using std::abs;
  const auto t = detail::partial_terms(p);
  if (t.sqrt_delta == 0) throw ConePoint("omega_partials: cone point +-(2,0)");
  R r1_4 = t.r1s * t.r1s;
  R y2 = p.y * p.y;

  R sum_x;  // A +- B, rationalized when the signs cancel
  if (b == Branch::Plus)
    sum_x = t.bx < 0 ? R(8) * y2 * r1_4 / (t.ax - t.bx) : t.ax + t.bx;
  else
    sum_x = t.bx > 0 ? R(8) * y2 * r1_4 / (t.ax + t.bx) : t.ax - t.bx;
  R wx = R(8) * p.x / (r1_4 * t.sqrt_delta) * sum_x;

  R sum_y;  // A' +- B' with A'^2 - B'^2 = -64 x^2 r1^4
  R x2 = p.x * p.x;
  if (b == Branch::Plus)
    sum_y = t.ay < 0 ? R(-64) * x2 * r1_4 / (t.ay - t.by) : t.ay + t.by;
  else
    sum_y = t.ay > 0 ? R(-64) * x2 * r1_4 / (t.ay + t.by) : t.ay - t.by;
  R wy = R(4) * x2 * p.y / (r1_4 * t.sqrt_delta) * sum_y;

  return {wx, wy};
}

template <class R>
struct JacobianW {
  Matrix<R> j;  // 2x2
  R det;
};

// Jacobian of W_pm and its determinant
// det DW_pm = +-(1 / (1 - w^2)) (2 w_x w x / (1 - w) + w_y y + w (1 + w)).
template <class R>
JacobianW<R> jacobian_w(const PlanePoint<R>& p, Branch b) {
  R w = omega(p, b);
  auto [wx, wy] = omega_partials(p, b);
  R one_minus = R(1) - w, one_plus = R(1) + w;
  R sgn = b == Branch::Plus ? R(1) : R(-1);
  JacobianW<R> out;
  out.j = Matrix<R>(2, 2);
  out.j(0, 0) = R(2) * wx / (one_minus * one_minus) * p.x + one_plus / one_minus;
  out.j(0, 1) = R(2) * wy / (one_minus * one_minus) * p.x;
  out.j(1, 0) = sgn * wx / (one_plus * one_plus) * p.y;
  out.j(1, 1) = sgn * (wy / (one_plus * one_plus) * p.y + w / one_plus);
  out.det = sgn / (R(1) - w * w) *
            (R(2) * wx * w * p.x / one_minus + wy * p.y + w * one_plus);
  return out;
}

// y on the preimage of the line x = 2: (x, +-(x-2) sqrt(x(x^2+2x+4)) / (4x^2)).
template <class R>
R preimage_arc(const R& x, int sign) {
  using std::sqrt;
  if (!(x > 0)) throw std::invalid_argument("preimage_arc: requires x > 0");
  R y = (x - R(2)) * sqrt(x * (x * x + R(2) * x + R(4))) / (R(4) * x * x);
  return sign >= 0 ? y : -y;
}

template <class R>
bool in_region_R(const PlanePoint<R>& p) {
  R x2 = p.x * p.x, y2 = p.y * p.y;
  return p.x > 0 &&
         R(4) - R(4) * y2 - x2 * y2 - R(8) * x2 * y2 * y2 >= 0;
}

template <class R>
bool in_wedge(const PlanePoint<R>& p, const Wedge<R>& w) {
  using std::abs;
  return abs(p.y) <= w.a && abs(p.y) * R(10) >= abs(p.x - R(2));
}

enum class Face { NW, NE, SW, SE };

// Which slanted face of the wedge boundary the point sits on (within tol);
// the faces are |y| = |x - 2| / 10 restricted to |y| <= a, named by the
// quadrant around p0.
template <class R>
std::optional<Face> on_face(const PlanePoint<R>& p, const Wedge<R>& w, const R& tol) {
  using std::abs;
  if (abs(p.y) > w.a + tol) return std::nullopt;
  R d = p.x - R(2);
  if (abs(abs(p.y) * R(10) - abs(d)) > tol * R(10)) return std::nullopt;
  if (p.y >= 0) return d <= 0 ? Face::NW : Face::NE;
  return d <= 0 ? Face::SW : Face::SE;
}

template <class R>
bool in_upper_half_wedge(const PlanePoint<R>& p, const Wedge<R>& w) {
  return p.y >= 0 && in_wedge(p, w);
}

}  // namespace wsi::ap3
