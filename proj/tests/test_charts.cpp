#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/test_util.hpp"
#include "wsi/ap3.hpp"
#include "wsi/charts.hpp"

using namespace wsi;
using testutil::Rng;

namespace {

// The chart used throughout the 3x3 arithmetic-progression analysis:
// spectrum (-1, 0, 1), permutation (3, 1, 2).
ChartIndex<double> ap_chart() {
  return ChartIndex<double>({2, 0, 1},
                            Spectrum<double>::from_values({-1.0, 0.0, 1.0}));
}

}  // namespace

TEST_CASE("phi at the distinguished points of the AP chart") {
  auto chart = ap_chart();

  SUBCASE("coords (2, 0) give the corner matrix P0") {
    Tridiagonal<double> t = phi({{1.0, -1.0, 0.0}, {2.0, 0.0}}, chart);
    CHECK(t.diag[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(t.diag[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(t.diag[2] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(t.off[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(t.off[1]) < 1e-14);
  }

  SUBCASE("coords (0, 1) give the block matrix with the -1/2, 1/2 tail") {
    Tridiagonal<double> t = phi({{1.0, -1.0, 0.0}, {0.0, 1.0}}, chart);
    CHECK(t.diag[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.diag[1] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(t.diag[2] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::abs(t.off[0]) < 1e-14);
    CHECK(t.off[1] == doctest::Approx(0.5).epsilon(1e-14));
  }

  SUBCASE("zero coordinates give the permuted diagonal") {
    Tridiagonal<double> t = phi({{1.0, -1.0, 0.0}, {0.0, 0.0}}, chart);
    CHECK(t.diag[0] == doctest::Approx(1.0));
    CHECK(t.diag[1] == doctest::Approx(-1.0));
    CHECK(t.diag[2] == doctest::Approx(0.0));
    CHECK(std::abs(t.off[0]) < 1e-15);
    CHECK(std::abs(t.off[1]) < 1e-15);
  }
}

TEST_CASE("phi agrees with the explicit closed form everywhere sampled") {
  auto chart = ap_chart();
  Rng rng(5);
  for (int rep = 0; rep < 60; ++rep) {
    double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
    Tridiagonal<double> viachart = phi({{1.0, -1.0, 0.0}, {x, y}}, chart);
    Tridiagonal<double> explicit_t = ap3::t_from_xy(ap3::PlanePoint<double>{x, y});
    CHECK(testutil::tri_distance(viachart, explicit_t) < 1e-12);
  }
}

TEST_CASE("psi recovers coordinates: permuted diagonal and explicit points") {
  auto chart = ap_chart();

  Tridiagonal<double> lam_pi = Tridiagonal<double>::diagonal({1.0, -1.0, 0.0});
  auto c0 = psi(lam_pi, chart);
  CHECK(std::abs(c0.beta[0]) < 1e-14);
  CHECK(std::abs(c0.beta[1]) < 1e-14);

  Tridiagonal<double> t11 = ap3::t_from_xy(ap3::PlanePoint<double>{1.0, 1.0});
  auto c11 = psi(t11, chart);
  CHECK(c11.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c11.beta[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psi recovers the corner-matrix coordinates in the (1,3,2) chart") {
  // Spectrum (1, 2, 4), pi = (1, 3, 2): the padded corner matrix sits at
  // beta = (3 sqrt 2, 0).
  ChartIndex<double> chart({0, 2, 1},
                           Spectrum<double>::from_values({1.0, 2.0, 4.0}));
  double s2 = std::sqrt(2.0);
  Tridiagonal<double> p0({3.0, 2.0, 2.0}, {s2, 0.0});
  auto c = psi(p0, chart);
  CHECK(c.beta[0] == doctest::Approx(3.0 * s2).epsilon(1e-13));
  CHECK(std::abs(c.beta[1]) < 1e-13);
}

TEST_CASE("round trips hold on random charts for n in 3..6") {
  Rng rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    int n = rng.uniform_int(3, 6);
    auto chart = testutil::random_chart<double>(rng, n);
    auto coords = testutil::random_coords(rng, chart);
    Tridiagonal<double> t = phi(coords, chart);
    auto back = psi(t, chart);
    for (int i = 0; i + 1 < n; ++i)
      CHECK(back.beta[i] ==
            doctest::Approx(static_cast<double>(coords.beta[i])).epsilon(1e-10));
    Tridiagonal<double> t2 = phi(back, chart);
    CHECK(testutil::tri_distance(t2, t) < 1e-10 * (1 + t.max_abs()));
  }
}

TEST_CASE("chart membership follows the block-eigenvalue criterion") {
  auto chart = ap_chart();

  SUBCASE("an unreduced matrix is a member (single block)") {
    Tridiagonal<double> t = ap3::t_from_xy(ap3::PlanePoint<double>{1.0, 0.5});
    CHECK(chart_membership(t, chart, 1e-9));
  }

  SUBCASE("the permuted diagonal is a member") {
    CHECK(chart_membership(Tridiagonal<double>::diagonal({1.0, -1.0, 0.0}),
                           chart, 1e-9));
  }

  SUBCASE("a diagonal in the wrong order is not a member of the identity chart") {
    ChartIndex<double> ident({0, 1, 2},
                             Spectrum<double>::from_values({-1.0, 0.0, 1.0}));
    // diag(lambda_2, lambda_1, lambda_3)
    CHECK_FALSE(chart_membership(Tridiagonal<double>::diagonal({0.0, -1.0, 1.0}),
                                 ident, 1e-9));
  }

  SUBCASE("membership agrees with psi feasibility on random matrices") {
    Rng rng(19);
    for (int rep = 0; rep < 30; ++rep) {
      int n = rng.uniform_int(3, 5);
      auto gen_chart = testutil::random_chart<double>(rng, n);
      auto coords = testutil::random_coords(rng, gen_chart);
      Tridiagonal<double> t = phi(coords, gen_chart);
      // Same spectrum, fresh permutation: the two membership routes (block
      // eigenvalues vs LU minors) must agree away from the boundary bands.
      ChartIndex<double> other(testutil::random_permutation(rng, n),
                               gen_chart.spectrum);
      bool member = chart_membership(t, other, 1e-9);
      bool lu_ok = true;
      try {
        auto c = psi(t, other, 1e-9);
        Tridiagonal<double> back = phi(c, other);
        lu_ok = testutil::tri_distance(back, t) < 1e-6 * (1 + t.max_abs());
      } catch (const NotInChart&) {
        lu_ok = false;
      }
      // An unreduced matrix lies in every chart; both routes must say yes.
      bool unreduced = true;
      for (int i = 0; i + 1 < n; ++i)
        if (std::abs(t.off[i]) <= 1e-9) unreduced = false;
      if (unreduced) {
        CHECK(member);
        CHECK(lu_ok);
      }
    }
  }
}

TEST_CASE("sign flips act on coordinates as adjacent sigma products") {
  auto chart = ap_chart();

  BidiagonalCoords<double> c{{1.0, -1.0, 0.0}, {0.7, -0.4}};
  auto same = sign_flip_coords(c, SignFlip({1, 1, 1}));
  CHECK(same.beta[0] == 0.7);
  CHECK(same.beta[1] == -0.4);

  auto mid = sign_flip_coords(c, SignFlip({1, -1, 1}));
  CHECK(mid.beta[0] == -0.7);
  CHECK(mid.beta[1] == 0.4);

  // phi(flip(c)) = E phi(c) E entrywise.
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    int n = rng.uniform_int(3, 5);
    auto ch = testutil::random_chart<double>(rng, n);
    auto coords = testutil::random_coords(rng, ch);
    std::vector<int> sigma(n);
    for (int& s : sigma) s = rng.sign();
    Tridiagonal<double> lhs = phi(sign_flip_coords(coords, SignFlip(sigma)), ch);
    Tridiagonal<double> base = phi(coords, ch);
    for (int i = 0; i < n; ++i)
      CHECK(lhs.diag[i] == doctest::Approx(base.diag[i]).epsilon(1e-12));
    for (int i = 0; i + 1 < n; ++i)
      CHECK(lhs.off[i] ==
            doctest::Approx(sigma[i] * sigma[i + 1] * base.off[i]).epsilon(1e-12));
  }
}

TEST_CASE("coordinate step: removable case scales by the deflated ratios") {
  Rng rng(31);
  int n = 5;
  auto chart = testutil::random_chart<double>(rng, n);
  auto coords = testutil::random_coords(rng, chart);
  coords.beta[n - 2] = 0.0;
  auto out = wilkinson_step_coords(coords, chart, 1e-10);
  CHECK(out.beta[n - 2] == 0.0);
  double w = chart.lambda_pi(n - 1);
  for (int i = 0; i + 2 < n; ++i) {
    double ratio = std::abs((chart.lambda_pi(i + 1) - w) / (chart.lambda_pi(i) - w));
    CHECK(out.beta[i] == doctest::Approx(coords.beta[i] * ratio).epsilon(1e-12));
  }
}

TEST_CASE("coordinate step matches the closed-form plane map on the AP chart") {
  auto chart = ap_chart();
  auto out = wilkinson_step_coords({{1.0, -1.0, 0.0}, {1.0, 0.5}}, chart, 1e-12);
  ap3::PlanePoint<double> img = ap3::w_map(ap3::PlanePoint<double>{1.0, 0.5});
  CHECK(out.beta[0] == doctest::Approx(img.x).epsilon(1e-13));
  CHECK(out.beta[1] == doctest::Approx(img.y).epsilon(1e-13));
}

TEST_CASE("coordinate step equals the matrix-space step through the chart") {
  Rng rng(37);
  int checked = 0;
  for (int rep = 0; rep < 40 && checked < 12; ++rep) {
    int n = rng.uniform_int(3, 5);
    auto chart = testutil::random_chart<double>(rng, n);
    auto coords = testutil::random_coords(rng, chart, 1.5);
    Tridiagonal<double> t = phi(coords, chart);
    auto sc = wilkinson_shift(t, 0.0);
    if (sc.tie_gap < 1e-6) continue;
    bool collision = false;
    for (int i = 0; i + 1 < n; ++i)
      if (std::abs(chart.lambda_pi(i) - sc.omega) < 1e-4) collision = true;
    if (collision) continue;
    Tridiagonal<double> via_matrix = wilkinson_step(t, 1e-12);
    Tridiagonal<double> via_coords =
        phi(wilkinson_step_coords(coords, chart, 1e-10), chart);
    CHECK(testutil::tri_distance(via_matrix, via_coords) <
          1e-9 * (1 + t.max_abs()));
    ++checked;
  }
  CHECK(checked >= 12);
}

TEST_CASE("coordinate step raises ShiftCollision when the shift hits a leading lambda") {
  // Corner converging to an eigenvalue that sits in a leading slot of the
  // identity chart: the ratio denominators degenerate.
  Tridiagonal<double> t({2.0, 3.0, 0.5, 1.0}, {0.4, 0.3, 1e-5});
  ChartIndex<double> chart({0, 1, 2, 3},
                           Spectrum<double>::from_values(eigenvalues_of(t)));
  auto sc = wilkinson_shift(t, 1e-8);
  CHECK(std::abs(sc.omega - 1.0) < 1e-6);
  CHECK(sc.hits_eigenvalue);
  auto coords = psi(t, chart);
  CHECK_THROWS_AS(wilkinson_step_coords(coords, chart, 1e-8), ShiftCollision);
}

TEST_CASE("oddness: the coordinate step commutes with sign flips") {
  Rng rng(41);
  for (int rep = 0; rep < 15; ++rep) {
    int n = rng.uniform_int(3, 5);
    auto chart = testutil::random_chart<double>(rng, n);
    auto coords = testutil::random_coords(rng, chart, 1.2);
    std::vector<int> sigma(n);
    for (int& s : sigma) s = rng.sign();
    SignFlip flip(sigma);
    try {
      auto lhs = wilkinson_step_coords(sign_flip_coords(coords, flip), chart, 1e-10);
      auto rhs = sign_flip_coords(wilkinson_step_coords(coords, chart, 1e-10), flip);
      for (int i = 0; i + 1 < n; ++i)
        CHECK(lhs.beta[i] ==
              doctest::Approx(static_cast<double>(rhs.beta[i])).epsilon(1e-10));
    } catch (const Error&) {
      continue;  // ties/collisions excluded from the property
    }
  }
}

TEST_CASE("comparability: beta_{n-1} against the bottom matrix entry") {
  // On a fixed sample box inside one chart the quotient is bounded and does
  // not change sign.
  auto chart = ap_chart();
  Rng rng(43);
  int sign_ref = 0;
  for (int rep = 0; rep < 200; ++rep) {
    double x = rng.uniform(0.2, 3.0), y = rng.uniform(0.05, 1.5);
    Tridiagonal<double> t = phi({{1.0, -1.0, 0.0}, {x, y}}, chart);
    double q = y / t.off[1];
    CHECK(std::abs(q) > 1e-6);
    CHECK(std::abs(q) < 1e6);
    if (sign_ref == 0) sign_ref = sign_of(q);
    CHECK(sign_of(q) == sign_ref);
  }
}

TEST_CASE("quadrant preservation: off-diagonal signs follow beta signs") {
  Rng rng(47);
  for (int rep = 0; rep < 10; ++rep) {
    int n = rng.uniform_int(3, 5);
    auto chart = testutil::random_chart<double>(rng, n);
    // Sign pattern of T's off-diagonal is constant over each open quadrant:
    // flipping one beta sign flips exactly that off-diagonal sign.
    auto base = testutil::random_coords(rng, chart, 1.0);
    for (int i = 0; i + 1 < n; ++i)
      base.beta[i] = std::abs(static_cast<double>(base.beta[i])) + 0.1;
    Tridiagonal<double> t0 = phi(base, chart);
    std::vector<int> pattern(n - 1);
    for (int i = 0; i + 1 < n; ++i) pattern[i] = sign_of(t0.off[i]);
    for (int flip_at = 0; flip_at + 1 < n; ++flip_at) {
      auto coords = base;
      coords.beta[flip_at] = -coords.beta[flip_at];
      Tridiagonal<double> t = phi(coords, chart);
      for (int i = 0; i + 1 < n; ++i) {
        int expect = i == flip_at ? -pattern[i] : pattern[i];
        CHECK(sign_of(t.off[i]) == expect);
      }
    }
  }
}

TEST_CASE("psi rejects matrices outside the chart") {
  ChartIndex<double> ident({0, 1, 2},
                           Spectrum<double>::from_values({-1.0, 0.0, 1.0}));
  // diag(0, -1, 1) has block eigenvalues out of order for the identity chart.
  CHECK_THROWS_AS(psi(Tridiagonal<double>::diagonal({0.0, -1.0, 1.0}), ident),
                  NotInChart);
}
