#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsi/ap3.hpp"
#include "wsi/errors.hpp"
#include "wsi/real.hpp"
#include "wsi/rootfind.hpp"
#include "wsi/tridiagonal.hpp"

// Construction of the invariant set of quadratically-converging initial
// conditions near the cone point: sign itineraries, nested-interval
// refinement on wedge slices, flat-arc dynamics, and convergence-rate
// classification.
namespace wsi::cantor {

using Big = BigFloat;
using Point = ap3::PlanePoint<Big>;

// Reround a value to the current (scope) precision.
inline Big reround(const Big& v) {
  Big out(0);
  mpfr_set(out.backend().data(), v.backend().data(), MPFR_RNDN);
  return out;
}

// Element of the sign-sequence space: a finite prefix over {+1, -1} with
// either a periodic continuation or nothing (truncated observation).
class SignSequence {
 public:
  static SignSequence periodic(std::vector<int> prefix, std::vector<int> block) {
    if (block.empty())
      throw std::invalid_argument("SignSequence: periodic block must be nonempty");
    return SignSequence(std::move(prefix), std::move(block));
  }
  static SignSequence truncated(std::vector<int> prefix) {
    if (prefix.empty())
      throw std::invalid_argument("SignSequence: empty truncated sequence");
    return SignSequence(std::move(prefix), {});
  }
  static SignSequence constant(int sign) { return periodic({}, {sign}); }

  // "+++", "+-(-+)" (parenthesized periodic block), "(+)" etc.
  static SignSequence parse(const std::string& text);

  std::optional<int> symbol(int k) const {
    if (k < static_cast<int>(prefix_.size())) return prefix_[k];
    if (period_.empty()) return std::nullopt;
    return period_[(k - prefix_.size()) % period_.size()];
  }

  bool is_periodic() const { return !period_.empty(); }
  const std::vector<int>& prefix() const { return prefix_; }
  const std::vector<int>& period() const { return period_; }

  // d(s, s') = 3^{-k}, k the first disagreement; 0 for equal sequences when
  // both are decidable (two periodic sequences are compared over a full
  // common period past both prefixes).
  static double distance(const SignSequence& s, const SignSequence& t);

  std::string str() const;

 private:
  SignSequence(std::vector<int> prefix, std::vector<int> period)
      : prefix_(std::move(prefix)), period_(std::move(period)) {
    for (int v : prefix_)
      if (v != 1 && v != -1) throw std::invalid_argument("SignSequence: bad symbol");
    for (int v : period_)
      if (v != 1 && v != -1) throw std::invalid_argument("SignSequence: bad symbol");
  }

  std::vector<int> prefix_;
  std::vector<int> period_;
};

inline SignSequence SignSequence::parse(const std::string& text) {
  std::vector<int> prefix, block;
  bool in_block = false;
  for (char ch : text) {
    if (ch == '(') {
      if (in_block) throw std::invalid_argument("SignSequence: nested '('");
      in_block = true;
    } else if (ch == ')') {
      if (!in_block) throw std::invalid_argument("SignSequence: stray ')'");
      in_block = false;
    } else if (ch == '+' || ch == '-') {
      (in_block ? block : prefix).push_back(ch == '+' ? 1 : -1);
    } else if (ch != ' ') {
      throw std::invalid_argument("SignSequence: unexpected character");
    }
  }
  if (in_block) throw std::invalid_argument("SignSequence: unterminated block");
  if (block.empty()) return truncated(std::move(prefix));
  return periodic(std::move(prefix), std::move(block));
}

inline double SignSequence::distance(const SignSequence& s, const SignSequence& t) {
  int horizon = static_cast<int>(s.prefix_.size() + t.prefix_.size() +
                                 std::max<size_t>(1, s.period_.size()) *
                                     std::max<size_t>(1, t.period_.size())) +
                2;
  for (int k = 0; k < horizon; ++k) {
    auto a = s.symbol(k), b = t.symbol(k);
    if (!a || !b)
      throw std::invalid_argument("SignSequence::distance: undecidable tail");
    if (*a != *b) return std::pow(3.0, -k);
  }
  return 0.0;
}

inline std::string SignSequence::str() const {
  std::string out;
  for (int v : prefix_) out.push_back(v > 0 ? '+' : '-');
  if (!period_.empty()) {
    out.push_back('(');
    for (int v : period_) out.push_back(v > 0 ? '+' : '-');
    out.push_back(')');
  }
  return out;
}

struct CantorConfig {
  Big a_star = Big(1) / 50;   // wedge height
  Big l_star = Big(1) / 10;   // flat-arc Lipschitz constant, < 1/6
  int precision_bits = 256;
  int max_depth = 64;
  Big target_width = 0;       // 0: best effort; otherwise required enclosure
  int arc_min_samples = 64;

  void check() const {
    if (!(a_star > 0) || !(a_star <= Big(1) / 10))
      throw std::invalid_argument("CantorConfig: a_star must lie in (0, 1/10]");
    if (!(l_star > 0) || !(l_star < Big(1) / 6))
      throw std::invalid_argument("CantorConfig: l_star must lie in (0, 1/6)");
    if (precision_bits < 64)
      throw std::invalid_argument("CantorConfig: precision_bits < 64");
    if (max_depth < 1) throw std::invalid_argument("CantorConfig: max_depth < 1");
  }
};

namespace detail {

inline ap3::Branch to_branch(int sign) {
  return sign > 0 ? ap3::Branch::Plus : ap3::Branch::Minus;
}

// Orbit from the slice (x, y0) with prescribed branches; smooth through the
// split boundaries, which is what the root finder needs.
struct PrescribedOrbit {
  Big y0;
  const std::vector<int>* branches;

  Point at(const Big& x, int steps) const {
    Point z{x, y0};
    for (int j = 0; j < steps; ++j)
      z = ap3::w_branch(z, to_branch((*branches)[j]));
    return z;
  }
};

// Signed distances to the wedge boundary pieces in the upper half plane.
inline Big face_nw(const Point& z) { return z.x - (Big(2) - Big(10) * z.y); }
inline Big face_ne(const Point& z) { return z.x - (Big(2) + Big(10) * z.y); }

// One interval of the nested construction: orbits of points inside realize
// the prefix and stay in the wedge through step prefix.size().
struct Node {
  Big lo, hi;
  std::vector<int> prefix;
};

// The left-to-right order of the two sign children is determined empirically
// on the first few levels and then frozen; a later disagreement means the
// geometry assumptions broke down.
struct Orientation {
  bool determined = false;
  bool plus_left = true;
  int freeze_depth = 3;
};

inline Big node_xtol(const Node& n) {
  using std::abs;
  Big scale = abs(n.lo) > abs(n.hi) ? abs(n.lo) : abs(n.hi);
  if (scale < 1) scale = Big(1);
  return real_epsilon<Big>() * scale * Big(4);
}

// Refine a node one level: split at the preimage of the line x = 2, keep the
// requested sign's side, then trim to the preimage of the wedge at the next
// step. Three root finds per call.
inline Node refine_child(const Node& node, int sigma, const Big& y0,
                         Orientation& orient) {
  using std::abs;
  const int k = static_cast<int>(node.prefix.size());
  PrescribedOrbit orb{y0, &node.prefix};

  auto g_split = [&](const Big& x) { return orb.at(x, k).x - Big(2); };
  Big f_lo = g_split(node.lo), f_hi = g_split(node.hi);
  if ((f_lo > 0) == (f_hi > 0))
    throw PrecisionExhausted(
        "cantor refine: split bracket lost at depth " + std::to_string(k));
  Big m = brent_root(g_split, node.lo, node.hi, f_lo, f_hi, node_xtol(node));

  bool left_is_plus;
  {
    Big probe = (node.lo + m) / 2;
    left_is_plus = orb.at(probe, k).x < 2;
  }
  if (k < orient.freeze_depth && !orient.determined) {
    orient.plus_left = left_is_plus;
    orient.determined = true;
  } else if (left_is_plus != orient.plus_left) {
    throw Error("cantor refine: interval order contradicts the frozen order");
  }

  Big a = (sigma > 0) == orient.plus_left ? node.lo : m;
  Big b = (sigma > 0) == orient.plus_left ? m : node.hi;

  std::vector<int> child_prefix = node.prefix;
  child_prefix.push_back(sigma);
  PrescribedOrbit orb1{y0, &child_prefix};
  auto g_nw = [&](const Big& x) { return face_nw(orb1.at(x, k + 1)); };
  auto g_ne = [&](const Big& x) { return face_ne(orb1.at(x, k + 1)); };

  Big gn_a = g_nw(a), gn_b = g_nw(b);
  if (!(gn_a < 0) || !(gn_b > 0))
    throw PrecisionExhausted(
        "cantor refine: image does not overshoot the wedge (NW) at depth " +
        std::to_string(k + 1));
  Big lo1 = brent_root(g_nw, a, b, gn_a, gn_b, node_xtol(node));
  Big ge_lo = g_ne(lo1), ge_b = g_ne(b);
  if (!(ge_lo < 0) || !(ge_b > 0))
    throw PrecisionExhausted(
        "cantor refine: image does not overshoot the wedge (NE) at depth " +
        std::to_string(k + 1));
  Big hi1 = brent_root(g_ne, lo1, b, ge_lo, ge_b, node_xtol(node));

  return Node{lo1, hi1, std::move(child_prefix)};
}

inline Node root_node(const Big& y0) {
  return Node{Big(2) - Big(10) * y0, Big(2) + Big(10) * y0, {}};
}

}  // namespace detail

struct SolveResult {
  Big x;       // midpoint of the final enclosure
  Big width;   // enclosure width
  int depth;   // refinement levels (confirmed symbols)
};

// x-coordinate of the point on the invariant set with itinerary s at height
// y0, by nested-interval refinement on the horizontal slice. Defined for
// y0 in [-a_star, a_star] through the mirror symmetry in y.
inline SolveResult f_s_solve_detailed(const SignSequence& s, const Big& y0_in,
                                      const CantorConfig& cfg) {
  using std::abs;
  cfg.check();
  PrecisionScope scope(cfg.precision_bits);
  Big y0 = abs(reround(y0_in));
  Big a_star = reround(cfg.a_star);
  Big target = reround(cfg.target_width);
  if (y0 > a_star)
    throw std::invalid_argument("f_s_solve: |y0| exceeds the wedge height");
  if (y0 == 0) return {Big(2), Big(0), 0};  // every itinerary meets at p0

  detail::Node node = detail::root_node(y0);
  detail::Orientation orient;
  bool symbols_exhausted = false;
  bool stalled = false;
  int k = 0;
  while (true) {
    Big width = node.hi - node.lo;
    if (target > 0 && width <= target) break;
    if (k >= cfg.max_depth) break;
    if (width <= detail::node_xtol(node) * 8) {  // x-resolution stall
      stalled = true;
      break;
    }
    // The next level must resolve face crossings at the next height scale;
    // below the working ulp the brackets lose their signs.
    {
      std::vector<int> probe = node.prefix;
      probe.push_back(s.symbol(k).value_or(1));
      detail::PrescribedOrbit orb{y0, &probe};
      Big ynext = orb.at((node.lo + node.hi) / 2, k + 1).y;
      if (ynext <= real_epsilon<Big>() * 256) {
        stalled = true;
        break;
      }
    }
    auto sym = s.symbol(k);
    if (!sym) {
      symbols_exhausted = true;
      break;
    }
    try {
      node = detail::refine_child(node, *sym, y0, orient);
    } catch (const PrecisionExhausted&) {
      stalled = true;
      break;
    }
    ++k;
  }
  Big width = node.hi - node.lo;
  if (target > 0 && width > target) {
    if (stalled)
      throw PrecisionExhausted("f_s_solve: precision floor before target width");
    if (symbols_exhausted)
      throw DepthInsufficient("f_s_solve: sequence too short for target width");
    throw DepthInsufficient("f_s_solve: max_depth reached before target width");
  }
  return {(node.lo + node.hi) / 2, width, k};
}

inline Big f_s_solve(const SignSequence& s, const Big& y0, const CantorConfig& cfg) {
  return f_s_solve_detailed(s, y0, cfg).x;
}

struct SliceInterval {
  std::vector<int> prefix;
  Big lo, hi;

  Big width() const { return hi - lo; }
};

// All levels of the subdivision tree down to `depth`: level[d] holds the 2^d
// intervals realizing each sign prefix of length d with wedge containment
// through step d, ordered left to right.
inline std::vector<std::vector<SliceInterval>> cantor_tree(const Big& y0_in,
                                                           int depth,
                                                           const CantorConfig& cfg) {
  using std::abs;
  cfg.check();
  if (depth < 0) throw std::invalid_argument("cantor_tree: negative depth");
  PrecisionScope scope(cfg.precision_bits);
  Big y0 = abs(reround(y0_in));
  if (y0 > reround(cfg.a_star) || y0 == 0)
    throw std::invalid_argument("cantor_tree: need 0 < |y0| <= a_star");

  detail::Orientation orient;
  std::vector<detail::Node> level = {detail::root_node(y0)};
  std::vector<std::vector<SliceInterval>> out;
  auto snapshot = [&](const std::vector<detail::Node>& nodes) {
    std::vector<SliceInterval> row;
    row.reserve(nodes.size());
    for (const auto& n : nodes) row.push_back({n.prefix, n.lo, n.hi});
    return row;
  };
  out.push_back(snapshot(level));
  for (int d = 0; d < depth; ++d) {
    std::vector<detail::Node> next;
    next.reserve(level.size() * 2);
    for (const auto& node : level) {
      if (node.hi - node.lo <= detail::node_xtol(node) * 32)
        throw PrecisionExhausted("cantor_tree: intervals below resolution at depth " +
                                 std::to_string(d));
      detail::Node plus = detail::refine_child(node, +1, y0, orient);
      detail::Node minus = detail::refine_child(node, -1, y0, orient);
      if (orient.plus_left) {
        next.push_back(std::move(plus));
        next.push_back(std::move(minus));
      } else {
        next.push_back(std::move(minus));
        next.push_back(std::move(plus));
      }
    }
    level = std::move(next);
    out.push_back(snapshot(level));
  }
  return out;
}

// The 2^depth disjoint closed intervals whose points realize each
// depth-length sign prefix (and stay in the wedge that long).
inline std::vector<SliceInterval> cantor_slice(const Big& y0, int depth,
                                               const CantorConfig& cfg) {
  return cantor_tree(y0, depth, cfg).back();
}

struct ExitInfo {
  std::optional<int> left_wedge_step;  // first k with z_k outside the wedge
  std::optional<int> floor_step;       // first k where |omega| fell below 4 ulp(1)
};

// Itinerary of branch choices along z_{k+1} = W(z_k), with exit diagnostics.
// OnBoundary carries the offending step.
inline std::pair<SignSequence, ExitInfo> realized_sign_sequence(
    const Point& z0, int max_k, const CantorConfig& cfg) {
  using std::abs;
  cfg.check();
  if (max_k < 1) throw std::invalid_argument("realized_sign_sequence: max_k < 1");
  PrecisionScope scope(cfg.precision_bits);
  Point z{reround(z0.x), reround(z0.y)};
  if (!ap3::in_region_R(z))
    throw std::invalid_argument("realized_sign_sequence: z0 outside the region R");
  ap3::Wedge<Big> wedge(reround(cfg.a_star));
  const Big floor = real_epsilon<Big>() * 4;

  ExitInfo info;
  std::vector<int> signs;
  signs.reserve(max_k);
  for (int k = 0; k < max_k; ++k) {
    ap3::Branch b;
    try {
      b = ap3::branch_select(z);
    } catch (const OnBoundary&) {
      throw OnBoundary("realized_sign_sequence: branch boundary", k);
    }
    signs.push_back(b == ap3::Branch::Plus ? 1 : -1);
    if (!info.left_wedge_step && !ap3::in_wedge(z, wedge))
      info.left_wedge_step = k;
    Big om = abs(ap3::omega(z, b));
    if (!info.floor_step && z.y != 0 && om < floor) info.floor_step = k;
    z = ap3::w_branch(z, b);
  }
  return {SignSequence::truncated(std::move(signs)), info};
}

// Piecewise-linear graph over x inside the wedge; the Lipschitz bound applies
// between consecutive samples.
struct FlatArc {
  std::vector<Point> samples;  // strictly increasing in x
  Big lipschitz_bound;

  static FlatArc horizontal(const Big& y, const Big& x_lo, const Big& x_hi,
                            int n, const Big& lipschitz) {
    FlatArc arc;
    arc.lipschitz_bound = lipschitz;
    arc.samples.reserve(n + 1);
    for (int i = 0; i <= n; ++i)
      arc.samples.push_back({x_lo + (x_hi - x_lo) * Big(i) / Big(n), y});
    return arc;
  }

  const Big& x_front() const { return samples.front().x; }
  const Big& x_back() const { return samples.back().x; }

  Big min_y() const {
    Big m = samples.front().y;
    for (const auto& p : samples)
      if (p.y < m) m = p.y;
    return m;
  }
  Big max_y() const {
    Big m = samples.front().y;
    for (const auto& p : samples)
      if (p.y > m) m = p.y;
    return m;
  }

  Big y_at(const Big& x) const {
    if (x <= x_front()) return samples.front().y;
    if (x >= x_back()) return samples.back().y;
    auto it = std::lower_bound(samples.begin(), samples.end(), x,
                               [](const Point& p, const Big& v) { return p.x < v; });
    const Point& hi = *it;
    const Point& lo = *(it - 1);
    return lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x);
  }

  void validate(const ap3::Wedge<Big>& wedge) const {
    using std::abs;
    if (samples.size() < 2) throw std::invalid_argument("FlatArc: too few samples");
    const Big slack = real_epsilon<Big>() * 1024;
    for (size_t i = 0; i + 1 < samples.size(); ++i) {
      if (!(samples[i].x < samples[i + 1].x))
        throw std::invalid_argument("FlatArc: x not strictly increasing");
      Big slope = abs((samples[i + 1].y - samples[i].y) /
                      (samples[i + 1].x - samples[i].x));
      if (slope > lipschitz_bound + slack)
        throw FlatnessViolated("FlatArc: slope exceeds the Lipschitz bound");
    }
    for (const auto& p : samples) {
      if (abs(p.y) > wedge.a + slack ||
          abs(p.y) * 10 + slack < abs(p.x - 2))
        throw std::invalid_argument("FlatArc: sample outside the wedge");
    }
  }
};

struct ArcImage {
  FlatArc arc;                 // image clipped to the wedge, endpoints on faces
  std::vector<Big> source_x;   // matching source parameters
  Big push_ratio;              // max y of image / min y of (clipped) input
};

// Image of an L*-flat arc under one branch of W, clipped to the wedge and
// resampled. The input is first restricted to the branch's side of the line
// x = 2; its endpoints must overshoot the wedge as in the construction.
inline ArcImage arc_iterate(const FlatArc& arc_in, ap3::Branch branch,
                            const CantorConfig& cfg) {
  using std::abs;
  cfg.check();
  PrecisionScope scope(cfg.precision_bits);
  ap3::Wedge<Big> wedge(reround(cfg.a_star));
  FlatArc arc;
  arc.lipschitz_bound = reround(arc_in.lipschitz_bound);
  for (const auto& p : arc_in.samples)
    arc.samples.push_back({reround(p.x), reround(p.y)});
  arc.validate(wedge);

  Big lo = arc.x_front(), hi = arc.x_back();
  if (branch == ap3::Branch::Plus)
    hi = hi < 2 ? hi : Big(2);
  else
    lo = lo > 2 ? lo : Big(2);
  if (!(lo < hi))
    throw std::invalid_argument("arc_iterate: arc has no part on the branch side");

  auto image = [&](const Big& x) {
    return ap3::w_branch(Point{x, arc.y_at(x)}, branch);
  };
  auto g_nw = [&](const Big& x) { return detail::face_nw(image(x)); };
  auto g_ne = [&](const Big& x) { return detail::face_ne(image(x)); };

  Big xtol = real_epsilon<Big>() * 16;
  Big gn_lo = g_nw(lo), gn_hi = g_nw(hi);
  if (!(gn_lo < 0) || !(gn_hi > 0))
    throw Error("arc_iterate: image does not overshoot the wedge on the NW side");
  Big s_lo = brent_root(g_nw, lo, hi, gn_lo, gn_hi, xtol);
  Big ge_lo = g_ne(s_lo), ge_hi = g_ne(hi);
  if (!(ge_lo < 0) || !(ge_hi > 0))
    throw Error("arc_iterate: image does not overshoot the wedge on the NE side");
  Big s_hi = brent_root(g_ne, s_lo, hi, ge_lo, ge_hi, xtol);

  int n = std::max(cfg.arc_min_samples, 64);
  const Big slack = real_epsilon<Big>() * 1024;
  for (;; n *= 2) {
    std::vector<Big> xs(n + 1);
    std::vector<Point> img(n + 1);
    bool ok = true;
    for (int i = 0; i <= n; ++i) {
      xs[i] = s_lo + (s_hi - s_lo) * Big(i) / Big(n);
      img[i] = image(xs[i]);
    }
    for (int i = 0; i < n && ok; ++i) {
      if (!(img[i].x < img[i + 1].x)) ok = false;
      else if (abs((img[i + 1].y - img[i].y) / (img[i + 1].x - img[i].x)) >
               arc.lipschitz_bound + slack)
        ok = false;
    }
    if (ok) {
      ArcImage out;
      out.arc.samples = std::move(img);
      out.arc.lipschitz_bound = arc.lipschitz_bound;
      out.source_x = std::move(xs);
      Big min_in = arc.y_at(lo);
      for (const Big& x : out.source_x) {
        Big y = arc.y_at(x);
        if (y < min_in) min_in = y;
      }
      out.push_ratio = out.arc.max_y() / min_in;
      return out;
    }
    if (n > 65536)
      throw FlatnessViolated("arc_iterate: image slope exceeds L* after refinement");
  }
}

// Lemma 5.2 sampled check: a point below the wedge height but outside the
// wedge must map outside it. Precondition violations are rejected.
inline bool wedge_escape_check(const Point& p_in, const ap3::Wedge<Big>& w) {
  using std::abs;
  Point p{p_in.x, p_in.y};
  if (!ap3::in_region_R(p))
    throw std::invalid_argument("wedge_escape_check: point outside R");
  if (abs(p.y) > w.a)
    throw std::invalid_argument("wedge_escape_check: |y| exceeds the wedge height");
  if (ap3::in_wedge(p, w))
    throw std::invalid_argument("wedge_escape_check: point inside the wedge");
  return !ap3::in_wedge(ap3::w_map(p), w);
}

enum class RateClass { Quadratic, Cubic, Indeterminate };

inline const char* rate_class_name(RateClass c) {
  switch (c) {
    case RateClass::Quadratic: return "quadratic";
    case RateClass::Cubic: return "cubic";
    default: return "indeterminate";
  }
}

struct RateReport {
  double exponent = 0;            // fitted p in |y_{k+1}| ~ C |y_k|^p
  double c_low = 0, c_high = 0;   // bounds of |y_{k+1}| / |y_k|^p over the tail
  RateClass classification = RateClass::Indeterminate;
  int iterations_used = 0;
};

struct RateFitOptions {
  double log10_cap = -2.0;   // magnitudes must be below 1e-2
  double log10_floor;        // and above the precision floor
  int min_tail = 4;          // usable iterates required

  static RateFitOptions for_bits(int precision_bits) {
    RateFitOptions o;
    o.log10_floor = -0.85 * (precision_bits * 0.30103);
    return o;
  }
};

// Least-squares fit of log|y_{k+1}| against log|y_k| over the last contiguous
// run of magnitudes inside the usable window.
inline RateReport rate_classify(const std::vector<Big>& magnitudes,
                                const RateFitOptions& opt) {
  std::vector<double> lm;
  lm.reserve(magnitudes.size());
  for (const Big& m : magnitudes) {
    using std::abs;
    Big a = abs(m);
    lm.push_back(a == 0 ? -1e308 : static_cast<double>(log10(a)));
  }
  auto usable = [&](int i) {
    return lm[i] < opt.log10_cap && lm[i] > opt.log10_floor;
  };
  int run_end = -1, run_start = -1;
  for (int i = static_cast<int>(lm.size()) - 1; i >= 0; --i) {
    if (usable(i)) {
      run_end = i;
      run_start = i;
      while (run_start > 0 && usable(run_start - 1)) --run_start;
      break;
    }
  }
  if (run_end < 0 || run_end - run_start + 1 < opt.min_tail)
    throw InsufficientTail("rate_classify: fewer than " +
                           std::to_string(opt.min_tail) + " usable iterates");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int np = run_end - run_start;  // pairs
  for (int k = run_start; k < run_end; ++k) {
    sx += lm[k];
    sy += lm[k + 1];
    sxx += lm[k] * lm[k];
    sxy += lm[k] * lm[k + 1];
  }
  double denom = np * sxx - sx * sx;
  if (denom == 0) throw InsufficientTail("rate_classify: degenerate fit");
  RateReport r;
  r.exponent = (np * sxy - sx * sy) / denom;
  r.iterations_used = run_end - run_start + 1;
  double clo = 1e308, chi = -1e308;
  for (int k = run_start; k < run_end; ++k) {
    double c = std::pow(10.0, lm[k + 1] - r.exponent * lm[k]);
    clo = std::min(clo, c);
    chi = std::max(chi, c);
  }
  r.c_low = clo;
  r.c_high = chi;
  if (r.exponent >= 1.7 && r.exponent <= 2.3)
    r.classification = RateClass::Quadratic;
  else if (r.exponent >= 2.7 && r.exponent <= 3.3)
    r.classification = RateClass::Cubic;
  return r;
}

inline RateReport rate_classify(const std::vector<Point>& orbit,
                                const RateFitOptions& opt) {
  using std::abs;
  std::vector<Big> mags;
  mags.reserve(orbit.size());
  for (const auto& p : orbit) mags.push_back(abs(p.y));
  return rate_classify(mags, opt);
}

inline RateReport rate_classify(const std::vector<Tridiagonal<Big>>& orbit,
                                const RateFitOptions& opt) {
  using std::abs;
  std::vector<Big> mags;
  mags.reserve(orbit.size());
  for (const auto& t : orbit) mags.push_back(abs(t.bottom_off()));
  return rate_classify(mags, opt);
}

// Startup validation of the configured wedge: horizontal arcs at several
// heights must be pushed down by at least the nominal factor and stay flat
// under both branches.
inline void validate_dynamics(const CantorConfig& cfg) {
  cfg.check();
  PrecisionScope scope(cfg.precision_bits);
  Big a = reround(cfg.a_star);
  for (const Big& frac : {Big(1), Big("0.6"), Big("0.35"), Big("0.15")}) {
    Big h = a * frac;
    FlatArc arc = FlatArc::horizontal(h, Big(2) - 10 * h, Big(2) + 10 * h, 64,
                                      reround(cfg.l_star));
    for (ap3::Branch b : {ap3::Branch::Plus, ap3::Branch::Minus}) {
      ArcImage img = arc_iterate(arc, b, cfg);
      if (img.push_ratio > Big("0.26"))
        throw Error("validate_dynamics: wedge push factor exceeds 0.26 at height " +
                    format_full(h));
    }
  }
}

}  // namespace wsi::cantor
