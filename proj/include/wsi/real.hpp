#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace wsi {

namespace mp = boost::multiprecision;

// Arbitrary-precision real. Precision is dynamic (set per scope via
// PrecisionScope); expression templates are off so every intermediate is a
// plain value at the scope precision.
using BigFloat = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

inline unsigned digits_for_bits(int bits) {
  // ceil(bits * log10 2) plus a small guard so the mpfr mantissa is >= bits.
  return static_cast<unsigned>(bits * 0.30103) + 4;
}

inline long current_bigfloat_bits() {
  BigFloat probe(1);
  return static_cast<long>(mpfr_get_prec(probe.backend().data()));
}

// RAII guard: sets the (thread-local) default BigFloat precision in bits and
// restores the previous value on exit. All BigFloat values created inside the
// scope carry the scope precision.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits)
      : saved_digits_(BigFloat::default_precision()) {
    BigFloat::default_precision(digits_for_bits(bits));
  }
  ~PrecisionScope() { BigFloat::default_precision(saved_digits_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_digits_;
};

template <class R>
struct RealTraits;

template <>
struct RealTraits<double> {
  static double epsilon() { return std::numeric_limits<double>::epsilon(); }
  static long precision_bits() { return 53; }
  static constexpr const char* name() { return "double"; }
};

template <>
struct RealTraits<BigFloat> {
  static BigFloat epsilon() {
    BigFloat one(1);
    long prec = mpfr_get_prec(one.backend().data());
    return ldexp(one, static_cast<int>(1 - prec));
  }
  static long precision_bits() { return current_bigfloat_bits(); }
  static constexpr const char* name() { return "bigfloat"; }
};

template <class R>
R real_epsilon() {
  return RealTraits<R>::epsilon();
}

// Decimal serialization that round-trips at the value's precision.
inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_full(const BigFloat& x) {
  return x.str(0, std::ios_base::scientific);
}

template <class R>
int sign_of(const R& x) {
  if (x > 0) return 1;
  if (x < 0) return -1;
  return 0;
}

}  // namespace wsi
