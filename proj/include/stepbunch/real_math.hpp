#pragma once

// Thin overload set so that numerical templates can run in double,
// long double or __float128 (GCC quad precision) without caring which.

#include <cmath>
#include <cstdlib>
#include <type_traits>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
#define STEPBUNCH_HAS_FLOAT128 1
#include <quadmath.h>
#endif

namespace stepbunch::rm {

using std::abs;
using std::exp;
using std::expm1;
using std::log;
using std::pow;
using std::sin;
using std::cos;
using std::sqrt;

#ifdef STEPBUNCH_HAS_FLOAT128
using quad = __float128;
// libstdc++ already provides std::abs(__float128) outside strict mode.
#if defined(__STRICT_ANSI__) || !defined(_GLIBCXX_USE_FLOAT128)
inline quad abs(quad x) { return fabsq(x); }
#endif
inline quad exp(quad x) { return expq(x); }
inline quad expm1(quad x) { return expm1q(x); }
inline quad log(quad x) { return logq(x); }
inline quad pow(quad x, quad y) { return powq(x, y); }
inline quad sin(quad x) { return sinq(x); }
inline quad cos(quad x) { return cosq(x); }
inline quad sqrt(quad x) { return sqrtq(x); }
#endif

// Relative truncation threshold for sums carried out in Real.
template <typename Real>
Real sum_tolerance() {
  if constexpr (std::is_same_v<Real, double>) return Real(1e-15);
  return Real(1e-30L) * Real(1e-2L);
}

template <typename Real>
Real pi() {
#ifdef STEPBUNCH_HAS_FLOAT128
  if constexpr (std::is_same_v<Real, quad>) return 4 * atanq(quad(1));
#endif
  return static_cast<Real>(3.141592653589793238462643383279502884L);
}

}  // namespace stepbunch::rm
