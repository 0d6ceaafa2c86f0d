#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace srdev {

/// Arbitrary-precision rational; all algebraic data is kept in this type.
using Rational = mpq_class;

/// Parses "p/q", "-p/q", an integer, or a finite decimal such as "0.25".
/// Throws MalformedSpec on anything else or on a zero denominator.
Rational parse_rational(std::string_view text);

/// "p/q", or just "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Closest rational with denominator <= max_den, via continued fractions.
Rational rationalize(double x, long max_den = 100000);

/// p/q in lowest terms; mpq_class(p, q) alone leaves the fraction unreduced.
inline Rational rational(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

}  // namespace srdev
