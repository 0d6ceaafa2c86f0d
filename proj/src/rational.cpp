#include "srdev/rational.hpp"

#include <cctype>
#include <cmath>

#include "srdev/errors.hpp"

namespace srdev {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational out;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw MalformedSpec("invalid rational '" + std::string(text) + "'");
    mpz_class d{std::string(den)};
    if (d == 0) throw MalformedSpec("zero denominator in '" + std::string(text) + "'");
    out = Rational(mpz_class(std::string(num)), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto ip = s.substr(0, dot);
    auto fp = s.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp)))
      throw MalformedSpec("invalid rational '" + std::string(text) + "'");
    mpz_class scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    mpz_class whole(ip.empty() ? std::string("0") : std::string(ip));
    mpz_class frac(fp.empty() ? std::string("0") : std::string(fp));
    out = Rational(whole * scale + frac, scale);
  } else {
    if (!all_digits(s)) throw MalformedSpec("invalid rational '" + std::string(text) + "'");
    out = Rational(mpz_class(std::string(s)));
  }
  out.canonicalize();
  if (negative) out = -out;
  return out;
}

std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_str();
}

Rational rationalize(double x, long max_den) {
  if (!std::isfinite(x)) return Rational(0);
  // Continued-fraction convergents h/k.
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(v);
    if (std::abs(a) > 1e15) break;
    long ai = static_cast<long>(a);
    long h2 = ai * h1 + h0;
    long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    double frac = v - a;
    if (std::abs(frac) < 1e-15) break;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-14) break;
    v = 1.0 / frac;
  }
  Rational out(h1, k1);
  out.canonicalize();
  return out;
}

}  // namespace srdev
