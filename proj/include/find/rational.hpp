#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

// Boost 1.74 mixed rational/integer equality recurses under C++20 rewritten
// comparison candidates; exact non-template overloads take precedence.
namespace boost {
inline constexpr bool operator==(const rational<std::int64_t>& a, int b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline constexpr bool operator==(const rational<std::int64_t>& a, std::int64_t b) {
  return a.denominator() == 1 && a.numerator() == b;
}
}  // namespace boost

namespace find {

using Rational = boost::rational<std::int64_t>;
using RationalVector = std::vector<Rational>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline bool is_integer(const Rational& r) { return r.denominator() == 1; }

inline int sign(const Rational& r) {
  return r.numerator() > 0 ? 1 : (r.numerator() < 0 ? -1 : 0);
}

// "3", "-1/2"
std::string to_string(const Rational& r);

// Exact conversion of an integer, decimal ("0.25", "-1.5") or "p/q" literal.
// Throws std::invalid_argument on malformed text.
Rational parse_rational(std::string_view text);

// Nearest rational with the given denominator.
Rational snap(double value, std::int64_t denominator);

}  // namespace find
