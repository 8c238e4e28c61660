#include "find/rational.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace find {

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(text.substr(0, slash), text);
    const auto den = parse_int(text.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool negative = text.front() == '-';
    std::string_view int_part = text.substr(negative || text.front() == '+' ? 1 : 0,
                                            dot - (negative || text.front() == '+' ? 1 : 0));
    std::string_view frac_part = text.substr(dot + 1);
    if (frac_part.size() > 12 || (int_part.empty() && frac_part.empty())) {
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    std::int64_t ip = int_part.empty() ? 0 : parse_int(int_part, text);
    std::int64_t fp = frac_part.empty() ? 0 : parse_int(frac_part, text);
    if (ip < 0 || fp < 0) throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    Rational r(ip * scale + fp, scale);
    return negative ? -r : r;
  }
  return Rational(parse_int(text.front() == '+' ? text.substr(1) : text, text));
}

Rational snap(double value, std::int64_t denominator) {
  return Rational(static_cast<std::int64_t>(std::llround(value * static_cast<double>(denominator))),
                  denominator);
}

}  // namespace find
