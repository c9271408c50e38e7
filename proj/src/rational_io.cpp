#include "dwass/rational.hpp"

#include <cctype>

namespace dwass {
namespace {

bool is_integer_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

[[noreturn]] void bad_token(std::string_view what, std::string_view token) {
  throw std::invalid_argument(std::string(what) + ": \"" + std::string(token) + "\"");
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_integer_token(text)) bad_token("malformed rational", text);
    return Rational(BigInt(std::string(text)));
  }
  const auto num = text.substr(0, slash);
  const auto den = text.substr(slash + 1);
  if (!is_integer_token(num) || !is_integer_token(den)) bad_token("malformed rational", text);
  BigInt d{std::string(den)};
  if (d == 0) bad_token("zero denominator", text);
  return Rational(BigInt(std::string(num)), d);
}

std::string rational_to_string(const Rational& value) {
  std::string s = numerator(value).str();
  if (denominator(value) != 1) {
    s += '/';
    s += denominator(value).str();
  }
  return s;
}

PointId parse_point(std::string_view text) {
  if (!is_integer_token(text) || text[0] == '-' || text[0] == '+') {
    bad_token("malformed point label", text);
  }
  PointId id{std::string(text)};
  if (id < 1) bad_token("point label must be >= 1", text);
  return id;
}

std::string point_to_string(const PointId& id) { return id.str(); }

}  // namespace dwass
