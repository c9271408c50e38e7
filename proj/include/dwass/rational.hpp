#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dwass {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Label of a ground-space point. Labels are positive integers; they are
/// arbitrary-precision because prime-power labels outgrow 64 bits quickly.
using PointId = BigInt;

/// Parses "n" or "n/d" (optionally signed) into an exact rational.
/// Throws std::invalid_argument naming the offending token.
Rational parse_rational(std::string_view text);

/// Canonical text form: "n" when the denominator is 1, else "n/d" reduced.
std::string rational_to_string(const Rational& value);

/// Parses a decimal point label; must be a positive integer.
PointId parse_point(std::string_view text);

std::string point_to_string(const PointId& id);

inline double rational_to_double(const Rational& value) {
  return value.convert_to<double>();
}

/// Numeric backend traits. The canonical backend is exact rational
/// arithmetic; the binary64 backend compares with absolute tolerance 1e-12
/// and exists for transcendental gauges that have no rational values.
template <class M>
struct mass_traits;

template <>
struct mass_traits<Rational> {
  static constexpr bool exact = true;
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static bool is_zero(const Rational& v) { return v.is_zero(); }
  static bool eq(const Rational& a, const Rational& b) { return a == b; }
  static bool leq(const Rational& a, const Rational& b) { return a <= b; }
  static double to_double(const Rational& v) { return rational_to_double(v); }
  static Rational from_rational(const Rational& v) { return v; }
  static const char* backend_name() { return "rational"; }
};

template <>
struct mass_traits<double> {
  static constexpr bool exact = false;
  static constexpr double tolerance = 1e-12;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool is_zero(double v) { return std::fabs(v) <= tolerance; }
  static bool eq(double a, double b) { return std::fabs(a - b) <= tolerance; }
  static bool leq(double a, double b) { return a <= b + tolerance; }
  static double to_double(double v) { return v; }
  static double from_rational(const Rational& v) { return rational_to_double(v); }
  static const char* backend_name() { return "float64"; }
};

}  // namespace dwass
