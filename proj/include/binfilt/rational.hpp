#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace binfilt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

/// log2 of a positive rational, accurate to ~1e-15 even when the value itself
/// is far outside the double range (e.g. 2^-3000).
double log2_rational(const Rational& r);

/// Exact square root when numerator and denominator are perfect squares.
std::optional<Rational> exact_sqrt(const Rational& r);

Rational pow_rational(const Rational& base, long exponent);

/// Parses "p/q", "p" or a decimal string such as "0.25" (exact).
Rational parse_rational(const std::string& text);

std::string rational_to_string(const Rational& r);

/// True when the rational is exactly representable as a double.
bool fits_double(const Rational& r);

}  // namespace binfilt
