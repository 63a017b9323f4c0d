#include "binfilt/rational.hpp"

#include "binfilt/util.hpp"

#include <cmath>
#include <cstdlib>

namespace binfilt {

double to_double(const Rational& r) { return r.template convert_to<double>(); }

namespace {

double log2_bigint(const BigInt& n) {
    if (n <= 0) throw InvalidArgument("log2 of non-positive integer");
    std::size_t bits = boost::multiprecision::msb(n);
    if (bits <= 62) return std::log2(n.template convert_to<double>());
    // keep the top 53 bits as a double mantissa
    BigInt top = n >> (bits - 52);
    return static_cast<double>(bits - 52) + std::log2(top.template convert_to<double>());
}

}  // namespace

double log2_rational(const Rational& r) {
    if (r <= 0) throw InvalidArgument("log2 of non-positive rational");
    return log2_bigint(boost::multiprecision::numerator(r)) -
           log2_bigint(boost::multiprecision::denominator(r));
}

std::optional<Rational> exact_sqrt(const Rational& r) {
    if (r < 0) return std::nullopt;
    if (r == 0) return Rational(0);
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    BigInt sn = boost::multiprecision::sqrt(num);
    BigInt sd = boost::multiprecision::sqrt(den);
    if (sn * sn != num || sd * sd != den) return std::nullopt;
    return Rational(sn, sd);
}

Rational pow_rational(const Rational& base, long exponent) {
    if (exponent == 0) return Rational(1);
    Rational b = exponent > 0 ? base : Rational(1) / base;
    unsigned long e = static_cast<unsigned long>(exponent > 0 ? exponent : -exponent);
    Rational acc(1);
    while (e) {
        if (e & 1UL) acc *= b;
        b *= b;
        e >>= 1UL;
    }
    return acc;
}

namespace {

/// Decimal-digit string to integer; avoids the cpp_int constructor's
/// octal/hex prefix rules for strings with leading zeros.
BigInt parse_decimal_int(std::string text) {
    bool neg = false;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
        neg = text[0] == '-';
        text = text.substr(1);
    }
    if (text.empty()) throw InvalidArgument("empty integer literal");
    BigInt acc(0);
    for (char ch : text) {
        if (ch < '0' || ch > '9') throw InvalidArgument("bad digit in number: " + text);
        acc = acc * 10 + (ch - '0');
    }
    return neg ? -acc : acc;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num = parse_decimal_int(text.substr(0, slash));
        BigInt den = parse_decimal_int(text.substr(slash + 1));
        if (den == 0) throw InvalidArgument("rational with zero denominator: " + text);
        return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(parse_decimal_int(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    BigInt num = parse_decimal_int(digits);
    BigInt den(1);
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(num, den);
}

std::string rational_to_string(const Rational& r) {
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + den.str();
}

bool fits_double(const Rational& r) {
    double d = to_double(r);
    if (!std::isfinite(d)) return false;
    return Rational(d) == r;
}

}  // namespace binfilt
