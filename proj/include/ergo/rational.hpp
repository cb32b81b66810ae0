// Exact rational scalar used throughout the finite-system code paths.
//
// Values are arbitrary-precision and always kept in canonical form
// (gcd-reduced, positive denominator), so equality is exact equality.
// Serialization is the "p/q" string convention; decimal rendering mimics
// printf "%.Ng" so exact and floating columns look alike in CSV output.

#ifndef ERGO_RATIONAL_HPP
#define ERGO_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ergo {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

inline Rational positive_part(const Rational& v) { return v > 0 ? v : Rational(0); }

inline Rational negative_part(const Rational& v) { return v < 0 ? Rational(-v) : Rational(0); }

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

/// Strict "p" / "p/q" parser (decimal digits, optional leading '-', q > 0).
inline Rational parse_rational(std::string_view text) {
  const auto fail = [&]() {
    throw std::invalid_argument("expected a rational \"p\" or \"p/q\", got '" +
                                std::string(text) + "'");
  };
  if (text.empty()) fail();
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '-') {
    negative = true;
    ++i;
  }
  const std::size_t num_begin = i;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
  if (i == num_begin) fail();
  BigInt num(std::string(text.substr(num_begin, i - num_begin)));
  BigInt den(1);
  if (i < text.size()) {
    if (text[i] != '/') fail();
    ++i;
    const std::size_t den_begin = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (i == den_begin || i != text.size()) fail();
    den = BigInt(std::string(text.substr(den_begin, i - den_begin)));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  }
  Rational r(num, den);
  return negative ? Rational(-r) : r;
}

/// Canonical "p" / "p/q" form; round-trips exactly through parse_rational.
inline std::string format_rational(const Rational& v) {
  const BigInt num = numerator(v);
  const BigInt den = denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

/// Exact decimal rendering with `significant` digits, matching the layout
/// and rounding of printf "%.<significant>g" (trailing zeros stripped,
/// scientific form when the exponent falls outside [-4, significant), ties
/// rounded to even). All integer arithmetic, so output is
/// platform-independent.
inline std::string to_decimal_string(const Rational& value, int significant = 12) {
  if (significant < 1) throw std::invalid_argument("significant digits must be >= 1");
  if (value == 0) return "0";
  const bool negative = value < 0;
  BigInt p = numerator(value);
  BigInt q = denominator(value);
  if (negative) p = -p;

  // Scale p/q into [1, 10) and record the decimal exponent.
  int exponent = 0;
  while (p >= q * 10) {
    q *= 10;
    ++exponent;
  }
  while (p < q) {
    p *= 10;
    --exponent;
  }

  BigInt scaled = p;
  for (int i = 1; i < significant; ++i) scaled *= 10;
  BigInt digits_int = scaled / q;
  const BigInt remainder = scaled % q;
  const BigInt doubled = 2 * remainder;
  if (doubled > q || (doubled == q && digits_int % 2 != 0)) ++digits_int;

  std::string digits = digits_int.str();
  if (static_cast<int>(digits.size()) > significant) {
    digits.pop_back();  // rounding carried 9.99... over to 10.0...
    ++exponent;
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out;
  if (exponent < -4 || exponent >= significant) {
    out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    out += 'e';
    out += exponent < 0 ? '-' : '+';
    std::string exp_digits = std::to_string(exponent < 0 ? -exponent : exponent);
    if (exp_digits.size() < 2) exp_digits.insert(exp_digits.begin(), '0');
    out += exp_digits;
  } else if (exponent >= 0) {
    if (static_cast<int>(digits.size()) <= exponent) {
      digits.append(static_cast<std::size_t>(exponent) + 1 - digits.size(), '0');
    }
    out = digits.substr(0, static_cast<std::size_t>(exponent) + 1);
    if (static_cast<int>(digits.size()) > exponent + 1) {
      out += "." + digits.substr(static_cast<std::size_t>(exponent) + 1);
    }
  } else {
    out = "0." + std::string(static_cast<std::size_t>(-exponent) - 1, '0') + digits;
  }
  return negative ? "-" + out : out;
}

}  // namespace ergo

#endif  // ERGO_RATIONAL_HPP
