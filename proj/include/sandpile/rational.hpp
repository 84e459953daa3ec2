#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace sandpile {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q" or a bare integer "p". Throws ParseError on malformed input
/// or a zero denominator. The result is stored reduced (cpp_rational invariant).
Rational parse_rational(const std::string& text);

/// Renders a rational as "p/q", or just "p" when the denominator is 1.
std::string format_rational(const Rational& r);

double to_double(const Rational& r);

} // namespace sandpile
