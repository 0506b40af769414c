#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace ultraprob {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses "a", "-a" or "a/b" (decimal integers, optional surrounding spaces).
// Throws SchemaError on anything else, ZeroDenominator when b == 0.
Rational parse_rational(std::string_view text);

// "a/b" in lowest terms, or "a" when the denominator is 1.
std::string format_rational(const Rational& r);

// Exact power base^exp for exp of either sign; base must be nonzero when exp < 0.
Rational rational_pow(std::int64_t base, std::int64_t exp);

}  // namespace ultraprob
