#include "ultraprob/rational.hpp"

#include "ultraprob/errors.hpp"

#include <cctype>

namespace ultraprob {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

BigInt parse_integer(std::string_view s, std::string_view whole) {
    s = trim(s);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) throw SchemaError("not a rational: \"" + std::string(whole) + "\"");
    BigInt value = 0;
    for (char ch : s) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw SchemaError("not a rational: \"" + std::string(whole) + "\"");
        value = value * 10 + (ch - '0');
    }
    return negative ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_integer(text, text));
    BigInt num = parse_integer(text.substr(0, slash), text);
    BigInt den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw ZeroDenominator("\"" + std::string(text) + "\"");
    return Rational(num, den);
}

std::string format_rational(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Rational rational_pow(std::int64_t base, std::int64_t exp) {
    BigInt magnitude = boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exp < 0 ? -exp : exp));
    if (exp >= 0) return Rational(magnitude);
    return Rational(BigInt(1), magnitude);
}

}  // namespace ultraprob
