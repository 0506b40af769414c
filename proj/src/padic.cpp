#include "ultraprob/padic.hpp"

#include <algorithm>
#include <string>

namespace ultraprob {

namespace {

using u128 = unsigned __int128;

std::uint64_t pow_u64(std::int64_t p, std::int64_t e) {
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) r *= static_cast<std::uint64_t>(p);
    return r;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((u128(a) * b) % m);
}

// Inverse of a unit modulo m (m a prime power, gcd(a, m) = 1).
std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
    __int128 r0 = m, r1 = a % m;
    __int128 s0 = 0, s1 = 1;
    while (r1 != 0) {
        const __int128 q = r0 / r1;
        std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
        std::tie(s0, s1) = std::pair{s1, s0 - q * s1};
    }
    if (r0 != 1) throw InvariantViolation("invmod of a non-unit");
    __int128 r = s0 % static_cast<__int128>(m);
    if (r < 0) r += m;
    return static_cast<std::uint64_t>(r);
}

void require_same_context(const PadicNumber& x, const PadicNumber& y) {
    if (x.prime() != y.prime() || x.working_precision() != y.working_precision())
        throw ContextMismatch("operands from (p=" + std::to_string(x.prime()) + ", N=" +
                              std::to_string(x.working_precision()) + ") and (p=" +
                              std::to_string(y.prime()) + ", N=" +
                              std::to_string(y.working_precision()) + ")");
}

// Strips factors of p from a nonzero residue; returns the count.
int strip_p(std::uint64_t& s, std::int64_t p) {
    int t = 0;
    while (s % static_cast<std::uint64_t>(p) == 0) {
        s /= static_cast<std::uint64_t>(p);
        ++t;
    }
    return t;
}

}  // namespace

Rational Magnitude::to_rational(std::int64_t p) const {
    if (is_zero()) return Rational(0);
    return rational_pow(p, -exponent_);
}

std::string Magnitude::to_string() const {
    if (is_zero()) return "0";
    return "p^" + std::to_string(-exponent_);
}

bool is_prime(std::int64_t p) {
    if (p < 2) return false;
    for (std::int64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

void check_context(std::int64_t p, int precision) {
    if (!is_prime(p)) throw InvalidContext("p=" + std::to_string(p) + " is not prime");
    if (precision < 1) throw InvalidContext("precision must be positive");
    u128 m = 1;
    for (int i = 0; i < precision; ++i) {
        m *= static_cast<std::uint64_t>(p);
        if (m > PadicNumber::kMaxModulus)
            throw InvalidContext("p^N exceeds 2^62 for p=" + std::to_string(p) +
                                 ", N=" + std::to_string(precision));
    }
}

PadicNumber PadicNumber::zero(std::int64_t p, int precision) {
    check_context(p, precision);
    PadicNumber z;
    z.p_ = p;
    z.n_ = precision;
    return z;
}

PadicNumber PadicNumber::from_parts(std::int64_t p, int precision, std::int64_t valuation,
                                    std::uint64_t unit, int digits) {
    check_context(p, precision);
    if (digits < 0) digits = precision;
    if (digits < 1 || digits > precision) throw InputError("digit count outside [1, N]");
    const std::uint64_t m = pow_u64(p, digits);
    unit %= m;
    if (unit % static_cast<std::uint64_t>(p) == 0) throw InputError("mantissa must be a unit mod p");
    PadicNumber x;
    x.p_ = p;
    x.n_ = precision;
    x.zero_ = false;
    x.v_ = valuation;
    x.u_ = unit;
    x.digits_ = digits;
    return x;
}

PadicNumber PadicNumber::from_rational(const BigInt& a_in, const BigInt& b_in, std::int64_t p,
                                       int precision) {
    check_context(p, precision);
    if (b_in == 0) throw ZeroDenominator("from_rational with b = 0");
    if (a_in == 0) return zero(p, precision);
    BigInt a = a_in, b = b_in;
    std::int64_t s = 0;
    while (a % p == 0) {
        a /= p;
        ++s;
    }
    while (b % p == 0) {
        b /= p;
        --s;
    }
    const std::uint64_t m = pow_u64(p, precision);
    BigInt am = a % m;
    if (am < 0) am += m;
    BigInt bm = b % m;
    if (bm < 0) bm += m;
    const std::uint64_t u = mulmod(am.convert_to<std::uint64_t>(),
                                   invmod(bm.convert_to<std::uint64_t>(), m), m);
    return from_parts(p, precision, s, u, precision);
}

PadicNumber PadicNumber::from_rational(std::int64_t a, std::int64_t b, std::int64_t p, int precision) {
    return from_rational(BigInt(a), BigInt(b), p, precision);
}

PadicNumber PadicNumber::from_rational(const Rational& r, std::int64_t p, int precision) {
    return from_rational(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r), p,
                         precision);
}

std::optional<std::int64_t> PadicNumber::absolute_precision() const {
    if (zero_) return std::nullopt;
    return v_ + digits_;
}

int PadicNumber::digit(std::int64_t pos) const {
    if (zero_ || pos < v_) return 0;
    if (pos >= v_ + digits_)
        throw IndistinguishableAtPrecision("digit " + std::to_string(pos) + " not known");
    return static_cast<int>((u_ / pow_u64(p_, pos - v_)) % static_cast<std::uint64_t>(p_));
}

PadicNumber PadicNumber::truncated(std::int64_t k) const {
    if (zero_ || v_ >= k) return zero(p_, n_);
    if (k > v_ + digits_)
        throw IndistinguishableAtPrecision("cannot truncate at position " + std::to_string(k) +
                                           ": only " + std::to_string(v_ + digits_) +
                                           " positions known");
    PadicNumber t = *this;
    t.u_ = u_ % pow_u64(p_, k - v_);
    t.digits_ = n_;
    return t;
}

Rational PadicNumber::to_rational() const {
    if (zero_) return Rational(0);
    return rational_pow(p_, v_) * Rational(BigInt(u_));
}

PadicNumber add(const PadicNumber& x, const PadicNumber& y) {
    require_same_context(x, y);
    if (x.is_zero()) return y;
    if (y.is_zero()) return x;
    const std::int64_t p = x.prime();
    const std::int64_t ax = x.valuation() + x.digits();
    const std::int64_t ay = y.valuation() + y.digits();
    const std::int64_t a = std::min(ax, ay);
    const std::int64_t m = std::min(x.valuation(), y.valuation());
    // a - m <= max(digits) <= N, so the modulus fits.
    const std::int64_t width = a - m;
    const std::uint64_t mod = pow_u64(p, width);
    auto shifted = [&](const PadicNumber& z) -> std::uint64_t {
        const std::int64_t shift = z.valuation() - m;
        if (shift >= width) return 0;
        return mulmod(z.unit() % mod, pow_u64(p, shift), mod);
    };
    std::uint64_t s = shifted(x) + shifted(y);
    if (s >= mod) s -= mod;
    if (s == 0)
        throw PrecisionUnderflow("sum " + to_string(x) + " + " + to_string(y) +
                                 " cancels all known digits");
    const int t = strip_p(s, p);
    return PadicNumber::from_parts(p, x.working_precision(), m + t, s, static_cast<int>(width) - t);
}

PadicNumber neg(const PadicNumber& x) {
    if (x.is_zero()) return x;
    const std::uint64_t mod = pow_u64(x.prime(), x.digits());
    return PadicNumber::from_parts(x.prime(), x.working_precision(), x.valuation(), mod - x.unit(),
                                   x.digits());
}

PadicNumber sub(const PadicNumber& x, const PadicNumber& y) { return add(x, neg(y)); }

PadicNumber mul(const PadicNumber& x, const PadicNumber& y) {
    require_same_context(x, y);
    if (x.is_zero()) return x;
    if (y.is_zero()) return y;
    const int d = std::min(x.digits(), y.digits());
    const std::uint64_t mod = pow_u64(x.prime(), d);
    return PadicNumber::from_parts(x.prime(), x.working_precision(), x.valuation() + y.valuation(),
                                   mulmod(x.unit() % mod, y.unit() % mod, mod), d);
}

PadicNumber inv(const PadicNumber& x) {
    if (x.is_zero()) throw DivisionByZero("inverse of zero");
    const std::uint64_t mod = pow_u64(x.prime(), x.digits());
    return PadicNumber::from_parts(x.prime(), x.working_precision(), -x.valuation(),
                                   invmod(x.unit(), mod), x.digits());
}

PadicNumber div(const PadicNumber& x, const PadicNumber& y) { return mul(x, inv(y)); }

PadicNumber sum_truncated(const PadicNumber& x, const PadicNumber& y, std::int64_t k) {
    require_same_context(x, y);
    const PadicNumber xt = x.truncated(k);
    const PadicNumber yt = y.truncated(k);
    if (xt.is_zero()) return yt;
    if (yt.is_zero()) return xt;
    const std::int64_t p = x.prime();
    const std::int64_t m = std::min(xt.valuation(), yt.valuation());
    const std::int64_t width = k - m;
    const std::uint64_t mod = pow_u64(p, width);
    std::uint64_t s = mulmod(xt.unit(), pow_u64(p, xt.valuation() - m), mod) +
                      mulmod(yt.unit(), pow_u64(p, yt.valuation() - m), mod);
    if (s >= mod) s -= mod;
    if (s == 0) return PadicNumber::zero(p, x.working_precision());
    const int t = strip_p(s, p);
    return PadicNumber::from_parts(p, x.working_precision(), m + t, s, x.working_precision());
}

Magnitude abs(const PadicNumber& x) {
    if (x.is_zero()) return Magnitude::zero();
    return Magnitude::finite(x.valuation());
}

Magnitude dist(const PadicNumber& x, const PadicNumber& y) {
    require_same_context(x, y);
    if (x == y) return Magnitude::zero();
    try {
        return abs(sub(x, y));
    } catch (const PrecisionUnderflow&) {
        throw IndistinguishableAtPrecision(to_string(x) + " and " + to_string(y) +
                                           " agree on every known digit");
    }
}

std::string to_string(const PadicNumber& x) {
    if (x.is_zero()) return "0";
    return "p^" + std::to_string(x.valuation()) + "*" + std::to_string(x.unit());
}

Ball Ball::point(const PadicNumber& c) { return Ball(c, Magnitude::zero()); }

Ball Ball::around(const PadicNumber& x, Magnitude radius) {
    if (radius.is_zero()) return point(x);
    return Ball(x.truncated(radius.exponent()), radius);
}

bool Ball::contains(const PadicNumber& x) const {
    require_same_context(x, center_);
    if (is_point()) return dist(x, center_).is_zero();
    return x.truncated(radius_.exponent()) == center_;
}

const char* to_string(BallRelation r) {
    switch (r) {
        case BallRelation::Disjoint: return "Disjoint";
        case BallRelation::Equal: return "Equal";
        case BallRelation::FirstInsideSecond: return "FirstInsideSecond";
        case BallRelation::SecondInsideFirst: return "SecondInsideFirst";
    }
    return "?";
}

BallRelation ball_relation(const Ball& b, const Ball& c) {
    const Magnitude d = dist(b.center(), c.center());
    if (d > join(b.radius(), c.radius())) return BallRelation::Disjoint;
    const bool b_in_c = join(d, b.radius()) <= c.radius();
    const bool c_in_b = join(d, c.radius()) <= b.radius();
    if (b_in_c && c_in_b) return BallRelation::Equal;
    if (b_in_c) return BallRelation::FirstInsideSecond;
    if (c_in_b) return BallRelation::SecondInsideFirst;
    throw InvariantViolation("ball trichotomy not exhaustive");
}

Ball smallest_ball(std::span<const PadicNumber> points) {
    if (points.empty()) throw InputError("smallest_ball of an empty set");
    Magnitude radius = Magnitude::zero();
    for (const auto& x : points.subspan(1)) radius = join(radius, dist(points.front(), x));
    return Ball::around(points.front(), radius);
}

Ball ball_affine(const Ball& ball, const PadicNumber& k, const PadicNumber& b) {
    require_same_context(ball.center(), k);
    require_same_context(ball.center(), b);
    if (k.is_zero()) return Ball::point(b);
    const PadicNumber scaled = mul(k, ball.center());
    if (ball.is_point()) return Ball::point(add(scaled, b));
    const Magnitude radius = abs(k) * ball.radius();
    return Ball::around(sum_truncated(scaled, b, radius.exponent()), radius);
}

Ball ball_sum(const Ball& b, const Ball& c) {
    require_same_context(b.center(), c.center());
    const Magnitude radius = join(b.radius(), c.radius());
    if (radius.is_zero()) return Ball::point(add(b.center(), c.center()));
    return Ball::around(sum_truncated(b.center(), c.center(), radius.exponent()), radius);
}

Ball ball_product(const Ball& b, const Ball& c) {
    require_same_context(b.center(), c.center());
    const Magnitude radius = join(join(abs(b.center()) * c.radius(), abs(c.center()) * b.radius()),
                                  b.radius() * c.radius());
    return Ball::around(mul(b.center(), c.center()), radius);
}

Magnitude hausdorff_balls(const Ball& b, const Ball& c) {
    switch (ball_relation(b, c)) {
        case BallRelation::Equal: return Magnitude::zero();
        case BallRelation::FirstInsideSecond: return c.radius();
        case BallRelation::SecondInsideFirst: return b.radius();
        case BallRelation::Disjoint: return dist(b.center(), c.center());
    }
    throw InvariantViolation("unreachable ball relation");
}

}  // namespace ultraprob
