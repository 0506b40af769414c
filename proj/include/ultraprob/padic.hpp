#pragma once

#include "ultraprob/errors.hpp"
#include "ultraprob/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ultraprob {

/// Exact absolute value in Q_p: either zero or p^(-exponent).
///
/// Ordered by the value it denotes, so Finite(1) < Finite(0) and Zero is the
/// minimum. Multiplication adds exponents.
class Magnitude {
public:
    constexpr Magnitude() = default;

    static constexpr Magnitude zero() { return Magnitude{}; }
    static constexpr Magnitude finite(std::int64_t exponent) {
        Magnitude m;
        m.finite_ = true;
        m.exponent_ = exponent;
        return m;
    }

    constexpr bool is_zero() const { return !finite_; }
    /// Valid only when !is_zero().
    constexpr std::int64_t exponent() const { return exponent_; }

    friend constexpr bool operator==(const Magnitude& a, const Magnitude& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.exponent_ == b.exponent_);
    }
    friend constexpr std::strong_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
        if (!a.finite_ || !b.finite_) return a.finite_ <=> b.finite_;
        return b.exponent_ <=> a.exponent_;
    }
    friend constexpr Magnitude operator*(const Magnitude& a, const Magnitude& b) {
        if (a.is_zero() || b.is_zero()) return zero();
        return finite(a.exponent_ + b.exponent_);
    }

    /// The real number p^(-exponent) (or 0) as an exact rational.
    Rational to_rational(std::int64_t p) const;
    /// "0" or "p^-e" (e.g. "p^0", "p^-2", "p^3").
    std::string to_string() const;

private:
    bool finite_ = false;
    std::int64_t exponent_ = 0;
};

constexpr Magnitude join(Magnitude a, Magnitude b) { return a < b ? b : a; }

/// Element of Q_p known to a fixed number of significant base-p digits.
///
/// A nonzero value is p^v * u where u is a unit modulo p^digits; digits never
/// exceeds the working precision N of the context (p, N). Exact zero is a
/// separate state with unbounded precision. Values are immutable.
class PadicNumber {
public:
    /// Largest p^N accepted for a context; keeps unit products inside 128 bits.
    static constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 62;

    static PadicNumber zero(std::int64_t p, int precision);
    static PadicNumber from_rational(std::int64_t a, std::int64_t b, std::int64_t p, int precision);
    static PadicNumber from_rational(const BigInt& a, const BigInt& b, std::int64_t p, int precision);
    static PadicNumber from_rational(const Rational& r, std::int64_t p, int precision);
    /// p^valuation * unit with `digits` significant digits (defaults to the working precision).
    static PadicNumber from_parts(std::int64_t p, int precision, std::int64_t valuation,
                                  std::uint64_t unit, int digits = -1);

    std::int64_t prime() const { return p_; }
    int working_precision() const { return n_; }
    bool is_zero() const { return zero_; }
    std::int64_t valuation() const { return v_; }
    std::uint64_t unit() const { return u_; }
    /// Significant digits known (relative precision).
    int digits() const { return digits_; }
    /// First digit position that is not known; nullopt for exact zero.
    std::optional<std::int64_t> absolute_precision() const;

    /// Base-p digit at position `pos`; throws IndistinguishableAtPrecision past the known digits.
    int digit(std::int64_t pos) const;

    /// The number with every digit at position >= k cleared (a finite expansion).
    PadicNumber truncated(std::int64_t k) const;

    /// Exact value of the represented digits as a rational.
    Rational to_rational() const;

    /// Same context and same stored digits.
    friend bool operator==(const PadicNumber&, const PadicNumber&) = default;

private:
    std::int64_t p_ = 2;
    int n_ = 1;
    bool zero_ = true;
    std::int64_t v_ = 0;
    std::uint64_t u_ = 0;
    int digits_ = 0;
};

/// Validates (p, N): p prime, N >= 1, p^N <= 2^62. Throws InvalidContext.
void check_context(std::int64_t p, int precision);
bool is_prime(std::int64_t p);

PadicNumber add(const PadicNumber& x, const PadicNumber& y);
PadicNumber neg(const PadicNumber& x);
PadicNumber sub(const PadicNumber& x, const PadicNumber& y);
PadicNumber mul(const PadicNumber& x, const PadicNumber& y);
PadicNumber inv(const PadicNumber& x);
PadicNumber div(const PadicNumber& x, const PadicNumber& y);

/// (x + y) with all digits at positions >= k cleared. Unlike add() this never
/// underflows: a sum that vanishes below k is exact zero. Both operands must
/// know their digits below k.
PadicNumber sum_truncated(const PadicNumber& x, const PadicNumber& y, std::int64_t k);

Magnitude abs(const PadicNumber& x);
/// |x - y|; Zero for identical representations, IndistinguishableAtPrecision
/// when distinct representations cancel to all known digits.
Magnitude dist(const PadicNumber& x, const PadicNumber& y);

/// "0" or "p^v*u".
std::string to_string(const PadicNumber& x);

/// Closed ball {x : |x - c| <= radius}. A zero radius is a single point.
///
/// For a finite radius p^-k the center has no digits at positions >= k, so two
/// balls are equal as sets iff their representations are equal.
class Ball {
public:
    static Ball point(const PadicNumber& c);
    /// Ball of the given radius containing x (canonicalizes the center).
    static Ball around(const PadicNumber& x, Magnitude radius);

    const PadicNumber& center() const { return center_; }
    Magnitude radius() const { return radius_; }
    bool is_point() const { return radius_.is_zero(); }
    std::int64_t prime() const { return center_.prime(); }
    int working_precision() const { return center_.working_precision(); }

    bool contains(const PadicNumber& x) const;

    friend bool operator==(const Ball&, const Ball&) = default;

private:
    Ball(PadicNumber c, Magnitude r) : center_(std::move(c)), radius_(r) {}
    PadicNumber center_;
    Magnitude radius_;
};

enum class BallRelation { Disjoint, Equal, FirstInsideSecond, SecondInsideFirst };

const char* to_string(BallRelation r);

BallRelation ball_relation(const Ball& b, const Ball& c);

/// Smallest closed ball containing every point. Throws InputError on empty input.
Ball smallest_ball(std::span<const PadicNumber> points);

/// Image of B under x -> kx + b.
Ball ball_affine(const Ball& ball, const PadicNumber& k, const PadicNumber& b);

/// Minkowski sum B + C, itself a ball.
Ball ball_sum(const Ball& b, const Ball& c);

/// Smallest ball containing {xy : x in B, y in C}.
Ball ball_product(const Ball& b, const Ball& c);

Magnitude hausdorff_balls(const Ball& b, const Ball& c);

}  // namespace ultraprob
