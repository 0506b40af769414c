#include "ultraprob/expectation.hpp"
#include "ultraprob/oracle.hpp"

#include <doctest.h>

using namespace ultraprob;

namespace {

PadicNumber q3(std::int64_t a, std::int64_t b = 1) { return PadicNumber::from_rational(a, b, 3, 8); }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("brute-force spread") {
    const std::vector<PadicNumber> constant{q3(4), q3(4), q3(4)};
    CHECK(oracle_epsilon(constant).is_zero());
    const std::vector<PadicNumber> spread{q3(0), q3(9), q3(18)};
    CHECK(oracle_epsilon(spread) == Magnitude::finite(2));
    const std::vector<PadicNumber> mixed{q3(1, 3), q3(0)};
    CHECK(oracle_epsilon(mixed) == Magnitude::finite(-1));
    CHECK_THROWS_AS(oracle_epsilon(std::span<const PadicNumber>{}), InputError);
}

TEST_CASE("truncated members") {
    const Ball b = Ball::around(q3(1), Magnitude::finite(1));
    const auto members = truncated_members(b, 3);
    CHECK(members.size() == 9);
    for (const auto& m : members) CHECK(b.contains(m));
    CHECK(truncated_members(Ball::point(q3(5)), 3).size() == 1);
    CHECK_THROWS_AS(truncated_members(Ball::around(q3(0), Magnitude::finite(0)), 8, 100), InputError);
}

TEST_CASE("product hull and Hausdorff oracles") {
    const Ball z3 = Ball::around(q3(0), Magnitude::finite(0));
    const Ball three = Ball::around(q3(0), Magnitude::finite(1));
    CHECK(oracle_hausdorff(z3, three, 3) == Magnitude::finite(0));
    CHECK(oracle_hausdorff(three, three, 3).is_zero());
    const Ball near1 = Ball::around(q3(1), Magnitude::finite(2));
    const auto hull = oracle_product_hull(near1, near1, 4);
    CHECK(hull.radius == Magnitude::finite(2));
    CHECK(hull.radius == ball_product(near1, near1).radius());
}

TEST_CASE("conditional ess sup by power means") {
    const auto s = FiniteProbSpace::uniform(4);
    const RealVariable c(s, {Rational(2), Rational(2), Rational(2), Rational(2)});
    for (double v : oracle_cond_ess_sup(c, Partition::trivial(s), 64)) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
    const RealVariable r(s, {Rational(1), Rational(0), Rational(5, 2), Rational(1, 2)});
    const auto d = oracle_cond_ess_sup(r, Partition::discrete(s), 64);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(d[i] == doctest::Approx(static_cast<double>(r[i].convert_to<long double>())).epsilon(1e-12));
}

TEST_CASE("minimality and projection checks") {
    const auto s = FiniteProbSpace::uniform(3);
    const RandomVariableK x(s, {q3(0), q3(3), q3(7)});
    const Partition g = Partition::from_ids(s, {{"w0", "w1"}, {"w2"}});
    const BallField e = cond_expectation(x, g);
    CHECK(oracle_cond_expectation_minimality(x, g, e));
    const BallField looser(g, {Ball::around(q3(0), Magnitude::finite(0)), e.ball(1)});
    CHECK_FALSE(oracle_cond_expectation_minimality(x, g, looser));
    const BallField missing(g, {Ball::point(q3(0)), e.ball(1)});
    CHECK_FALSE(oracle_cond_expectation_minimality(x, g, missing));

    CHECK(oracle_projection_admits(x, g, RandomVariableK(s, {q3(0), q3(0), q3(7)})));
    CHECK(oracle_projection_admits(x, g, RandomVariableK(s, {q3(0), q3(0), q3(7 + 3)})));
    CHECK_FALSE(oracle_projection_admits(x, g, RandomVariableK(s, {q3(1), q3(1), q3(7)})));
    CHECK_FALSE(oracle_projection_admits(x, g, RandomVariableK(s, {q3(0), q3(3), q3(7)})));
}

}
