#include "ultraprob/expectation.hpp"
#include "ultraprob/oracle.hpp"
#include "ultraprob/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace ultraprob;

namespace {

PadicNumber q5(std::int64_t a, std::int64_t b = 1) { return PadicNumber::from_rational(a, b, 5, 8); }

// Omega = {alpha, beta, gamma}, X = (1, 0, 0), G generated by {alpha, beta} and {gamma}.
struct Fixture {
    SpacePtr space = FiniteProbSpace::uniform(std::vector<std::string>{"alpha", "beta", "gamma"});
    RandomVariableK x{space, {q5(1), q5(0), q5(0)}};
    Partition g = Partition::from_ids(space, {{"alpha", "beta"}, {"gamma"}});
};

}  // namespace

TEST_SUITE("expectation") {

TEST_CASE("sup norm and conditional ess sup") {
    const auto s2 = FiniteProbSpace::uniform(2);
    CHECK(linfty_norm(RandomVariableK(s2, {q5(5), q5(1)})) == Magnitude::finite(0));
    CHECK(linfty_norm(RandomVariableK(s2, {q5(1, 25), q5(1)})) == Magnitude::finite(-2));
    CHECK(linfty_norm(RandomVariableK::constant(s2, PadicNumber::zero(5, 8))).is_zero());

    const auto s3 = FiniteProbSpace::uniform(3);
    const Partition g = Partition::from_ids(s3, {{"w0", "w1"}, {"w2"}});
    const RealVariable s(s3, {Rational(3), Rational(1), Rational(2)});
    CHECK(cond_ess_sup(s, g) == RealVariable(s3, {Rational(3), Rational(3), Rational(2)}));
    CHECK(cond_ess_sup(s, Partition::trivial(s3)) == RealVariable(s3, {Rational(3), Rational(3), Rational(3)}));
    CHECK(cond_ess_sup(s, Partition::discrete(s3)) == s);

    const RandomVariableK x(s3, {q5(1), q5(5), q5(1, 5)});
    const auto norm = cond_linfty_norm(x, g);
    CHECK(norm[0] == Magnitude::finite(0));
    CHECK(norm[1] == Magnitude::finite(0));
    CHECK(norm[2] == Magnitude::finite(-1));
}

TEST_CASE("power means approach the conditional ess sup from below") {
    const auto s3 = FiniteProbSpace::uniform(3);
    const Partition g = Partition::from_ids(s3, {{"w0", "w1"}, {"w2"}});
    const RealVariable s(s3, {Rational(3), Rational(1), Rational(2)});
    const auto at16 = oracle_cond_ess_sup(s, g, 16);
    const auto at64 = oracle_cond_ess_sup(s, g, 64);
    const auto at1024 = oracle_cond_ess_sup(s, g, 1024);
    const long double exact[] = {3, 3, 2};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(at16[i] <= at64[i]);
        CHECK(at64[i] <= at1024[i]);
        CHECK(at1024[i] <= exact[i] * (1 + 1e-12L));
    }
    // The atom {w0, w1} puts half its mass on the maximum: E[S^q]^(1/q) >= 3 * (1/2)^(1/q).
    CHECK(at64[0] >= 3 * std::pow(0.5L, 1.0L / 64) * (1 - 1e-12L));
    CHECK(at64[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("expectation examples") {
    const auto s4 = FiniteProbSpace::uniform(4);
    const RandomVariableK x(s4, {q5(1), q5(2), q5(3), q5(4)});
    const Ball e = expectation(x);
    CHECK(e.radius() == Magnitude::finite(0));
    CHECK(e.center().is_zero());
    CHECK(epsilon(x) == Magnitude::finite(0));

    const Ball c = expectation(RandomVariableK::constant(s4, q5(7, 3)));
    CHECK(c.is_point());
    CHECK(c.center() == q5(7, 3));

    const RandomVariableK fine(s4, {q5(1), q5(6), q5(11), q5(26)});
    CHECK(expectation(fine) == Ball::around(q5(1), Magnitude::finite(1)));
    CHECK(epsilon(fine) == oracle_epsilon(fine));
    for (const auto& v : fine.values()) CHECK(expectation(fine).contains(v));
}

TEST_CASE("conditional expectation differs from projection") {
    const Fixture f;
    const BallField e = cond_expectation(f.x, f.g);
    REQUIRE(e.size() == 2);
    CHECK(e.ball(0) == Ball::around(q5(0), Magnitude::finite(0)));
    CHECK(e.ball(1) == Ball::point(q5(0)));
    CHECK(epsilon(f.x) == Magnitude::finite(0));
    const auto eps = cond_epsilon(f.x, f.g);
    CHECK(eps == MagnitudeVariable(f.space, {Magnitude::finite(0), Magnitude::finite(0), Magnitude::zero()}));
    CHECK(radii(e) == eps);
    CHECK(oracle_cond_expectation_minimality(f.x, f.g, e));

    // Any c with |c| <= 1 on {alpha, beta}; only d = 0 on {gamma}.
    for (std::int64_t c : {0, 1, 3, 7}) {
        const RandomVariableK y(f.space, {q5(c), q5(c), q5(0)});
        CHECK(member_of_cond_expectation(y, f.x, f.g));
        CHECK(oracle_projection_admits(f.x, f.g, y));
    }
    const RandomVariableK outside(f.space, {q5(1, 5), q5(1, 5), q5(0)});
    CHECK_FALSE(member_of_cond_expectation(outside, f.x, f.g));

    // A projection may also move gamma anywhere in Z_p; conditional expectation may not.
    for (std::int64_t d : {1, 2, 5}) {
        const RandomVariableK y(f.space, {q5(0), q5(0), q5(d)});
        CHECK(oracle_projection_admits(f.x, f.g, y));
        CHECK_FALSE(member_of_cond_expectation(y, f.x, f.g));
    }
    const BallField projection_like(f.g, {e.ball(0), Ball::around(q5(0), Magnitude::finite(0))});
    CHECK_FALSE(oracle_cond_expectation_minimality(f.x, f.g, projection_like));
}

TEST_CASE("membership requires measurability and every atom") {
    const auto s = FiniteProbSpace::uniform(4);
    const Partition g = Partition::from_ids(s, {{"w0", "w1"}, {"w2", "w3"}});
    const RandomVariableK x(s, {q5(1), q5(6), q5(2), q5(27)});
    const BallField e = cond_expectation(x, g);
    CHECK(e.ball(0) == Ball::around(q5(1), Magnitude::finite(1)));
    CHECK(e.ball(1) == Ball::around(q5(2), Magnitude::finite(2)));
    CHECK(member_of_cond_expectation(RandomVariableK(s, {q5(1), q5(1), q5(2), q5(2)}), x, g));
    CHECK(member_of_cond_expectation(RandomVariableK(s, {q5(11), q5(11), q5(52), q5(52)}), x, g));
    // Not G-measurable.
    CHECK_FALSE(member_of_cond_expectation(RandomVariableK(s, {q5(1), q5(6), q5(2), q5(2)}), x, g));
    // One atom pushed out of its ball.
    CHECK_FALSE(member_of_cond_expectation(RandomVariableK(s, {q5(1), q5(1), q5(7), q5(7)}), x, g));

    CHECK(cond_expectation(x, Partition::trivial(s)).ball(0) == expectation(x));
    const BallField d = cond_expectation(x, Partition::discrete(s));
    for (std::size_t i = 0; i < 4; ++i) CHECK(d.ball(i) == Ball::point(x[i]));
    CHECK_THROWS_AS(cond_expectation(x, Partition::trivial(FiniteProbSpace::uniform(2))), SpaceMismatch);
}

TEST_CASE("selection policies give members") {
    const auto s = FiniteProbSpace::uniform(6);
    const Partition g = Partition::from_ids(s, {{"w0", "w1", "w2"}, {"w3"}, {"w4", "w5"}});
    const RandomVariableK x(s, {q5(1), q5(2), q5(3), q5(4, 3), q5(10), q5(35)});
    const BallField e = cond_expectation(x, g);
    for (auto policy : kAllSelectionPolicies) {
        const auto y = select(e, x, policy, 9);
        CHECK(is_selection(y, e));
        CHECK(member_of_cond_expectation(y, x, g));
    }
    CHECK(select(e, x, SelectionPolicy::SupportPoint)[1] == x[0]);
    CHECK(select(e, x, SelectionPolicy::RandomMember, 3) == select(e, x, SelectionPolicy::RandomMember, 3));
    bool varied = false;
    for (std::uint64_t seed = 0; seed < 20 && !varied; ++seed)
        varied = select(e, x, SelectionPolicy::RandomMember, seed) != select(e, x, SelectionPolicy::RandomMember, 99);
    CHECK(varied);
    CHECK(to_string(SelectionPolicy::CanonicalCenter) == "canonical-center");
}

TEST_CASE("Hausdorff distance between ball fields") {
    const Fixture f;
    const BallField a(f.g, {Ball::around(q5(0), Magnitude::finite(0)), Ball::point(q5(0))});
    const BallField b(f.g, {Ball::around(q5(0), Magnitude::finite(1)), Ball::point(q5(0))});
    CHECK(hausdorff_ballfields(a, a).is_zero());
    CHECK(hausdorff_ballfields(a, b) == Magnitude::finite(0));
    CHECK(hausdorff_ballfields(b, a) == Magnitude::finite(0));
    CHECK(oracle_hausdorff_fields(a, b, 2) == Magnitude::finite(0));

    const BallField shifted(f.g, {Ball::around(q5(0), Magnitude::finite(1)), Ball::point(q5(1, 25))});
    CHECK(hausdorff_ballfields(b, shifted) == Magnitude::finite(-2));
    CHECK(oracle_hausdorff_fields(b, shifted, 2) == Magnitude::finite(-2));

    const BallField other(Partition::discrete(f.space), {Ball::point(q5(0)), Ball::point(q5(0)), Ball::point(q5(0))});
    CHECK_THROWS_AS(hausdorff_ballfields(a, other), PartitionMismatch);
    CHECK_THROWS_AS(BallField(f.g, {Ball::point(q5(0))}), InputError);
}

TEST_CASE("field arithmetic") {
    const Fixture f;
    const BallField e = cond_expectation(f.x, f.g);
    const BallField twice = minkowski_sum(e, e);
    CHECK(twice == e);  // Z_5 + Z_5 = Z_5, 0 + 0 = 0
    const RandomVariableK w(f.space, {q5(5), q5(5), q5(2)});
    const RandomVariableK b(f.space, {q5(1), q5(1), q5(3)});
    const BallField image = affine(e, w, b);
    CHECK(image.ball(0) == Ball::around(q5(1), Magnitude::finite(1)));
    CHECK(image.ball(1) == Ball::point(q5(3)));
    CHECK(image == cond_expectation(f.x * w + b, f.g));
    const RandomVariableK wild(f.space, {q5(5), q5(1), q5(2)});
    CHECK_THROWS_AS(affine(e, wild, b), InputError);
}

TEST_CASE("parallel and serial conditional expectation agree") {
    constexpr std::size_t kAtoms = 96;
    const auto s = FiniteProbSpace::uniform(3 * kAtoms);
    std::mt19937_64 rng(5);
    auto draw = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    };
    std::vector<PadicNumber> values;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 3 * kAtoms; ++i) {
        values.push_back(PadicNumber::from_rational(draw(-200, 200), draw(1, 40), 3, 10));
        labels.push_back(i % kAtoms);
    }
    const RandomVariableK x(s, values);
    const Partition g = Partition::from_labels(s, labels);
    REQUIRE(g.size() == kAtoms);
    CHECK(cond_expectation(x, g) == serial::cond_expectation(x, g));
    CHECK(cond_expectation(x, Partition::discrete(s)) == serial::cond_expectation(x, Partition::discrete(s)));
}

}
