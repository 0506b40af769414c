#include "ultraprob/prob_space.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace ultraprob;

namespace {

SpacePtr abc() { return FiniteProbSpace::uniform(std::vector<std::string>{"a", "b", "c"}); }

}  // namespace

TEST_SUITE("prob_space") {

TEST_CASE("space validation") {
    CHECK_THROWS_AS(FiniteProbSpace({"a", "b"}, {Rational(1, 2), Rational(1, 3)}), InvalidSpace);
    CHECK_THROWS_AS(FiniteProbSpace({"a", "b"}, {Rational(1), Rational(0)}), InvalidSpace);
    CHECK_THROWS_AS(FiniteProbSpace({"a", "a"}, {Rational(1, 2), Rational(1, 2)}), InvalidSpace);
    CHECK_THROWS_AS(FiniteProbSpace({}, {}), InvalidSpace);
    const auto s = FiniteProbSpace::uniform(4);
    CHECK(s->size() == 4);
    CHECK(s->ids()[3] == "w3");
    CHECK(s->prob(2) == Rational(1, 4));
    CHECK(s->index_of("w1") == 1);
    CHECK_THROWS_AS(s->index_of("zz"), InvalidSpace);
}

TEST_CASE("random variables share one context") {
    const auto s = abc();
    const auto one = PadicNumber::from_rational(1, 1, 5, 6);
    CHECK_THROWS_AS(RandomVariableK(s, {one, one}), InputError);
    CHECK_THROWS_AS(RandomVariableK(s, {one, one, PadicNumber::from_rational(1, 1, 3, 6)}), ContextMismatch);
    const auto x = RandomVariableK::constant(s, one);
    CHECK(x.size() == 3);
    CHECK((x + x)[0] == PadicNumber::from_rational(2, 1, 5, 6));
    CHECK_THROWS_AS(x + RandomVariableK::constant(FiniteProbSpace::uniform(3), one), SpaceMismatch);
    CHECK_THROWS_AS(RealVariable(s, {Rational(1), Rational(-1), Rational(0)}), InputError);
}

TEST_CASE("partition validation") {
    const auto s = abc();
    CHECK_THROWS_AS(Partition::from_ids(s, {{"a", "b"}}), InvalidPartition);
    CHECK_THROWS_AS(Partition::from_ids(s, {{"a", "b"}, {"b", "c"}}), InvalidPartition);
    CHECK_THROWS_AS(Partition::from_ids(s, {{"a", "b", "c"}, {}}), InvalidPartition);
    CHECK_THROWS_AS(Partition::from_ids(s, {{"a", "b"}, {"q"}}), InvalidSpace);
    // Canonical order: atoms sorted, so equality is set equality.
    CHECK(Partition::from_ids(s, {{"c"}, {"b", "a"}}) == Partition::from_ids(s, {{"a", "b"}, {"c"}}));
}

TEST_CASE("refine_check") {
    const auto s = abc();
    const auto ab_c = Partition::from_ids(s, {{"a", "b"}, {"c"}});
    const auto a_bc = Partition::from_ids(s, {{"a"}, {"b", "c"}});
    CHECK(refine_check(Partition::trivial(s), ab_c));
    CHECK(refine_check(ab_c, ab_c));
    CHECK_FALSE(refine_check(ab_c, a_bc));
    CHECK(refine_check(ab_c, Partition::discrete(s)));
    CHECK(common_refinement(ab_c, a_bc) == Partition::discrete(s));
    CHECK_THROWS_AS(refine_check(ab_c, Partition::trivial(FiniteProbSpace::uniform(3))), SpaceMismatch);
    CHECK(refine_check(ab_c, Partition::discrete(abc())));  // equal spaces compare by value
}

TEST_CASE("generated sigma-fields, measurability and independence") {
    const auto s = FiniteProbSpace::uniform(4);
    auto q = [](std::int64_t a) { return PadicNumber::from_rational(a, 1, 3, 6); };
    const RandomVariableK x(s, {q(1), q(1), q(2), q(2)});
    const RandomVariableK y(s, {q(5), q(7), q(5), q(7)});
    CHECK(generated_by({x}) == Partition::from_ids(s, {{"w0", "w1"}, {"w2", "w3"}}));
    CHECK(generated_by({x, y}) == Partition::discrete(s));
    CHECK(is_measurable(x, generated_by({x})));
    CHECK_FALSE(is_measurable(y, generated_by({x})));
    CHECK(is_independent(x, generated_by({y})));
    CHECK_FALSE(is_independent(x, generated_by({x})));
}

TEST_CASE("filtrations and stopping times") {
    const auto s = FiniteProbSpace::uniform(4);
    const auto f0 = Partition::trivial(s);
    const auto f1 = Partition::from_ids(s, {{"w0", "w1"}, {"w2", "w3"}});
    const auto f2 = Partition::discrete(s);
    CHECK_THROWS_AS(Filtration({f2, f1}), InvalidFiltration);
    CHECK_THROWS_AS(Filtration({}), InvalidFiltration);
    const auto f = std::make_shared<const Filtration>(std::vector<Partition>{f0, f1, f2});
    CHECK(f->horizon() == 2);

    for (std::size_t n = 0; n <= 2; ++n) CHECK(sigma_T(StoppingTime::constant(f, n)) == (*f)[n]);

    // Horizon everywhere except the atom {w0, w1} of F_1 stopped at time 1.
    const StoppingTime early(f, {1, 1, 2, 2});
    CHECK(sigma_T(early) == Partition::from_ids(s, {{"w0", "w1"}, {"w2"}, {"w3"}}));
    CHECK(refine_check(f0, sigma_T(early)));
    CHECK(refine_check(sigma_T(early), f2));
    CHECK(early.max_time() == 2);

    CHECK_THROWS_AS(StoppingTime(f, {0, 1, 1, 1}), InvalidStoppingTime);  // splits the trivial atom at 0
    CHECK_THROWS_AS(StoppingTime(f, {1, 2, 2, 2}), InvalidStoppingTime);  // splits {w0, w1} at 1
    CHECK_THROWS_AS(StoppingTime(f, {3, 3, 3, 3}), InvalidStoppingTime);
    CHECK_THROWS_AS(StoppingTime(f, {2, 2, 2}), InvalidStoppingTime);
}

TEST_CASE("haar samples") {
    const auto a = haar_sample(0, 5, 8, 50, 7);
    CHECK(a == haar_sample(0, 5, 8, 50, 7));
    CHECK(a != haar_sample(0, 5, 8, 50, 8));
    for (const auto& x : a) CHECK(abs(x) <= Magnitude::finite(0));
    for (const auto& x : haar_sample(2, 5, 8, 200, 1)) CHECK(abs(x) <= Magnitude::finite(2));
    for (const auto& x : haar_sample(-3, 3, 6, 200, 1)) CHECK(abs(x) <= Magnitude::finite(-3));
    CHECK(haar_sample(0, 5, 8, 0, 7).empty());
}

TEST_CASE("haar digits are uniform and projectively consistent") {
    constexpr std::size_t kCount = 10000;
    for (std::int64_t p : {2, 3, 5}) {
        const auto xs = haar_sample(1, p, 6, kCount, 2024);
        const double expected = static_cast<double>(kCount) / static_cast<double>(p);
        const double sigma = std::sqrt(kCount * (1.0 / p) * (1.0 - 1.0 / p));
        for (std::int64_t pos = 1; pos < 7; ++pos) {
            std::map<int, std::size_t> counts;
            for (const auto& x : xs) ++counts[x.digit(pos)];
            for (int d = 0; d < p; ++d) CHECK(std::abs(static_cast<double>(counts[d]) - expected) <= 5 * sigma);
        }
        // Truncating to two digits leaves the uniform law on (p Z_p) / (p^3 Z_p).
        std::map<std::pair<int, int>, std::size_t> pairs;
        for (const auto& x : xs) ++pairs[{x.truncated(3).digit(1), x.truncated(3).digit(2)}];
        const double e2 = static_cast<double>(kCount) / static_cast<double>(p * p);
        const double s2 = std::sqrt(kCount * (1.0 / (p * p)) * (1.0 - 1.0 / (p * p)));
        for (int d1 = 0; d1 < p; ++d1)
            for (int d2 = 0; d2 < p; ++d2) CHECK(std::abs(static_cast<double>(pairs[{d1, d2}]) - e2) <= 5 * s2);
    }
}

TEST_CASE("independent products") {
    const auto coin = FiniteProbSpace::uniform(std::vector<std::string>{"h", "t"});
    const auto single = independent_product({coin});
    CHECK(single.space->size() == 2);
    CHECK(single.space->probs() == coin->probs());
    const auto two = independent_product({coin, coin});
    CHECK(two.space->size() == 4);
    for (const auto& pr : two.space->probs()) CHECK(pr == Rational(1, 4));
    CHECK(two.space->ids()[1] == "h,t");
    auto q = [](std::int64_t a) { return PadicNumber::from_rational(a, 1, 5, 6); };
    const auto x = two.lift(0, RandomVariableK(coin, {q(0), q(1)}));
    const auto y = two.lift(1, RandomVariableK(coin, {q(2), q(3)}));
    CHECK(is_independent(x, generated_by({y})));
    CHECK(is_independent(y, generated_by({x})));
    CHECK(two.prefix_partition(0) == generated_by({x}));
    CHECK(two.prefix_partition(1) == Partition::discrete(two.space));
    const auto skewed = std::make_shared<const FiniteProbSpace>(std::vector<std::string>{"u", "v"},
                                                                std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
    const auto mixed = independent_product({skewed, coin});
    CHECK(mixed.space->prob(2) == Rational(1, 3));
}

}
