#include "ultraprob/martingale.hpp"

#include <doctest.h>

using namespace ultraprob;

namespace {

PadicNumber qp(std::int64_t a, std::int64_t p = 5, std::int64_t b = 1) { return PadicNumber::from_rational(a, b, p, 10); }

std::int64_t pow5(int k) {
    std::int64_t r = 1;
    while (k-- > 0) r *= 5;
    return r;
}

RandomVariableK factor(const std::vector<std::int64_t>& values) {
    std::vector<PadicNumber> v;
    for (auto a : values) v.push_back(qp(a));
    return RandomVariableK(FiniteProbSpace::uniform(values.size()), v);
}

FiltrationPtr repeat(const Partition& g, std::size_t horizon) {
    return std::make_shared<const Filtration>(std::vector<Partition>(horizon + 1, g));
}

MarkovChain gambler() {
    return MarkovChain{{"a", "b", "c"},
                       {{Rational(1), Rational(0), Rational(0)},
                        {Rational(1, 2), Rational(0), Rational(1, 2)},
                        {Rational(0), Rational(0), Rational(1)}},
                       {}};
}

}  // namespace

TEST_SUITE("martingale") {

TEST_CASE("martingales from a target") {
    const auto s = FiniteProbSpace::uniform(4);
    const RandomVariableK x(s, {qp(1), qp(6), qp(11), qp(3)});
    const auto trivial = martingale_from_target(x, repeat(Partition::trivial(s), 2));
    for (const auto& xn : trivial.selections)
        CHECK(xn == RandomVariableK::constant(s, expectation(x).center()));
    CHECK(satisfies_definition(trivial));
    CHECK(one_step_recursion_holds(trivial));

    const auto discrete = martingale_from_target(x, repeat(Partition::discrete(s), 3));
    for (const auto& xn : discrete.selections) CHECK(xn == x);
    for (const auto& d : convergence_trace(discrete)) CHECK(d.is_zero());

    for (auto policy : kAllSelectionPolicies) {
        const auto m = martingale_from_target(
            x, std::make_shared<const Filtration>(std::vector<Partition>{
                   Partition::trivial(s), Partition::from_ids(s, {{"w0", "w1", "w2"}, {"w3"}}),
                   Partition::discrete(s)}),
            policy, 4);
        CHECK(satisfies_definition(m));
        CHECK(m.selections.back() == x);
    }
}

TEST_CASE("revealing digits one at a time converges at rate p^-(n+1)") {
    constexpr int kSteps = 6;
    const auto samples = haar_sample(0, 5, 8, 64, 11);
    const auto s = FiniteProbSpace::uniform(samples.size());
    const RandomVariableK x(s, samples);
    std::vector<Partition> steps;
    for (int n = 0; n < kSteps; ++n) {
        std::vector<PadicNumber> head;
        for (const auto& v : samples) head.push_back(v.truncated(n + 1));
        steps.push_back(generated_by({RandomVariableK(s, head)}));
    }
    const auto m = martingale_from_target(x, std::make_shared<const Filtration>(steps));
    CHECK(satisfies_definition(m));
    const auto trace = convergence_trace(m);
    for (int n = 0; n < kSteps; ++n) CHECK(trace[n] <= Magnitude::finite(n + 1));
}

TEST_CASE("constant selections need not follow the one-step recursion") {
    const auto s = FiniteProbSpace::uniform(2);
    const RandomVariableK x(s, {qp(0), qp(1)});
    const auto f = repeat(Partition::trivial(s), 1);
    // E[X] = Z_5 contains both constants, but E[X_1 | F_0] is the point 1.
    const Martingale m{f, x, {RandomVariableK::constant(s, qp(0)), RandomVariableK::constant(s, qp(1))}, "custom"};
    CHECK(satisfies_definition(m));
    CHECK_FALSE(one_step_recursion_holds(m));
    const Martingale flat{f, x, {RandomVariableK::constant(s, qp(3)), RandomVariableK::constant(s, qp(3))}, "custom"};
    CHECK(satisfies_definition(flat));
    CHECK(one_step_recursion_holds(flat));
}

TEST_CASE("sums of independent summands") {
    const auto single = sum_martingale({factor({0, 5, 10})});
    CHECK(single.horizon() == 0);
    CHECK(single.selections[0] == single.target);

    std::vector<RandomVariableK> ys;
    for (int k = 0; k < 4; ++k) ys.push_back(factor({0, pow5(k), 2 * pow5(k)}));
    const auto m = sum_martingale(ys);
    CHECK(m.target.size() == 81);
    CHECK(satisfies_definition(m));
    const auto trace = convergence_trace(m);
    REQUIRE(trace.size() == 4);
    for (int n = 0; n < 3; ++n) CHECK(trace[n] == Magnitude::finite(n + 1));
    CHECK(trace[3].is_zero());

    CHECK_THROWS_AS(sum_martingale({factor({1, 6}), factor({0, 5})}), ZeroNotInExpectation);
    CHECK_THROWS_AS(sum_martingale({}), InputError);
}

TEST_CASE("products of independent factors") {
    const auto ones = product_martingale({factor({1}), factor({1, 1}), factor({1})});
    for (const auto& d : convergence_trace(ones)) CHECK(d.is_zero());

    std::vector<RandomVariableK> ys;
    for (int k = 0; k < 3; ++k) ys.push_back(factor({1, 1 + pow5(k + 1), 1 + 3 * pow5(k + 1)}));
    const auto m = product_martingale(ys);
    CHECK(satisfies_definition(m));
    const auto trace = convergence_trace(m);
    for (int n = 0; n < 2; ++n) CHECK(trace[n] == Magnitude::finite(n + 2));
    CHECK(trace[2].is_zero());

    CHECK_THROWS_AS(product_martingale({factor({1}), factor({5, 10})}), OneNotInExpectation);
}

TEST_CASE("harmonic functions of a chain") {
    const auto chain = gambler();
    CHECK(harmonic_check({qp(0), qp(1), qp(2)}, chain.transition));
    CHECK_FALSE(harmonic_check({qp(0, 2), qp(1, 2), qp(2, 2)}, chain.transition));
    CHECK(harmonic_check({qp(0, 2), qp(0, 2), qp(4, 2)}, chain.transition));

    MarkovChain bad = chain;
    bad.transition[1][2] = Rational(1, 3);
    CHECK_THROWS_AS(bad.validate(), InvalidTransitionMatrix);
    bad = chain;
    bad.transition[0] = {Rational(2), Rational(-1), Rational(0)};
    CHECK_THROWS_AS(bad.validate(), InvalidTransitionMatrix);
    bad = chain;
    bad.initial = {Rational(1, 2), Rational(1, 2)};
    CHECK_THROWS_AS(bad.validate(), InvalidTransitionMatrix);
}

TEST_CASE("stopped chain martingales") {
    const auto chain = gambler();
    const std::vector<PadicNumber> f{qp(0), qp(1), qp(2)};
    const auto two = stopped_chain_martingale(chain, f, 2);
    CHECK(two.martingale.horizon() == 2);
    CHECK(satisfies_definition(two.martingale));
    CHECK(two.paths.size() == two.martingale.target.size());
    // From a: a-a-a; from b: b-a-a, b-c-c; from c: c-c-c.
    CHECK(two.paths.size() == 4);
    CHECK(two.martingale.target.space()->ids()[1] == "b-a-a");
    for (std::size_t w = 0; w < two.paths.size(); ++w)
        for (std::size_t n = 0; n <= 2; ++n) CHECK(two.martingale.selections[n][w] == f[two.paths[w][n]]);

    const auto zero = stopped_chain_martingale(chain, f, 0);
    CHECK(zero.martingale.horizon() == 0);
    CHECK(zero.martingale.selections[0] == zero.martingale.target);

    const std::vector<PadicNumber> f2{qp(0, 2), qp(1, 2), qp(2, 2)};
    CHECK_THROWS_AS(stopped_chain_martingale(chain, f2, 2), NotHarmonic);
}

TEST_CASE("optional sampling") {
    std::vector<RandomVariableK> ys;
    for (int k = 0; k < 3; ++k) ys.push_back(factor({0, pow5(k), 2 * pow5(k)}));
    const auto m = sum_martingale(ys);
    for (std::size_t n = 0; n <= m.horizon(); ++n)
        CHECK(optional_sample(m, StoppingTime::constant(m.filtration, n)) == m.selections[n]);

    const StoppingTime t = first_small_time(m, Magnitude::finite(1));
    CHECK(t.max_time() <= m.horizon());
    const auto sampled = optional_sample(m, t);
    for (std::size_t w = 0; w < sampled.size(); ++w) {
        if (t[w] < m.horizon()) CHECK(abs(sampled[w]) <= Magnitude::finite(1));
        CHECK(sampled[w] == m.selections[t[w]][w]);
    }
    CHECK(optional_sample(m, StoppingTime::constant(m.filtration, m.horizon())) == m.target);

    Martingale short_run = m;
    short_run.selections.pop_back();
    CHECK_THROWS_AS(optional_sample(short_run, StoppingTime::constant(m.filtration, 2)), HorizonExceeded);

    const auto other = std::make_shared<const Filtration>(
        std::vector<Partition>(3, Partition::discrete(m.target.space())));
    CHECK_THROWS_AS(optional_sample(m, StoppingTime::constant(other, 1)), InvalidStoppingTime);
}

}
