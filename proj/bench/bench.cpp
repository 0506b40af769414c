// OpenMP kernels against their serial references.

#include "ultraprob/expectation.hpp"
#include "ultraprob/random.hpp"
#include "ultraprob/verify.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ultraprob;

namespace {

struct CondCase {
    RandomVariableK x;
    Partition g;
};

CondCase make_case(std::size_t atoms, std::size_t per_atom) {
    const auto space = FiniteProbSpace::uniform(atoms * per_atom);
    std::mt19937_64 rng(17);
    std::vector<PadicNumber> values;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < atoms * per_atom; ++i) {
        const auto a = static_cast<std::int64_t>(uniform_below(rng, 2001)) - 1000;
        const auto b = static_cast<std::int64_t>(uniform_below(rng, 50)) + 1;
        values.push_back(PadicNumber::from_rational(a, b, 3, 20));
        labels.push_back(i % atoms);
    }
    return {RandomVariableK(space, values), Partition::from_labels(space, labels)};
}

void BM_CondExpectation(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(cond_expectation(c.x, c.g));
}

void BM_CondExpectationSerial(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)), 64);
    for (auto _ : state) benchmark::DoNotOptimize(serial::cond_expectation(c.x, c.g));
}

VerifyOptions verify_options() {
    VerifyOptions o;
    o.instances = 20;
    return o;
}

void BM_Verify(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(run_verify(verify_options()));
}

void BM_VerifySerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::run_verify(verify_options()));
}

}  // namespace

BENCHMARK(BM_CondExpectation)->Arg(16)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CondExpectationSerial)->Arg(16)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Verify)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifySerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
