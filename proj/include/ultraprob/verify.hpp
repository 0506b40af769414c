#pragma once

// Randomized invariant suite: every law of the theory evaluated on seeded
// random instances, with brute-force oracles where a closed form is involved.

#include "ultraprob/expectation.hpp"
#include "ultraprob/prob_space.hpp"
#include "ultraprob/serialize.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ultraprob {

struct VerifyOptions {
    std::uint64_t seed = 42;
    /// Instances per prime.
    std::size_t instances = 200;
    std::vector<std::int64_t> primes{2, 3, 5};
    std::size_t max_outcomes = 16;
    int precision = 12;
    std::size_t max_horizon = 4;
    /// Random stopping times drawn per instance (constant times are always added).
    std::size_t stopping_times = 8;
    /// Replace the expectation radius by a deliberately wrong formula.
    bool mutate = false;
};

/// One seeded random instance. G is coarser than H; W is G-measurable.
struct Instance {
    std::uint64_t seed;
    std::int64_t p;
    int precision;
    SpacePtr space;
    RandomVariableK x, y, z, w;
    Partition g, h;
    RealVariable s1, s2;
    FiltrationPtr filtration;
    std::vector<StoppingTime> stopping;
    /// Two independent coordinates: xi depends only on the first, gi is generated by the second.
    ProductSpace product;
    RandomVariableK xi, yi;
    Partition gi;
    /// Small explicit balls for the enumeration oracles.
    std::vector<Ball> balls;
};

Instance make_instance(std::uint64_t seed, std::int64_t p, const VerifyOptions& options);

/// Replayable description of an instance.
Json to_json(const Instance& inst);

struct CheckTally {
    std::size_t passes = 0;
    std::size_t failures = 0;
    std::size_t skipped = 0;
};

struct FailureRecord {
    std::string check;
    std::string detail;
    std::uint64_t instance_seed = 0;
    std::int64_t p = 0;
    Json instance;
};

struct InstanceResult {
    std::uint64_t seed = 0;
    std::map<std::string, CheckTally> tallies;
    std::optional<FailureRecord> first_failure;
};

/// Runs every check on one instance.
InstanceResult check_instance(const Instance& inst, const VerifyOptions& options);

struct VerifyReport {
    std::map<std::string, CheckTally> checks;
    std::size_t passes = 0;
    std::size_t failures = 0;
    std::size_t skipped = 0;
    std::vector<std::uint64_t> seeds;
    std::optional<FailureRecord> first_failure;
    double seconds = 0;

    bool ok() const { return failures == 0; }
    Json to_json() const;
};

/// Per-instance seeds derived from the master seed, `instances` per prime.
std::vector<std::pair<std::uint64_t, std::int64_t>> instance_plan(const VerifyOptions& options);

/// Instances run in parallel; results are merged in plan order, so the
/// report does not depend on scheduling.
VerifyReport run_verify(const VerifyOptions& options);

namespace serial {
VerifyReport run_verify(const VerifyOptions& options);
}  // namespace serial

}  // namespace ultraprob
