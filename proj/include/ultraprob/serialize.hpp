#pragma once

#include "ultraprob/expectation.hpp"
#include "ultraprob/martingale.hpp"
#include "ultraprob/padic.hpp"
#include "ultraprob/prob_space.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ultraprob {

using Json = nlohmann::json;

/// Accepts "a", "a/b" (exact rationals) and "p^v*u", "p^v", "<p>^v*u" (explicit form).
PadicNumber parse_padic(std::string_view text, std::int64_t p, int precision);

Json to_json(const PadicNumber& x);
Json to_json(const Ball& b);
Json to_json(const Magnitude& m);
/// [["a","b"],["c"]] by outcome id.
Json to_json(const Partition& g);
/// {"atoms":[{"atom":[ids], "ball":{...}}, ...]}
Json to_json(const BallField& field);

Partition partition_from_json(const SpacePtr& space, const Json& j);

/// A space file: outcomes plus named variables, partitions, a filtration and stopping times.
///
///   {"p":5, "precision":12,
///    "outcomes":[{"id":"a","prob":"1/2"}, ...],
///    "vars":{"X":{"a":"1/3", ...}},
///    "partitions":{"G":[["a","b"],["c"]]},
///    "filtration":["G", [["a"],["b"],["c"]]],
///    "stopping":{"T":{"a":0, ...}}}
struct SpaceDocument {
    std::int64_t p = 0;
    int precision = 0;
    SpacePtr space;
    std::map<std::string, RandomVariableK> vars;
    std::map<std::string, Partition> partitions;
    FiltrationPtr filtration;
    std::map<std::string, StoppingTime> stopping;

    const RandomVariableK& var(const std::string& name) const;
    /// A named partition, or the builtins "trivial" / "discrete".
    Partition partition(const std::string& name) const;
};

SpaceDocument parse_space_document(const Json& j);
Json to_json(const SpaceDocument& doc);

/// Reads and parses a JSON file; SchemaError on I/O or syntax problems.
Json load_json_file(const std::string& path);

/// One independent factor for the sum/product martingale drivers:
///   {"outcomes":[...], "values":{...}}  or
///   {"haar":{"k":1, "count":3, "seed":7, "offset":"1"}}  (uniform over the samples).
RandomVariableK factor_from_json(const Json& j, std::int64_t p, int precision);

struct ChainConfig {
    MarkovChain chain;
    std::vector<PadicNumber> f;
    std::size_t horizon = 0;
};

/// {"chain":{"states":[...], "P":[["1/2",...],...], "initial":[...]}, "f":{...}|[...], "horizon":N}
ChainConfig chain_from_json(const Json& j, std::int64_t p, int precision);

/// Stopping-time recipe for the martingale driver:
///   {"const":n} | {"first_small":e} (first n with |X_n| <= p^-e) | {"times":{"id":n,...}}
StoppingTime stopping_from_json(const Json& j, const Martingale& m);

}  // namespace ultraprob
