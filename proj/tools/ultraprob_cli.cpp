// ultraprob: expectation, conditional expectation, sampling, martingales and
// the invariant suite from the command line. Output is JSON (or CSV for
// traces); --pretty switches to plain text.

#include "ultraprob/expectation.hpp"
#include "ultraprob/martingale.hpp"
#include "ultraprob/serialize.hpp"
#include "ultraprob/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace ultraprob;

namespace {

enum Exit { kPass = 0, kInvariant = 1, kInput = 2, kPrecision = 3, kPrecondition = 4 };

bool g_pretty = false;

void emit(const Json& j) { std::cout << (g_pretty ? j.dump(2) : j.dump()) << "\n"; }

std::string ball_text(const Ball& b) {
    return "center " + to_string(b.center()) + ", radius " + b.radius().to_string();
}

int cmd_expect(const std::string& file, const std::string& var) {
    const SpaceDocument doc = parse_space_document(load_json_file(file));
    const RandomVariableK& x = doc.var(var);
    const Ball b = expectation(x);
    if (g_pretty) {
        std::cout << "E[" << var << "] = " << ball_text(b) << "\n"
                  << "eps(" << var << ") = " << b.radius().to_string() << "\n";
        return kPass;
    }
    emit({{"expectation", to_json(b)}, {"epsilon", b.radius().to_string()}});
    return kPass;
}

int cmd_condexpect(const std::string& file, const std::string& var, const std::string& partition) {
    const SpaceDocument doc = parse_space_document(load_json_file(file));
    const BallField field = cond_expectation(doc.var(var), doc.partition(partition));
    if (g_pretty) {
        const auto& g = field.partition();
        for (std::size_t a = 0; a < field.size(); ++a) {
            std::cout << "{";
            for (std::size_t i = 0; i < g.atom(a).size(); ++i)
                std::cout << (i ? "," : "") << g.space()->ids()[g.atom(a)[i]];
            std::cout << "}: " << ball_text(field.ball(a)) << "\n";
        }
        return kPass;
    }
    Json j = to_json(field);
    for (std::size_t a = 0; a < field.size(); ++a) j["atoms"][a]["epsilon"] = field.ball(a).radius().to_string();
    emit(j);
    return kPass;
}

int cmd_sample(std::int64_t p, std::int64_t k, int precision, std::size_t count, std::uint64_t seed) {
    for (const auto& x : haar_sample(k, p, precision, count, seed)) {
        if (g_pretty)
            std::cout << to_string(x) << "\n";
        else
            std::cout << to_json(x).dump() << "\n";
    }
    return kPass;
}

int cmd_mart(const std::string& kind, const std::string& file, const std::string& trace_path) {
    const Json cfg = load_json_file(file);
    std::int64_t p = 0;
    int precision = 0;
    try {
        p = cfg.at("p").get<std::int64_t>();
        precision = cfg.at("precision").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("config needs integer p and precision: ") + e.what());
    }
    check_context(p, precision);

    Martingale m = [&] {
        if (kind == "markov") {
            const ChainConfig chain = chain_from_json(cfg, p, precision);
            return stopped_chain_martingale(chain.chain, chain.f, chain.horizon).martingale;
        }
        if (!cfg.contains("factors") || !cfg["factors"].is_array() || cfg["factors"].empty())
            throw SchemaError("config needs a nonempty factors array");
        std::vector<RandomVariableK> ys;
        for (const auto& f : cfg["factors"]) ys.push_back(factor_from_json(f, p, precision));
        return kind == "sum" ? sum_martingale(ys) : product_martingale(ys);
    }();

    const auto trace = convergence_trace(m);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw SchemaError("cannot write '" + trace_path + "'");
        out << "n,norm\n";
        for (std::size_t n = 0; n < trace.size(); ++n) out << n << "," << trace[n].to_string() << "\n";
    }

    Json sampling = Json::object();
    if (cfg.contains("stopping")) {
        if (!cfg["stopping"].is_object()) throw SchemaError("stopping must be an object");
        for (const auto& [name, rule] : cfg["stopping"].items()) {
            const StoppingTime t = stopping_from_json(rule, m);
            optional_sample(m, t);  // throws InvariantViolation if X_T is not in E[X | F_T]
            sampling[name] = {{"max_time", t.max_time()}, {"holds", true}};
        }
    }
    const bool definition = satisfies_definition(m);

    if (g_pretty) {
        std::cout << kind << " martingale, horizon " << m.horizon() << ", " << m.target.size() << " outcomes\n";
        for (std::size_t n = 0; n < trace.size(); ++n)
            std::cout << "  n=" << n << "  ||X_n - X|| = " << trace[n].to_string() << "\n";
        std::cout << "X_n in E[X | F_n] for all n: " << (definition ? "yes" : "NO") << "\n";
        for (const auto& [name, r] : sampling.items()) std::cout << "optional sampling at " << name << ": holds\n";
    } else {
        for (std::size_t n = 0; n < trace.size(); ++n) std::cout << Json{{"n", n}, {"norm", trace[n].to_string()}}.dump() << "\n";
        std::cout << Json{{"kind", kind},
                          {"horizon", m.horizon()},
                          {"outcomes", m.target.size()},
                          {"definition", definition},
                          {"optional_sampling", sampling}}
                         .dump()
                  << "\n";
    }
    return definition ? kPass : kInvariant;
}

std::vector<std::int64_t> parse_primes(const std::string& list) {
    std::vector<std::int64_t> out;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoll(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SchemaError("bad prime '" + item + "' in --p-list");
        }
    }
    return out;
}

int cmd_verify(VerifyOptions options, const std::string& primes, bool serial_mode, std::int64_t replay_seed,
               std::int64_t replay_p) {
    options.primes = parse_primes(primes);
    if (replay_seed >= 0) {
        if (replay_p <= 0) throw SchemaError("--replay needs --replay-p");
        const Instance inst = make_instance(static_cast<std::uint64_t>(replay_seed), replay_p, options);
        const InstanceResult r = check_instance(inst, options);
        Json checks = Json::object();
        for (const auto& [name, t] : r.tallies)
            checks[name] = {{"passes", t.passes}, {"failures", t.failures}, {"skipped", t.skipped}};
        Json j{{"checks", checks}, {"instance", to_json(inst)}};
        j["first_failure"] = r.first_failure ? Json{{"check", r.first_failure->check}, {"detail", r.first_failure->detail}}
                                             : Json(nullptr);
        emit(j);
        return r.first_failure ? kInvariant : kPass;
    }
    const VerifyReport report = serial_mode ? serial::run_verify(options) : run_verify(options);
    if (g_pretty) {
        for (const auto& [name, t] : report.checks)
            std::cout << (t.failures ? "FAIL " : "ok   ") << name << "  passes " << t.passes << "  failures "
                      << t.failures << "  skipped " << t.skipped << "\n";
        std::cout << report.passes << " passes, " << report.failures << " failures, " << report.skipped
                  << " skipped over " << report.seeds.size() << " instances in " << report.seconds << " s\n";
        if (report.first_failure)
            std::cout << "first failure: " << report.first_failure->check << " (" << report.first_failure->detail
                      << ") at instance seed " << report.first_failure->instance_seed << ", p = "
                      << report.first_failure->p << "\n";
    } else {
        emit(report.to_json());
    }
    if (report.first_failure)
        std::cerr << "violated: " << report.first_failure->check << " (" << report.first_failure->detail << ")\n";
    return report.ok() ? kPass : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expectation, conditional expectation and martingales for Q_p-valued random variables"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--pretty", g_pretty, "Human-readable output instead of JSON");

    std::string file, var, partition, kind, trace_path;

    auto* expect = app.add_subcommand("expect", "Expectation ball and spread of a variable");
    expect->add_option("space", file, "Space JSON file")->required();
    expect->add_option("var", var, "Variable name")->required();

    auto* cond = app.add_subcommand("condexpect", "Conditional expectation ball field");
    cond->add_option("space", file, "Space JSON file")->required();
    cond->add_option("var", var, "Variable name")->required();
    cond->add_option("partition", partition, "Partition name, or trivial / discrete")->required();

    std::int64_t p = 0, k = 0;
    int precision = 0;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    auto* sample = app.add_subcommand("sample", "Haar samples from p^k Z_p as JSON lines");
    sample->add_option("--p", p, "Prime")->required();
    sample->add_option("--k", k, "Valuation floor")->required();
    sample->add_option("--precision", precision, "Digits per sample")->required();
    sample->add_option("--count", count, "Number of samples")->required();
    sample->add_option("--seed", seed, "Seed")->required();

    auto* mart = app.add_subcommand("mart", "Build a martingale, trace ||X_n - X|| and check optional sampling");
    mart->add_option("kind", kind, "sum | prod | markov")->required()->check(CLI::IsMember({"sum", "prod", "markov"}));
    mart->add_option("config", file, "Config JSON file")->required();
    mart->add_option("--trace", trace_path, "Write the trace as CSV (n,norm)");

    VerifyOptions options;
    std::string primes = "2,3,5";
    bool serial_mode = false;
    std::int64_t replay_seed = -1, replay_p = 0;
    auto* verify = app.add_subcommand("verify", "Run the invariant suite on seeded random instances");
    verify->add_option("--seed", options.seed, "Master seed");
    verify->add_option("--instances", options.instances, "Instances per prime");
    verify->add_option("--p-list", primes, "Comma-separated primes");
    verify->add_option("--max-outcomes", options.max_outcomes, "Largest outcome count");
    verify->add_option("--precision", options.precision, "Working precision N");
    verify->add_option("--max-horizon", options.max_horizon, "Largest filtration horizon");
    verify->add_flag("--mutate", options.mutate, "Use a deliberately wrong radius formula");
    verify->add_flag("--serial", serial_mode, "Single-threaded instance loop");
    verify->add_option("--replay", replay_seed, "Rerun one instance by its seed");
    verify->add_option("--replay-p", replay_p, "Prime of the replayed instance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInput;
    }

    try {
        if (*expect) return cmd_expect(file, var);
        if (*cond) return cmd_condexpect(file, var, partition);
        if (*sample) return cmd_sample(p, k, precision, count, seed);
        if (*mart) return cmd_mart(kind, file, trace_path);
        if (*verify) return cmd_verify(options, primes, serial_mode, replay_seed, replay_p);
    } catch (const InvariantViolation& e) {
        std::cerr << e.what() << "\n";
        return kInvariant;
    } catch (const PrecisionError& e) {
        std::cerr << e.what() << "\n";
        return kPrecision;
    } catch (const PreconditionError& e) {
        std::cerr << e.what() << "\n";
        return kPrecondition;
    } catch (const InputError& e) {
        std::cerr << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
