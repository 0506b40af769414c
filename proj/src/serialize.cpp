#include "ultraprob/serialize.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace ultraprob {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::int64_t parse_int(const std::string& s, std::string_view whole) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (s.empty() || pos != s.size()) throw SchemaError("bad literal '" + std::string(whole) + "'");
    return v;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string as_string(const Json& j, const char* what) {
    if (!j.is_string()) throw SchemaError(std::string(what) + " must be a string");
    return j.get<std::string>();
}

std::int64_t as_int(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw SchemaError(std::string(what) + " must be an integer");
    return j.get<std::int64_t>();
}

std::size_t as_index(const Json& j, const char* what) {
    const std::int64_t v = as_int(j, what);
    if (v < 0) throw SchemaError(std::string(what) + " must be nonnegative");
    return static_cast<std::size_t>(v);
}

Rational as_rational(const Json& j, const char* what) {
    // Exact strings only: JSON numbers would already have been rounded.
    return parse_rational(as_string(j, what));
}

PadicNumber as_padic(const Json& j, std::int64_t p, int precision, const char* what) {
    return parse_padic(as_string(j, what), p, precision);
}

std::vector<std::vector<std::string>> id_atoms(const Json& j) {
    if (!j.is_array()) throw SchemaError("partition must be an array of atoms");
    std::vector<std::vector<std::string>> atoms;
    for (const auto& atom : j) {
        if (!atom.is_array()) throw SchemaError("partition atom must be an array of ids");
        std::vector<std::string> ids;
        for (const auto& id : atom) ids.push_back(as_string(id, "outcome id"));
        atoms.push_back(std::move(ids));
    }
    return atoms;
}

RandomVariableK variable_from_map(const SpacePtr& space, const Json& j, std::int64_t p, int precision,
                                  const std::string& name) {
    if (!j.is_object()) throw SchemaError("variable '" + name + "' must map outcome ids to values");
    std::vector<std::optional<PadicNumber>> slots(space->size());
    for (const auto& [id, value] : j.items()) {
        const std::size_t i = space->index_of(id);
        slots[i] = as_padic(value, p, precision, "variable value");
    }
    std::vector<PadicNumber> values;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) throw SchemaError("variable '" + name + "' has no value at '" + space->ids()[i] + "'");
        values.push_back(*slots[i]);
    }
    return RandomVariableK(space, std::move(values));
}

template <class F>
auto schema_guard(F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(e.what());
    }
}

}  // namespace

PadicNumber parse_padic(std::string_view text, std::int64_t p, int precision) {
    check_context(p, precision);
    const std::string s = trim(text);
    const std::size_t caret = s.find('^');
    if (caret == std::string::npos) return PadicNumber::from_rational(parse_rational(s), p, precision);

    std::string base = s.substr(0, caret);
    bool negative = false;
    if (!base.empty() && base.front() == '-') {
        negative = true;
        base.erase(0, 1);
    }
    if (base != "p" && base != std::to_string(p)) throw SchemaError("bad literal base in '" + s + "'");
    const std::string rest = s.substr(caret + 1);
    const std::size_t star = rest.find('*');
    const std::int64_t v = parse_int(trim(rest.substr(0, star)), s);
    BigInt unit = 1;
    if (star != std::string::npos) {
        const std::string u = trim(rest.substr(star + 1));
        if (u.empty() || u.find_first_not_of("0123456789") != std::string::npos)
            throw SchemaError("bad literal mantissa in '" + s + "'");
        unit = BigInt(u);
    }
    if (unit == 0) throw SchemaError("zero mantissa in '" + s + "'; write \"0\"");
    Rational value = Rational(unit) * rational_pow(p, v);
    if (negative) value = -value;
    return PadicNumber::from_rational(value, p, precision);
}

Json to_json(const PadicNumber& x) {
    Json j{{"value", to_string(x)}};
    j["valuation"] = x.is_zero() ? Json(nullptr) : Json(x.valuation());
    return j;
}

Json to_json(const Magnitude& m) { return m.to_string(); }

Json to_json(const Ball& b) {
    Json j{{"center", to_string(b.center())}, {"radius", b.radius().to_string()}};
    j["center_valuation"] = b.center().is_zero() ? Json(nullptr) : Json(b.center().valuation());
    return j;
}

Json to_json(const Partition& g) {
    Json atoms = Json::array();
    for (const auto& atom : g.atoms()) {
        Json ids = Json::array();
        for (std::size_t i : atom) ids.push_back(g.space()->ids()[i]);
        atoms.push_back(std::move(ids));
    }
    return atoms;
}

Json to_json(const BallField& field) {
    Json atoms = Json::array();
    const auto& g = field.partition();
    for (std::size_t a = 0; a < field.size(); ++a) {
        Json ids = Json::array();
        for (std::size_t i : g.atom(a)) ids.push_back(g.space()->ids()[i]);
        atoms.push_back({{"atom", std::move(ids)}, {"ball", to_json(field.ball(a))}});
    }
    return Json{{"atoms", std::move(atoms)}};
}

Partition partition_from_json(const SpacePtr& space, const Json& j) {
    return Partition::from_ids(space, id_atoms(j));
}

const RandomVariableK& SpaceDocument::var(const std::string& name) const {
    const auto it = vars.find(name);
    if (it == vars.end()) throw SchemaError("no variable named '" + name + "'");
    return it->second;
}

Partition SpaceDocument::partition(const std::string& name) const {
    const auto it = partitions.find(name);
    if (it != partitions.end()) return it->second;
    if (name == "trivial") return Partition::trivial(space);
    if (name == "discrete") return Partition::discrete(space);
    throw SchemaError("no partition named '" + name + "'");
}

SpaceDocument parse_space_document(const Json& j) {
    return schema_guard([&] {
        if (!j.is_object()) throw SchemaError("space document must be an object");
        SpaceDocument doc;
        doc.p = as_int(field(j, "p"), "p");
        doc.precision = static_cast<int>(as_int(field(j, "precision"), "precision"));
        check_context(doc.p, doc.precision);

        const Json& outcomes = field(j, "outcomes");
        if (!outcomes.is_array()) throw SchemaError("outcomes must be an array");
        std::vector<std::string> ids;
        std::vector<Rational> probs;
        for (const auto& o : outcomes) {
            ids.push_back(as_string(field(o, "id"), "outcome id"));
            probs.push_back(as_rational(field(o, "prob"), "prob"));
        }
        doc.space = std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));

        if (j.contains("vars")) {
            if (!j["vars"].is_object()) throw SchemaError("vars must be an object");
            for (const auto& [name, values] : j["vars"].items())
                doc.vars.emplace(name, variable_from_map(doc.space, values, doc.p, doc.precision, name));
        }
        if (j.contains("partitions")) {
            if (!j["partitions"].is_object()) throw SchemaError("partitions must be an object");
            for (const auto& [name, atoms] : j["partitions"].items())
                doc.partitions.emplace(name, partition_from_json(doc.space, atoms));
        }
        if (j.contains("filtration")) {
            if (!j["filtration"].is_array() || j["filtration"].empty())
                throw SchemaError("filtration must be a nonempty array");
            std::vector<Partition> steps;
            for (const auto& step : j["filtration"])
                steps.push_back(step.is_string() ? doc.partition(step.get<std::string>())
                                                 : partition_from_json(doc.space, step));
            doc.filtration = std::make_shared<const Filtration>(std::move(steps));
        }
        if (j.contains("stopping")) {
            if (!j["stopping"].is_object()) throw SchemaError("stopping must be an object");
            if (!doc.filtration) throw SchemaError("stopping times need a filtration");
            for (const auto& [name, map] : j["stopping"].items()) {
                if (!map.is_object()) throw SchemaError("stopping time '" + name + "' must map ids to times");
                std::vector<std::optional<std::size_t>> slots(doc.space->size());
                for (const auto& [id, t] : map.items()) slots[doc.space->index_of(id)] = as_index(t, "time");
                std::vector<std::size_t> times;
                for (std::size_t i = 0; i < slots.size(); ++i) {
                    if (!slots[i]) throw SchemaError("stopping time '" + name + "' missing '" + doc.space->ids()[i] + "'");
                    times.push_back(*slots[i]);
                }
                doc.stopping.emplace(name, StoppingTime(doc.filtration, std::move(times)));
            }
        }
        return doc;
    });
}

Json to_json(const SpaceDocument& doc) {
    Json j{{"p", doc.p}, {"precision", doc.precision}};
    Json outcomes = Json::array();
    for (std::size_t i = 0; i < doc.space->size(); ++i)
        outcomes.push_back({{"id", doc.space->ids()[i]}, {"prob", format_rational(doc.space->prob(i))}});
    j["outcomes"] = std::move(outcomes);
    Json vars = Json::object();
    for (const auto& [name, x] : doc.vars) {
        Json values = Json::object();
        for (std::size_t i = 0; i < x.size(); ++i) values[doc.space->ids()[i]] = to_string(x[i]);
        vars[name] = std::move(values);
    }
    j["vars"] = std::move(vars);
    Json partitions = Json::object();
    for (const auto& [name, g] : doc.partitions) partitions[name] = to_json(g);
    j["partitions"] = std::move(partitions);
    if (doc.filtration) {
        Json steps = Json::array();
        for (const auto& g : doc.filtration->steps()) steps.push_back(to_json(g));
        j["filtration"] = std::move(steps);
        Json stopping = Json::object();
        for (const auto& [name, t] : doc.stopping) {
            Json times = Json::object();
            for (std::size_t i = 0; i < doc.space->size(); ++i) times[doc.space->ids()[i]] = t[i];
            stopping[name] = std::move(times);
        }
        j["stopping"] = std::move(stopping);
    }
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("'" + path + "': " + e.what());
    }
}

RandomVariableK factor_from_json(const Json& j, std::int64_t p, int precision) {
    return schema_guard([&] {
        if (j.is_object() && j.contains("haar")) {
            const Json& h = j["haar"];
            const std::int64_t k = as_int(field(h, "k"), "haar.k");
            const std::size_t count = as_index(field(h, "count"), "haar.count");
            const std::uint64_t seed = h.contains("seed") ? as_index(h["seed"], "haar.seed") : 0;
            if (count == 0) throw SchemaError("haar.count must be positive");
            auto samples = haar_sample(k, p, precision, count, seed);
            if (h.contains("offset")) {
                const PadicNumber offset = as_padic(h["offset"], p, precision, "haar.offset");
                for (auto& s : samples) s = add(s, offset);
            }
            return RandomVariableK(FiniteProbSpace::uniform(count), std::move(samples));
        }
        const Json& outcomes = field(j, "outcomes");
        if (!outcomes.is_array() || outcomes.empty()) throw SchemaError("factor outcomes must be a nonempty array");
        std::vector<std::string> ids;
        std::vector<Rational> probs;
        for (const auto& o : outcomes) {
            if (o.is_string()) {
                ids.push_back(o.get<std::string>());
            } else {
                ids.push_back(as_string(field(o, "id"), "outcome id"));
                probs.push_back(as_rational(field(o, "prob"), "prob"));
            }
        }
        SpacePtr space;
        if (probs.empty()) {
            space = FiniteProbSpace::uniform(std::move(ids));
        } else {
            if (probs.size() != ids.size()) throw SchemaError("give a prob for every factor outcome or none");
            space = std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));
        }
        return variable_from_map(space, field(j, "values"), p, precision, "factor");
    });
}

ChainConfig chain_from_json(const Json& j, std::int64_t p, int precision) {
    return schema_guard([&] {
        const Json& c = field(j, "chain");
        ChainConfig cfg;
        for (const auto& s : field(c, "states")) cfg.chain.states.push_back(as_string(s, "state"));
        const Json& rows = field(c, "P");
        if (!rows.is_array()) throw SchemaError("P must be an array of rows");
        for (const auto& row : rows) {
            if (!row.is_array()) throw SchemaError("P row must be an array");
            std::vector<Rational> r;
            for (const auto& x : row) r.push_back(as_rational(x, "transition probability"));
            cfg.chain.transition.push_back(std::move(r));
        }
        if (c.contains("initial"))
            for (const auto& x : c["initial"]) cfg.chain.initial.push_back(as_rational(x, "initial probability"));
        cfg.chain.validate();

        const Json& f = field(j, "f");
        if (f.is_array()) {
            for (const auto& x : f) cfg.f.push_back(as_padic(x, p, precision, "f value"));
        } else if (f.is_object()) {
            for (const auto& s : cfg.chain.states) {
                if (!f.contains(s)) throw SchemaError("f has no value for state '" + s + "'");
                cfg.f.push_back(as_padic(f[s], p, precision, "f value"));
            }
        } else {
            throw SchemaError("f must be an array or an object keyed by state");
        }
        if (cfg.f.size() != cfg.chain.states.size()) throw SchemaError("f must give one value per state");
        cfg.horizon = as_index(field(j, "horizon"), "horizon");
        return cfg;
    });
}

StoppingTime stopping_from_json(const Json& j, const Martingale& m) {
    return schema_guard([&] {
        if (!j.is_object()) throw SchemaError("stopping rule must be an object");
        if (j.contains("const")) return StoppingTime::constant(m.filtration, as_index(j["const"], "const"));
        if (j.contains("first_small"))
            return first_small_time(m, Magnitude::finite(as_int(j["first_small"], "first_small")));
        if (j.contains("times")) {
            const auto& space = m.target.space();
            std::vector<std::optional<std::size_t>> slots(space->size());
            for (const auto& [id, t] : j["times"].items()) slots[space->index_of(id)] = as_index(t, "time");
            std::vector<std::size_t> times;
            for (std::size_t i = 0; i < slots.size(); ++i) {
                if (!slots[i]) throw SchemaError("stopping time missing '" + space->ids()[i] + "'");
                times.push_back(*slots[i]);
            }
            return StoppingTime(m.filtration, std::move(times));
        }
        throw SchemaError("stopping rule needs one of const, first_small, times");
    });
}

}  // namespace ultraprob
