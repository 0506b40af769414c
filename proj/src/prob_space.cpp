#include "ultraprob/prob_space.hpp"

#include "ultraprob/random.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace ultraprob {

FiniteProbSpace::FiniteProbSpace(std::vector<std::string> ids, std::vector<Rational> probs)
    : ids_(std::move(ids)), probs_(std::move(probs)) {
    if (ids_.empty()) throw InvalidSpace("no outcomes");
    if (ids_.size() != probs_.size()) throw InvalidSpace("one probability per outcome required");
    std::set<std::string> seen;
    Rational total = 0;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!seen.insert(ids_[i]).second) throw InvalidSpace("duplicate outcome id \"" + ids_[i] + "\"");
        if (probs_[i] <= 0)
            throw InvalidSpace("outcome \"" + ids_[i] + "\" has non-positive probability");
        total += probs_[i];
    }
    if (total != 1) throw InvalidSpace("probabilities sum to " + format_rational(total) + ", not 1");
}

std::shared_ptr<const FiniteProbSpace> FiniteProbSpace::uniform(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("w" + std::to_string(i));
    return uniform(std::move(ids));
}

std::shared_ptr<const FiniteProbSpace> FiniteProbSpace::uniform(std::vector<std::string> ids) {
    const std::size_t n = ids.size();
    if (n == 0) throw InvalidSpace("no outcomes");
    std::vector<Rational> probs(n, Rational(1, static_cast<long long>(n)));
    return std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));
}

std::size_t FiniteProbSpace::index_of(const std::string& id) const {
    const auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw InvalidSpace("unknown outcome id \"" + id + "\"");
    return static_cast<std::size_t>(it - ids_.begin());
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (a == b) return true;
    return a && b && *a == *b;
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
    if (!same_space(a, b)) throw SpaceMismatch(std::string(what) + ": operands live on different spaces");
}

RandomVariableK::RandomVariableK(SpacePtr space, std::vector<PadicNumber> values)
    : space_(std::move(space)), values_(std::move(values)) {
    if (!space_ || values_.size() != space_->size())
        throw InputError("random variable must assign one value per outcome");
    for (const auto& v : values_)
        if (v.prime() != values_.front().prime() ||
            v.working_precision() != values_.front().working_precision())
            throw ContextMismatch("random variable mixes p-adic contexts");
}

RandomVariableK RandomVariableK::constant(SpacePtr space, const PadicNumber& c) {
    const std::size_t n = space->size();
    return RandomVariableK(std::move(space), std::vector<PadicNumber>(n, c));
}

namespace {

template <class Op>
RandomVariableK pointwise(const RandomVariableK& x, const RandomVariableK& y, Op op, const char* what) {
    require_same_space(x.space(), y.space(), what);
    std::vector<PadicNumber> out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(op(x[i], y[i]));
    return RandomVariableK(x.space(), std::move(out));
}

}  // namespace

RandomVariableK operator+(const RandomVariableK& x, const RandomVariableK& y) {
    return pointwise(x, y, [](const auto& a, const auto& b) { return add(a, b); }, "X + Y");
}

RandomVariableK operator-(const RandomVariableK& x, const RandomVariableK& y) {
    return pointwise(x, y, [](const auto& a, const auto& b) { return sub(a, b); }, "X - Y");
}

RandomVariableK operator*(const RandomVariableK& x, const RandomVariableK& y) {
    return pointwise(x, y, [](const auto& a, const auto& b) { return mul(a, b); }, "X * Y");
}

RandomVariableK affine(const RandomVariableK& x, const PadicNumber& k, const PadicNumber& b) {
    std::vector<PadicNumber> out;
    out.reserve(x.size());
    for (const auto& v : x.values()) out.push_back(add(mul(k, v), b));
    return RandomVariableK(x.space(), std::move(out));
}

RealVariable to_real(const MagnitudeVariable& m, std::int64_t p) {
    std::vector<Rational> out;
    out.reserve(m.size());
    for (const auto& v : m.values()) out.push_back(v.to_rational(p));
    return RealVariable(m.space(), std::move(out));
}

Partition::Partition(SpacePtr space, std::vector<std::vector<std::size_t>> atoms)
    : space_(std::move(space)), atoms_(std::move(atoms)) {
    if (!space_) throw InvalidPartition("no space");
    const std::size_t n = space_->size();
    constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
    atom_of_.assign(n, unassigned);
    for (auto& atom : atoms_) {
        if (atom.empty()) throw InvalidPartition("empty atom");
        std::sort(atom.begin(), atom.end());
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
        for (std::size_t i : atoms_[a]) {
            if (i >= n) throw InvalidPartition("outcome index out of range");
            if (atom_of_[i] != unassigned)
                throw InvalidPartition("outcome \"" + space_->ids()[i] + "\" lies in two atoms");
            atom_of_[i] = a;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (atom_of_[i] == unassigned)
            throw InvalidPartition("outcome \"" + space_->ids()[i] + "\" is not covered");
}

Partition Partition::trivial(SpacePtr space) {
    std::vector<std::size_t> all(space->size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return Partition(std::move(space), {std::move(all)});
}

Partition Partition::discrete(SpacePtr space) {
    std::vector<std::vector<std::size_t>> atoms;
    for (std::size_t i = 0; i < space->size(); ++i) atoms.push_back({i});
    return Partition(std::move(space), std::move(atoms));
}

Partition Partition::from_ids(SpacePtr space, const std::vector<std::vector<std::string>>& atoms) {
    std::vector<std::vector<std::size_t>> idx;
    for (const auto& atom : atoms) {
        std::vector<std::size_t> a;
        for (const auto& id : atom) a.push_back(space->index_of(id));
        idx.push_back(std::move(a));
    }
    return Partition(std::move(space), std::move(idx));
}

Partition Partition::from_labels(SpacePtr space, const std::vector<std::size_t>& atom_label) {
    if (atom_label.size() != space->size()) throw InvalidPartition("one label per outcome required");
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < atom_label.size(); ++i) groups[atom_label[i]].push_back(i);
    std::vector<std::vector<std::size_t>> atoms;
    for (auto& [label, members] : groups) atoms.push_back(std::move(members));
    return Partition(std::move(space), std::move(atoms));
}

bool refine_check(const Partition& coarse, const Partition& fine) {
    require_same_space(coarse.space(), fine.space(), "refine_check");
    for (const auto& atom : fine.atoms())
        for (std::size_t i : atom)
            if (coarse.atom_of(i) != coarse.atom_of(atom.front())) return false;
    return true;
}

Partition common_refinement(const Partition& a, const Partition& b) {
    require_same_space(a.space(), b.space(), "common_refinement");
    std::vector<std::size_t> labels(a.space()->size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = a.atom_of(i) * b.size() + b.atom_of(i);
    return Partition::from_labels(a.space(), labels);
}

Partition generated_by(const std::vector<RandomVariableK>& vars) {
    if (vars.empty()) throw InputError("generated_by needs at least one variable");
    const SpacePtr& space = vars.front().space();
    for (const auto& v : vars) require_same_space(space, v.space(), "generated_by");
    const std::size_t n = space->size();
    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> representatives;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t label = representatives.size();
        for (std::size_t r = 0; r < representatives.size(); ++r) {
            const std::size_t j = representatives[r];
            const bool same = std::all_of(vars.begin(), vars.end(),
                                          [&](const RandomVariableK& v) { return v[i] == v[j]; });
            if (same) {
                label = r;
                break;
            }
        }
        if (label == representatives.size()) representatives.push_back(i);
        labels[i] = label;
    }
    return Partition::from_labels(space, labels);
}

bool is_measurable(const RandomVariableK& x, const Partition& g) {
    require_same_space(x.space(), g.space(), "is_measurable");
    for (const auto& atom : g.atoms())
        for (std::size_t i : atom)
            if (!(x[i] == x[atom.front()])) return false;
    return true;
}

bool is_independent(const RandomVariableK& x, const Partition& g) {
    require_same_space(x.space(), g.space(), "is_independent");
    const Partition level_sets = generated_by({x});
    const auto& probs = x.space()->probs();
    auto mass = [&](const std::vector<std::size_t>& set) {
        Rational m = 0;
        for (std::size_t i : set) m += probs[i];
        return m;
    };
    for (const auto& level : level_sets.atoms()) {
        const Rational pl = mass(level);
        for (std::size_t a = 0; a < g.size(); ++a) {
            Rational joint = 0;
            for (std::size_t i : level)
                if (g.atom_of(i) == a) joint += probs[i];
            if (joint != pl * mass(g.atom(a))) return false;
        }
    }
    return true;
}

Filtration::Filtration(std::vector<Partition> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw InvalidFiltration("a filtration needs at least one step");
    for (std::size_t n = 1; n < steps_.size(); ++n) {
        if (!same_space(steps_[n].space(), steps_[0].space()))
            throw InvalidFiltration("steps live on different spaces");
        if (!refine_check(steps_[n - 1], steps_[n]))
            throw InvalidFiltration("step " + std::to_string(n) + " does not refine step " +
                                    std::to_string(n - 1));
    }
}

StoppingTime::StoppingTime(FiltrationPtr filtration, std::vector<std::size_t> times)
    : filtration_(std::move(filtration)), times_(std::move(times)) {
    if (!filtration_) throw InvalidStoppingTime("no filtration");
    if (times_.size() != filtration_->space()->size())
        throw InvalidStoppingTime("one time per outcome required");
    for (std::size_t t : times_)
        if (t > filtration_->horizon())
            throw InvalidStoppingTime("time " + std::to_string(t) + " exceeds horizon " +
                                      std::to_string(filtration_->horizon()));
    for (std::size_t n = 0; n <= filtration_->horizon(); ++n) {
        for (const auto& atom : (*filtration_)[n].atoms()) {
            const bool first = times_[atom.front()] == n;
            for (std::size_t i : atom)
                if ((times_[i] == n) != first)
                    throw InvalidStoppingTime("{T=" + std::to_string(n) + "} splits an atom of F_" +
                                              std::to_string(n));
        }
    }
}

StoppingTime StoppingTime::constant(FiltrationPtr filtration, std::size_t n) {
    const std::size_t size = filtration->space()->size();
    return StoppingTime(std::move(filtration), std::vector<std::size_t>(size, n));
}

std::size_t StoppingTime::max_time() const { return *std::max_element(times_.begin(), times_.end()); }

Partition sigma_T(const StoppingTime& t) {
    const Filtration& f = *t.filtration();
    std::vector<std::vector<std::size_t>> atoms;
    for (std::size_t n = 0; n <= f.horizon(); ++n)
        for (const auto& atom : f[n].atoms())
            if (t[atom.front()] == n) atoms.push_back(atom);
    return Partition(f.space(), std::move(atoms));
}

std::vector<PadicNumber> haar_sample(std::int64_t k, std::int64_t p, int precision, std::size_t count,
                                     std::uint64_t seed) {
    check_context(p, precision);
    std::mt19937_64 engine(seed);
    const auto up = static_cast<std::uint64_t>(p);
    auto digit = [&] { return uniform_below(engine, up); };
    std::vector<PadicNumber> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        std::uint64_t m = 0, scale = 1;
        for (int i = 0; i < precision; ++i) {
            m += digit() * scale;
            scale *= up;
        }
        if (m == 0) {
            out.push_back(PadicNumber::zero(p, precision));
            continue;
        }
        std::int64_t t = 0;
        while (m % up == 0) {
            m /= up;
            ++t;
        }
        out.push_back(PadicNumber::from_parts(p, precision, k + t, m, precision));
    }
    return out;
}

RandomVariableK ProductSpace::lift(std::size_t i, const RandomVariableK& on_factor) const {
    require_same_space(factors.at(i), on_factor.space(), "ProductSpace::lift");
    std::vector<PadicNumber> out;
    out.reserve(space->size());
    for (std::size_t w = 0; w < space->size(); ++w) out.push_back(on_factor[coordinates[i][w]]);
    return RandomVariableK(space, std::move(out));
}

Partition ProductSpace::prefix_partition(std::size_t n) const {
    std::vector<std::size_t> labels(space->size(), 0);
    for (std::size_t w = 0; w < space->size(); ++w)
        for (std::size_t i = 0; i <= n && i < factors.size(); ++i)
            labels[w] = labels[w] * factors[i]->size() + coordinates[i][w];
    return Partition::from_labels(space, labels);
}

ProductSpace independent_product(const std::vector<SpacePtr>& spaces) {
    if (spaces.empty()) throw InputError("independent_product of no spaces");
    std::size_t total = 1;
    for (const auto& s : spaces) total *= s->size();
    ProductSpace prod;
    prod.factors = spaces;
    prod.coordinates.assign(spaces.size(), std::vector<std::size_t>(total));
    std::vector<std::string> ids(total);
    std::vector<Rational> probs(total, Rational(1));
    for (std::size_t w = 0; w < total; ++w) {
        std::size_t rest = w;
        for (std::size_t i = spaces.size(); i-- > 0;) {
            const std::size_t c = rest % spaces[i]->size();
            rest /= spaces[i]->size();
            prod.coordinates[i][w] = c;
            probs[w] *= spaces[i]->prob(c);
        }
        for (std::size_t i = 0; i < spaces.size(); ++i) {
            if (i) ids[w] += ",";
            ids[w] += spaces[i]->ids()[prod.coordinates[i][w]];
        }
    }
    prod.space = std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));
    return prod;
}

}  // namespace ultraprob
