#include "ultraprob/expectation.hpp"

#include "ultraprob/random.hpp"

#include <exception>
#include <optional>
#include <random>

namespace ultraprob {

namespace {

std::vector<PadicNumber> values_on(const RandomVariableK& x, const std::vector<std::size_t>& atom) {
    std::vector<PadicNumber> out;
    out.reserve(atom.size());
    for (std::size_t i : atom) out.push_back(x[i]);
    return out;
}

void require_measurable(const RandomVariableK& w, const Partition& g, const char* what) {
    if (!is_measurable(w, g)) throw InputError(std::string(what) + " must be measurable for the partition");
}

// Atom count below which the parallel kernel runs serially.
constexpr std::size_t kParallelAtomThreshold = 64;

}  // namespace

BallField::BallField(Partition partition, std::vector<Ball> balls)
    : partition_(std::move(partition)), balls_(std::move(balls)) {
    if (balls_.size() != partition_.size()) throw InputError("ball field needs one ball per atom");
    for (const auto& b : balls_)
        if (b.prime() != balls_.front().prime() ||
            b.working_precision() != balls_.front().working_precision())
            throw ContextMismatch("ball field mixes p-adic contexts");
}

Magnitude linfty_norm(const RandomVariableK& x) {
    Magnitude m = Magnitude::zero();
    for (const auto& v : x.values()) m = join(m, ultraprob::abs(v));
    return m;
}

MagnitudeVariable abs(const RandomVariableK& x) {
    std::vector<Magnitude> out;
    out.reserve(x.size());
    for (const auto& v : x.values()) out.push_back(ultraprob::abs(v));
    return MagnitudeVariable(x.space(), std::move(out));
}

MagnitudeVariable cond_linfty_norm(const RandomVariableK& x, const Partition& g) {
    return cond_ess_sup(abs(x), g);
}

Ball expectation(const RandomVariableK& x) { return smallest_ball(x.values()); }

Magnitude epsilon(const RandomVariableK& x) { return expectation(x).radius(); }

BallField serial::cond_expectation(const RandomVariableK& x, const Partition& g) {
    require_same_space(x.space(), g.space(), "cond_expectation");
    std::vector<Ball> balls;
    balls.reserve(g.size());
    for (const auto& atom : g.atoms()) balls.push_back(smallest_ball(values_on(x, atom)));
    return BallField(g, std::move(balls));
}

BallField cond_expectation(const RandomVariableK& x, const Partition& g) {
    if (g.size() < kParallelAtomThreshold) return serial::cond_expectation(x, g);
    require_same_space(x.space(), g.space(), "cond_expectation");
    const auto atoms = static_cast<std::int64_t>(g.size());
    std::vector<std::optional<Ball>> slots(g.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::int64_t a = 0; a < atoms; ++a) {
        try {
            slots[a] = smallest_ball(values_on(x, g.atom(a)));
        } catch (...) {
#pragma omp critical(ultraprob_cond_expectation)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<Ball> balls;
    balls.reserve(slots.size());
    for (auto& s : slots) balls.push_back(std::move(*s));
    return BallField(g, std::move(balls));
}

MagnitudeVariable radii(const BallField& field) {
    const Partition& g = field.partition();
    std::vector<Magnitude> out(g.space()->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = field.ball_at(i).radius();
    return MagnitudeVariable(g.space(), std::move(out));
}

MagnitudeVariable cond_epsilon(const RandomVariableK& x, const Partition& g) {
    return radii(cond_expectation(x, g));
}

bool is_selection(const RandomVariableK& y, const BallField& field) {
    const Partition& g = field.partition();
    if (!is_measurable(y, g)) return false;
    for (std::size_t a = 0; a < g.size(); ++a)
        if (!field.ball(a).contains(y[g.atom(a).front()])) return false;
    return true;
}

bool member_of_cond_expectation(const RandomVariableK& y, const RandomVariableK& x, const Partition& g) {
    require_same_space(y.space(), x.space(), "member_of_cond_expectation");
    return is_selection(y, cond_expectation(x, g));
}

Magnitude hausdorff_ballfields(const BallField& f1, const BallField& f2) {
    if (!(f1.partition() == f2.partition()))
        throw PartitionMismatch("ball fields are indexed by different partitions");
    Magnitude d = Magnitude::zero();
    for (std::size_t a = 0; a < f1.size(); ++a) d = join(d, hausdorff_balls(f1.ball(a), f2.ball(a)));
    return d;
}

BallField minkowski_sum(const BallField& f1, const BallField& f2) {
    if (!(f1.partition() == f2.partition()))
        throw PartitionMismatch("ball fields are indexed by different partitions");
    std::vector<Ball> balls;
    balls.reserve(f1.size());
    for (std::size_t a = 0; a < f1.size(); ++a) balls.push_back(ball_sum(f1.ball(a), f2.ball(a)));
    return BallField(f1.partition(), std::move(balls));
}

BallField affine(const BallField& field, const RandomVariableK& w, const RandomVariableK& b) {
    const Partition& g = field.partition();
    require_measurable(w, g, "multiplier");
    require_measurable(b, g, "offset");
    std::vector<Ball> balls;
    balls.reserve(field.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
        const std::size_t rep = g.atom(a).front();
        balls.push_back(ball_affine(field.ball(a), w[rep], b[rep]));
    }
    return BallField(g, std::move(balls));
}

std::string_view to_string(SelectionPolicy policy) {
    switch (policy) {
        case SelectionPolicy::CanonicalCenter: return "canonical-center";
        case SelectionPolicy::SupportPoint: return "support-point";
        case SelectionPolicy::RandomMember: return "random-member";
    }
    return "?";
}

namespace {

PadicNumber random_member(const Ball& ball, std::mt19937_64& engine) {
    const PadicNumber& c = ball.center();
    if (ball.is_point()) return c;
    const std::int64_t p = c.prime();
    const int n = c.working_precision();
    const std::int64_t k = ball.radius().exponent();
    // Free digit positions k .. top-1; the center fixes everything below k.
    const std::int64_t top = c.is_zero() ? k + n : c.valuation() + n;
    std::uint64_t m = 0, scale = 1;
    for (std::int64_t pos = k; pos < top; ++pos) {
        m += uniform_below(engine, static_cast<std::uint64_t>(p)) * scale;
        scale *= static_cast<std::uint64_t>(p);
    }
    if (m == 0) return c;
    std::int64_t t = 0;
    while (m % static_cast<std::uint64_t>(p) == 0) {
        m /= static_cast<std::uint64_t>(p);
        ++t;
    }
    return add(c, PadicNumber::from_parts(p, n, k + t, m));
}

}  // namespace

RandomVariableK select(const BallField& field, const RandomVariableK& x, SelectionPolicy policy,
                       std::uint64_t seed) {
    const Partition& g = field.partition();
    require_same_space(x.space(), g.space(), "select");
    std::mt19937_64 engine(seed);
    std::vector<PadicNumber> per_atom;
    per_atom.reserve(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
        switch (policy) {
            case SelectionPolicy::CanonicalCenter: per_atom.push_back(field.ball(a).center()); break;
            case SelectionPolicy::SupportPoint: per_atom.push_back(x[g.atom(a).front()]); break;
            case SelectionPolicy::RandomMember: per_atom.push_back(random_member(field.ball(a), engine)); break;
        }
    }
    std::vector<PadicNumber> out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(per_atom[g.atom_of(i)]);
    return RandomVariableK(x.space(), std::move(out));
}

}  // namespace ultraprob
