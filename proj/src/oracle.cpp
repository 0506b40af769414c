#include "ultraprob/oracle.hpp"

#include "ultraprob/expectation.hpp"

#include <cmath>

namespace ultraprob {

namespace {

Magnitude max_dist(std::span<const PadicNumber> values, const PadicNumber& c) {
    Magnitude m = Magnitude::zero();
    for (const auto& x : values) m = join(m, dist(x, c));
    return m;
}

std::vector<PadicNumber> values_on(const RandomVariableK& x, const std::vector<std::size_t>& atom) {
    std::vector<PadicNumber> out;
    for (std::size_t i : atom) out.push_back(x[i]);
    return out;
}

std::uint64_t checked_pow(std::int64_t p, std::int64_t e, std::size_t limit) {
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) {
        r *= static_cast<std::uint64_t>(p);
        if (r > limit) throw InputError("oracle enumeration exceeds " + std::to_string(limit) + " members");
    }
    return r;
}

// Directed Hausdorff distance sup_a inf_b |a - b|.
Magnitude directed(const std::vector<PadicNumber>& from, const std::vector<PadicNumber>& to) {
    Magnitude worst = Magnitude::zero();
    for (const auto& a : from) {
        Magnitude best = dist(a, to.front());
        for (const auto& b : to) {
            if (best.is_zero()) break;
            const Magnitude d = dist(a, b);
            if (d < best) best = d;
        }
        worst = join(worst, best);
    }
    return worst;
}

}  // namespace

Magnitude oracle_epsilon(std::span<const PadicNumber> values) {
    if (values.empty()) throw InputError("oracle_epsilon of an empty support");
    Magnitude best = max_dist(values, values.front());
    for (const auto& c : values) {
        const Magnitude m = max_dist(values, c);
        if (m < best) best = m;
    }
    return best;
}

Magnitude oracle_epsilon(const RandomVariableK& x) { return oracle_epsilon(x.values()); }

std::vector<long double> oracle_cond_ess_sup(const RealVariable& s, const Partition& g, double q_max) {
    require_same_space(s.space(), g.space(), "oracle_cond_ess_sup");
    const auto& probs = s.space()->probs();
    const long double q = q_max;
    std::vector<long double> out(s.size());
    for (const auto& atom : g.atoms()) {
        long double mass = 0, moment = 0;
        for (std::size_t i : atom) {
            const auto w = probs[i].convert_to<long double>();
            mass += w;
            moment += w * std::pow(s[i].convert_to<long double>(), q);
        }
        const long double value = std::pow(moment / mass, 1.0L / q);
        for (std::size_t i : atom) out[i] = value;
    }
    return out;
}

std::vector<PadicNumber> truncated_members(const Ball& b, std::int64_t depth, std::size_t limit) {
    if (b.is_point()) return {b.center()};
    const PadicNumber& c = b.center();
    const std::int64_t p = c.prime();
    const int n = c.working_precision();
    const std::int64_t k = b.radius().exponent();
    if (depth <= k) return {c};
    if (!c.is_zero() && depth > c.valuation() + n)
        throw InputError("depth " + std::to_string(depth) + " exceeds the center's known digits");
    if (depth - k > n) throw InputError("depth too far below the radius for the working precision");
    const std::uint64_t count = checked_pow(p, depth - k, limit);
    std::vector<PadicNumber> out;
    out.reserve(count);
    for (std::uint64_t m = 0; m < count; ++m) {
        if (m == 0) {
            out.push_back(c.truncated(depth));
            continue;
        }
        std::uint64_t unit = m;
        std::int64_t t = 0;
        while (unit % static_cast<std::uint64_t>(p) == 0) {
            unit /= static_cast<std::uint64_t>(p);
            ++t;
        }
        out.push_back(add(c, PadicNumber::from_parts(p, n, k + t, unit)).truncated(depth));
    }
    return out;
}

Magnitude oracle_hausdorff(const Ball& b, const Ball& c, std::int64_t depth) {
    const auto mb = truncated_members(b, depth);
    const auto mc = truncated_members(c, depth);
    return join(directed(mb, mc), directed(mc, mb));
}

Magnitude oracle_hausdorff_fields(const BallField& f1, const BallField& f2, std::int64_t depth) {
    if (!(f1.partition() == f2.partition())) throw PartitionMismatch("oracle_hausdorff_fields");
    constexpr std::size_t kLimit = 20000;
    const std::size_t atoms = f1.size();
    std::vector<std::vector<PadicNumber>> m1, m2;
    std::size_t n1 = 1, n2 = 1;
    for (std::size_t a = 0; a < atoms; ++a) {
        m1.push_back(truncated_members(f1.ball(a), depth, kLimit));
        m2.push_back(truncated_members(f2.ball(a), depth, kLimit));
        n1 *= m1.back().size();
        n2 *= m2.back().size();
        if (n1 > kLimit || n2 > kLimit) throw InputError("oracle_hausdorff_fields: too many selections");
    }
    // Selection index -> per-atom member indices (mixed radix).
    auto member = [&](const std::vector<std::vector<PadicNumber>>& m, std::size_t index, std::size_t a) {
        for (std::size_t j = 0; j < a; ++j) index /= m[j].size();
        return m[a][index % m[a].size()];
    };
    // Every atom has positive mass, so the sup norm of a G-measurable
    // difference is its maximum over atoms.
    auto norm = [&](std::size_t i, std::size_t j, bool forward) {
        Magnitude d = Magnitude::zero();
        for (std::size_t a = 0; a < atoms; ++a) {
            const auto& x = forward ? member(m1, i, a) : member(m2, i, a);
            const auto& y = forward ? member(m2, j, a) : member(m1, j, a);
            d = join(d, dist(x, y));
        }
        return d;
    };
    auto directed_fields = [&](std::size_t from, std::size_t to, bool forward) {
        Magnitude worst = Magnitude::zero();
        for (std::size_t i = 0; i < from; ++i) {
            Magnitude best = norm(i, 0, forward);
            for (std::size_t j = 1; j < to && !best.is_zero(); ++j) {
                const Magnitude d = norm(i, j, forward);
                if (d < best) best = d;
            }
            worst = join(worst, best);
        }
        return worst;
    };
    return join(directed_fields(n1, n2, true), directed_fields(n2, n1, false));
}

bool oracle_cond_expectation_minimality(const RandomVariableK& x, const Partition& g, const BallField& claimed) {
    if (!(claimed.partition() == g)) return false;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const auto values = values_on(x, g.atom(a));
        const Ball& ball = claimed.ball(a);
        const Magnitude r = ball.radius();
        for (const auto& v : values)
            if (r < dist(v, ball.center())) return false;
        if (max_dist(values, ball.center()) != r) return false;
        std::vector<PadicNumber> candidates = values;
        if (!ball.is_point()) {
            const std::int64_t p = ball.prime();
            const std::int64_t k = r.exponent();
            for (std::int64_t d = 1; d < p; ++d)
                candidates.push_back(
                    add(ball.center(), PadicNumber::from_parts(p, ball.working_precision(), k, d)));
        }
        for (const auto& c : candidates)
            if (max_dist(values, c) < r) return false;
    }
    return true;
}

bool oracle_projection_admits(const RandomVariableK& x, const Partition& g, const RandomVariableK& y) {
    require_same_space(x.space(), y.space(), "oracle_projection_admits");
    for (const auto& atom : g.atoms())
        for (std::size_t i : atom)
            if (!(y[i] == y[atom.front()])) return false;
    Magnitude minimum = Magnitude::zero();
    for (const auto& atom : g.atoms()) minimum = join(minimum, oracle_epsilon(values_on(x, atom)));
    Magnitude achieved = Magnitude::zero();
    for (std::size_t i = 0; i < x.size(); ++i) achieved = join(achieved, dist(x[i], y[i]));
    return achieved == minimum;
}

ProductHull oracle_product_hull(const Ball& b, const Ball& c, std::int64_t depth) {
    const auto mb = truncated_members(b, depth);
    const auto mc = truncated_members(c, depth);
    ProductHull hull{Magnitude::zero(), {}};
    hull.products.reserve(mb.size() * mc.size());
    for (const auto& x : mb)
        for (const auto& y : mc) hull.products.push_back(mul(x, y));
    // Distances from any one product already give the diameter (ultrametric),
    // but the definitional minimum over candidate centers is taken anyway.
    hull.radius = oracle_epsilon(hull.products);
    return hull;
}

}  // namespace ultraprob
