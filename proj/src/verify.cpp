#include "ultraprob/verify.hpp"

#include "ultraprob/martingale.hpp"
#include "ultraprob/oracle.hpp"
#include "ultraprob/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace ultraprob {

namespace {

using Rng = std::mt19937_64;

std::int64_t draw(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

bool coin(Rng& rng, std::uint64_t one_in) { return uniform_below(rng, one_in) == 0; }

// Small-height rationals clustered around a few anchors, so that supports
// contain ties and near-ties at several scales. Heights stay far below p^N,
// which keeps every difference resolvable at N = 12.
std::vector<Rational> make_pool(Rng& rng, std::int64_t p, std::size_t size) {
    std::vector<Rational> anchors(static_cast<std::size_t>(draw(rng, 1, 3)));
    for (auto& a : anchors) a = Rational(draw(rng, -20, 20), draw(rng, 1, 2 * p));
    std::vector<Rational> pool;
    for (std::size_t i = 0; i < size; ++i) {
        const Rational& a = anchors[uniform_below(rng, anchors.size())];
        pool.push_back(a + rational_pow(p, draw(rng, 0, 3)) * draw(rng, 0, p * p - 1));
    }
    return pool;
}

PadicNumber to_padic(const Rational& r, std::int64_t p, int n) { return PadicNumber::from_rational(r, p, n); }

std::vector<Rational> pick(Rng& rng, const std::vector<Rational>& pool, std::size_t n) {
    std::vector<Rational> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[uniform_below(rng, pool.size())]);
    return out;
}

RandomVariableK make_variable(const SpacePtr& space, const std::vector<Rational>& values, std::int64_t p, int n) {
    std::vector<PadicNumber> out;
    for (const auto& r : values) out.push_back(to_padic(r, p, n));
    return RandomVariableK(space, std::move(out));
}

SpacePtr random_space(Rng& rng, std::size_t n, const std::string& prefix) {
    std::vector<std::string> ids;
    std::vector<std::int64_t> weights;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(prefix + std::to_string(i));
        weights.push_back(draw(rng, 1, 6));
        total += weights.back();
    }
    std::vector<Rational> probs;
    for (auto w : weights) probs.emplace_back(w, total);
    return std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));
}

Partition random_partition(Rng& rng, const SpacePtr& space) {
    const auto n = static_cast<std::int64_t>(space->size());
    const std::int64_t labels = draw(rng, 1, n);
    std::vector<std::size_t> label(space->size());
    for (auto& l : label) l = static_cast<std::size_t>(draw(rng, 0, labels - 1));
    return Partition::from_labels(space, label);
}

Partition random_refinement(Rng& rng, const Partition& coarse) {
    const std::int64_t splits = draw(rng, 0, 2);
    std::vector<std::size_t> label(coarse.space()->size());
    for (std::size_t i = 0; i < label.size(); ++i)
        label[i] = coarse.atom_of(i) * 3 + static_cast<std::size_t>(draw(rng, 0, splits));
    return Partition::from_labels(coarse.space(), label);
}

RealVariable random_real(Rng& rng, const SpacePtr& space) {
    std::vector<Rational> values;
    for (std::size_t i = 0; i < space->size(); ++i) values.emplace_back(draw(rng, 0, 12), draw(rng, 1, 3));
    return RealVariable(space, std::move(values));
}

// Each not-yet-stopped atom of F_n stops at n with probability 1/3; everything stops at the horizon.
StoppingTime random_stopping_time(Rng& rng, const FiltrationPtr& f) {
    const std::size_t size = f->space()->size();
    std::vector<std::size_t> times(size);
    std::vector<bool> set(size, false);
    for (std::size_t n = 0; n <= f->horizon(); ++n)
        for (const auto& atom : (*f)[n].atoms()) {
            if (set[atom.front()]) continue;
            if (n == f->horizon() || coin(rng, 3))
                for (std::size_t i : atom) {
                    times[i] = n;
                    set[i] = true;
                }
        }
    return StoppingTime(f, std::move(times));
}

// The closed forms under test; the mutation swaps in a radius taken from the
// first two support points only.
struct Kernels {
    bool mutate = false;

    Ball smallest(std::span<const PadicNumber> values) const {
        if (!mutate) return smallest_ball(values);
        const Magnitude r = values.size() > 1 ? dist(values[0], values[1]) : Magnitude::zero();
        return r.is_zero() ? Ball::point(values[0]) : Ball::around(values[0], r);
    }
    Ball expect(const RandomVariableK& x) const {
        return mutate ? smallest(x.values()) : expectation(x);
    }
    BallField cond(const RandomVariableK& x, const Partition& g) const {
        if (!mutate) return cond_expectation(x, g);
        std::vector<Ball> balls;
        for (const auto& atom : g.atoms()) {
            std::vector<PadicNumber> values;
            for (std::size_t i : atom) values.push_back(x[i]);
            balls.push_back(smallest(values));
        }
        return BallField(g, std::move(balls));
    }
};

struct CheckFailed {
    std::string what;
};
struct SkipCheck {};

void ensure(bool ok, const std::string& what) {
    if (!ok) throw CheckFailed{what};
}

class Recorder {
public:
    Recorder(const Instance& inst, InstanceResult& result) : inst_(inst), result_(result) {}

    template <class F>
    void run(const std::string& name, F&& body) {
        CheckTally& t = result_.tallies[name];
        std::string detail;
        try {
            body();
            ++t.passes;
            return;
        } catch (const SkipCheck&) {
            ++t.skipped;
            return;
        } catch (const PrecisionError&) {
            ++t.skipped;
            return;
        } catch (const CheckFailed& e) {
            detail = e.what;
        } catch (const std::exception& e) {
            detail = e.what();
        }
        ++t.failures;
        if (!result_.first_failure)
            result_.first_failure = FailureRecord{name, detail, inst_.seed, inst_.p, to_json(inst_)};
    }

private:
    const Instance& inst_;
    InstanceResult& result_;
};

Magnitude sup_dist(const RandomVariableK& a, const RandomVariableK& b) {
    Magnitude m = Magnitude::zero();
    for (std::size_t i = 0; i < a.size(); ++i) m = join(m, dist(a[i], b[i]));
    return m;
}

// ||X - Y||_G through dist, which (unlike subtraction) accepts X == Y.
MagnitudeVariable cond_dist_norm(const RandomVariableK& x, const RandomVariableK& y, const Partition& g) {
    std::vector<Magnitude> d;
    for (std::size_t i = 0; i < x.size(); ++i) d.push_back(dist(x[i], y[i]));
    return cond_ess_sup(MagnitudeVariable(x.space(), std::move(d)), g);
}

std::vector<PadicNumber> values_on(const RandomVariableK& x, const std::vector<std::size_t>& atom) {
    std::vector<PadicNumber> out;
    for (std::size_t i : atom) out.push_back(x[i]);
    return out;
}

RandomVariableK masked(const RandomVariableK& x, const std::vector<bool>& keep) {
    std::vector<PadicNumber> out;
    for (std::size_t i = 0; i < x.size(); ++i)
        out.push_back(keep[i] ? x[i] : PadicNumber::zero(x.prime(), x.precision()));
    return RandomVariableK(x.space(), std::move(out));
}

template <class V>
NonnegVariable<V> masked(const NonnegVariable<V>& s, const std::vector<bool>& keep) {
    std::vector<V> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back(keep[i] ? s[i] : V{});
    return NonnegVariable<V>(s.space(), std::move(out));
}

// Variable equal to sources[group[atom(w)]] at w.
RandomVariableK patch(const std::vector<const RandomVariableK*>& sources, const Partition& g,
                      const std::vector<std::size_t>& group) {
    std::vector<PadicNumber> out;
    for (std::size_t i = 0; i < g.space()->size(); ++i) out.push_back((*sources[group[g.atom_of(i)]])[i]);
    return RandomVariableK(g.space(), std::move(out));
}

std::vector<std::size_t> random_groups(Rng& rng, const Partition& g, std::size_t groups) {
    std::vector<std::size_t> out(g.size());
    for (auto& x : out) x = uniform_below(rng, groups);
    return out;
}

// Per-outcome oracle spread: the atom's oracle epsilon.
std::vector<Magnitude> oracle_spread(const RandomVariableK& x, const Partition& g) {
    std::vector<Magnitude> out(x.size());
    for (const auto& atom : g.atoms()) {
        const Magnitude e = oracle_epsilon(values_on(x, atom));
        for (std::size_t i : atom) out[i] = e;
    }
    return out;
}

// Membership by the alternative characterization, evaluated with the oracle spread.
bool member_by_characterization(const RandomVariableK& y, const RandomVariableK& x, const Partition& g) {
    if (!is_measurable(y, g)) return false;
    const auto eps = oracle_spread(x, g);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (eps[i] < dist(x[i], y[i])) return false;
    return true;
}

std::size_t member_count(const Ball& b, std::int64_t depth, std::size_t cap) {
    if (b.is_point() || depth <= b.radius().exponent()) return 1;
    std::size_t count = 1;
    for (std::int64_t i = b.radius().exponent(); i < depth; ++i) {
        count *= static_cast<std::size_t>(b.prime());
        if (count > cap) return cap + 1;
    }
    return count;
}

std::int64_t oracle_depth(const std::vector<const Ball*>& balls) {
    std::int64_t depth = 0;
    bool any = false;
    for (const Ball* b : balls)
        if (!b->is_point()) {
            depth = any ? std::max(depth, b->radius().exponent() + 1) : b->radius().exponent() + 1;
            any = true;
        }
    return depth;
}

// x + y is zero on every digit both operands know.
bool vanishes_to_known_digits(const PadicNumber& x, const PadicNumber& y) {
    const Rational sum = x.to_rational() + y.to_rational();
    if (sum == 0) return true;
    std::int64_t known = std::numeric_limits<std::int64_t>::max();
    for (const auto* v : {&x, &y})
        if (!v->is_zero()) known = std::min(known, *v->absolute_precision());
    return PadicNumber::from_rational(sum, x.prime(), x.working_precision()).valuation() >= known;
}

void check_arithmetic(Recorder& rec, const Instance& inst) {
    const auto& xs = inst.x.values();
    const auto& zs = inst.z.values();
    rec.run("ultrametric_inequality", [&] {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            PadicNumber s = PadicNumber::zero(inst.p, inst.precision);
            try {
                s = add(xs[i], zs[i]);
            } catch (const PrecisionUnderflow&) {
                ensure(vanishes_to_known_digits(xs[i], zs[i]), "add underflowed on a resolvable sum");
                continue;
            }
            const Magnitude bound = join(abs(xs[i]), abs(zs[i]));
            ensure(abs(s) <= bound, "|x+y| exceeds max(|x|,|y|)");
            if (abs(xs[i]) != abs(zs[i])) ensure(abs(s) == bound, "isosceles property fails");
        }
    });
    rec.run("multiplicativity", [&] {
        for (std::size_t i = 0; i < xs.size(); ++i)
            ensure(abs(mul(xs[i], zs[i])) == abs(xs[i]) * abs(zs[i]), "|xy| != |x||y|");
    });
    rec.run("from_rational_homomorphism", [&] {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Rational a = xs[i].to_rational(), b = zs[i].to_rational();
            ensure(to_padic(a, inst.p, inst.precision) == xs[i], "from_rational does not invert to_rational");
            if (vanishes_to_known_digits(xs[i], zs[i])) continue;
            const PadicNumber s = add(xs[i], zs[i]);
            const PadicNumber direct = to_padic(a + b, inst.p, inst.precision);
            const std::int64_t known = s.valuation() + s.digits();
            ensure(direct.valuation() == s.valuation() && direct.truncated(known) == s.truncated(known),
                   "from_rational(a) + from_rational(b) != from_rational(a + b)");
            ensure(mul(xs[i], zs[i]) == to_padic(a * b, inst.p, inst.precision),
                   "from_rational(a) * from_rational(b) != from_rational(ab)");
        }
    });
}

void check_balls(Recorder& rec, const Instance& inst) {
    const auto& balls = inst.balls;
    rec.run("ball_trichotomy", [&] {
        for (const auto& b : balls)
            for (const auto& c : balls) {
                const auto r = ball_relation(b, c);
                ensure((r == BallRelation::Equal) == (b == c), "Equal iff identical representation");
                const bool b_in_c = c.contains(b.center()) && b.radius() <= c.radius();
                const bool c_in_b = b.contains(c.center()) && c.radius() <= b.radius();
                switch (r) {
                    case BallRelation::Disjoint: ensure(!c.contains(b.center()) && !b.contains(c.center()), "disjoint"); break;
                    case BallRelation::Equal: ensure(b_in_c && c_in_b, "equal"); break;
                    case BallRelation::FirstInsideSecond: ensure(b_in_c && !c_in_b, "first inside second"); break;
                    case BallRelation::SecondInsideFirst: ensure(c_in_b && !b_in_c, "second inside first"); break;
                }
            }
    });
    rec.run("hausdorff_balls_oracle", [&] {
        for (const auto& b : balls)
            for (const auto& c : balls) {
                const Magnitude d = hausdorff_balls(b, c);
                ensure(d == hausdorff_balls(c, b), "asymmetric");
                ensure(d.is_zero() == (b == c), "zero distance iff equal");
                for (const auto& e : balls)
                    ensure(hausdorff_balls(b, e) <= join(d, hausdorff_balls(c, e)), "ultrametric triangle");
                const std::int64_t depth = oracle_depth({&b, &c});
                if (member_count(b, depth, 200) > 200 || member_count(c, depth, 200) > 200) continue;
                ensure(d == oracle_hausdorff(b, c, depth), "closed form differs from enumeration");
            }
    });
    rec.run("ball_product_oracle", [&] {
        bool any = false;
        for (std::size_t i = 0; i < balls.size(); ++i)
            for (std::size_t j = i; j < balls.size(); ++j) {
                const std::int64_t depth = oracle_depth({&balls[i], &balls[j]});
                if (member_count(balls[i], depth, 30) * member_count(balls[j], depth, 30) > 150) continue;
                const auto hull = oracle_product_hull(balls[i], balls[j], depth);
                const Ball closed = ball_product(balls[i], balls[j]);
                ensure(closed.radius() == hull.radius, "product radius differs from enumeration");
                for (const auto& x : hull.products) ensure(closed.contains(x), "product escapes the ball");
                any = true;
            }
        if (!any) throw SkipCheck{};
    });
}

void check_expectation(Recorder& rec, const Instance& inst, const Kernels& k, Rng& rng) {
    rec.run("expectation_theorem", [&] {
        for (const auto* v : {&inst.x, &inst.y, &inst.z, &inst.xi}) {
            const Ball b = k.expect(*v);
            for (const auto& x : v->values()) ensure(b.contains(x), "support point outside E[X]");
            ensure(b.radius() == oracle_epsilon(*v), "radius differs from the oracle minimum");
            Magnitude attained = Magnitude::zero();
            for (const auto& x : v->values()) attained = join(attained, dist(x, b.center()));
            ensure(attained == b.radius(), "center does not attain the radius");
        }
    });
    rec.run("expectation_continuity", [&] {
        for (const auto* v : {&inst.y, &inst.z})
            ensure(hausdorff_balls(k.expect(inst.x), k.expect(*v)) <= sup_dist(inst.x, *v),
                   "d_H(E[X], E[Y]) > ||X - Y||");
    });
    rec.run("expectation_affine", [&] {
        const PadicNumber scale = coin(rng, 5) ? PadicNumber::zero(inst.p, inst.precision)
                                               : to_padic(Rational(draw(rng, -9, 9) * 2 + 1, draw(rng, 1, 4)) *
                                                              rational_pow(inst.p, draw(rng, -1, 2)),
                                                          inst.p, inst.precision);
        const PadicNumber shift = inst.z[0];
        ensure(k.expect(affine(inst.x, scale, shift)) == ball_affine(k.expect(inst.x), scale, shift),
               "E[kX + b] != k E[X] + b");
    });
    rec.run("expectation_sum_inclusion", [&] {
        const auto r = ball_relation(k.expect(inst.x + inst.y), ball_sum(k.expect(inst.x), k.expect(inst.y)));
        ensure(r == BallRelation::Equal || r == BallRelation::FirstInsideSecond, "E[X+Y] not inside E[X]+E[Y]");
    });
    rec.run("expectation_independent_sum", [&] {
        ensure(k.expect(inst.xi + inst.yi) == ball_sum(k.expect(inst.xi), k.expect(inst.yi)),
               "E[X+Y] != E[X] + E[Y] for independent X, Y");
    });
    rec.run("expectation_independent_product", [&] {
        ensure(k.expect(inst.xi * inst.yi) == ball_product(k.expect(inst.xi), k.expect(inst.yi)),
               "E[XY] != E[X]E[Y] for independent X, Y");
    });
}

void check_ess_sup(Recorder& rec, const Instance& inst, Rng& rng) {
    const Partition* fields[] = {&inst.g, &inst.h};
    rec.run("ess_sup_dominates", [&] {
        for (const auto* s : {&inst.s1, &inst.s2})
            for (const auto* g : fields) {
                const auto m = cond_ess_sup(*s, *g);
                ensure(is_measurable(m, *g), "not G-measurable");
                ensure(pointwise_leq(*s, m), "S > ess sup{S | G}");
            }
    });
    rec.run("ess_sup_minimal", [&] {
        for (const auto* g : fields) {
            // Any G-measurable T >= S: the ess sup plus a random nonnegative atomwise shift.
            const auto m = cond_ess_sup(inst.s1, *g);
            std::vector<Rational> shift(g->size());
            for (auto& r : shift) r = coin(rng, 2) ? Rational(0) : Rational(draw(rng, 1, 5), draw(rng, 1, 3));
            std::vector<Rational> t;
            for (std::size_t i = 0; i < m.size(); ++i) t.push_back(m[i] + shift[g->atom_of(i)]);
            const RealVariable tv(inst.space, std::move(t));
            ensure(pointwise_leq(cond_ess_sup(inst.s1, *g), tv), "ess sup{S | G} > T");
        }
    });
    rec.run("ess_sup_join", [&] {
        for (const auto* g : fields)
            ensure(cond_ess_sup(pointwise_max(inst.s1, inst.s2), *g) ==
                       pointwise_max(cond_ess_sup(inst.s1, *g), cond_ess_sup(inst.s2, *g)),
                   "ess sup of a max is not the max of ess sups");
    });
    rec.run("ess_sup_refinement", [&] {
        ensure(pointwise_leq(cond_ess_sup(inst.s1, inst.h), cond_ess_sup(inst.s1, inst.g)),
               "finer field gave a larger ess sup");
    });
    rec.run("ess_sup_stopping", [&] {
        for (const auto& t : inst.stopping) {
            const Partition ft = sigma_T(t);
            for (std::size_t n = 0; n <= inst.filtration->horizon(); ++n) {
                std::vector<bool> on(t.times().size());
                for (std::size_t i = 0; i < on.size(); ++i) on[i] = t[i] == n;
                const auto& fn = (*inst.filtration)[n];
                const auto a = cond_ess_sup(masked(inst.s1, on), ft);
                ensure(a == masked(cond_ess_sup(inst.s1, ft), on), "first equality");
                ensure(a == masked(cond_ess_sup(inst.s1, fn), on), "second equality");
                ensure(a == cond_ess_sup(masked(inst.s1, on), fn), "third equality");
            }
        }
    });
    // The power mean at q differs from the maximum by at most the factor
    // w^(1/q), w the conditional mass of the maximizing outcomes.
    rec.run("ess_sup_float_sandwich", [&] {
        constexpr double kQ = 64;
        constexpr long double kSlack = 1e-12L;
        for (const auto* g : fields) {
            const auto m = cond_ess_sup(inst.s1, *g);
            const auto approx = oracle_cond_ess_sup(inst.s1, *g, kQ);
            for (const auto& atom : g->atoms()) {
                const long double top = m[atom.front()].convert_to<long double>();
                Rational mass = 0, at_top = 0;
                for (std::size_t i : atom) {
                    mass += inst.space->prob(i);
                    if (inst.s1[i] == m[atom.front()]) at_top += inst.space->prob(i);
                }
                const long double w = Rational(at_top / mass).convert_to<long double>();
                const long double lower = top * std::pow(w, 1.0L / kQ);
                const long double v = approx[atom.front()];
                ensure(v <= top * (1 + kSlack) && v >= lower * (1 - kSlack), "power mean outside its bounds");
            }
        }
    });
    rec.run("ess_sup_float_monotone", [&] {
        for (const auto* g : fields) {
            const auto lo = oracle_cond_ess_sup(inst.s1, *g, 8);
            const auto hi = oracle_cond_ess_sup(inst.s1, *g, 64);
            for (std::size_t i = 0; i < lo.size(); ++i) ensure(lo[i] <= hi[i] * (1 + 1e-12L), "not monotone in q");
        }
    });
}

void check_cond_norm(Recorder& rec, const Instance& inst, Rng& rng) {
    const Partition& g = inst.g;
    rec.run("cond_norm_multiplicative", [&] {
        const auto lhs = cond_linfty_norm(inst.w * inst.x, g);
        const auto nx = cond_linfty_norm(inst.x, g);
        for (std::size_t i = 0; i < lhs.size(); ++i) ensure(lhs[i] == abs(inst.w[i]) * nx[i], "||WX|| != |W| ||X||");
    });
    rec.run("cond_norm_local", [&] {
        std::vector<std::size_t> inside = random_groups(rng, g, 2);
        const auto xp = patch({&inst.x, &inst.z}, g, inside);
        const auto a = cond_linfty_norm(xp, g), b = cond_linfty_norm(inst.x, g);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (inside[g.atom_of(i)] == 0) ensure(a[i] == b[i], "norms differ where X = Y on A");
    });
    rec.run("cond_norm_patching", [&] {
        const std::vector<const RandomVariableK*> sources{&inst.x, &inst.y, &inst.z};
        const auto groups = random_groups(rng, g, 3);
        const auto lhs = cond_linfty_norm(patch(sources, g, groups), g);
        for (std::size_t i = 0; i < lhs.size(); ++i)
            ensure(lhs[i] == cond_linfty_norm(*sources[groups[g.atom_of(i)]], g)[i], "patching");
    });
    rec.run("cond_norm_ultrametric", [&] {
        for (const auto* gg : {&inst.g, &inst.h}) {
            const auto s = cond_linfty_norm(inst.x + inst.y, *gg);
            const auto a = cond_linfty_norm(inst.x, *gg), b = cond_linfty_norm(inst.y, *gg);
            for (std::size_t i = 0; i < s.size(); ++i) ensure(s[i] <= join(a[i], b[i]), "||X+Y|| > ||X|| v ||Y||");
        }
    });
    rec.run("cond_norm_refinement", [&] {
        ensure(pointwise_leq(cond_linfty_norm(inst.x, inst.h), cond_linfty_norm(inst.x, inst.g)),
               "||X||_H > ||X||_G");
    });
    rec.run("cond_norm_stopping", [&] {
        for (const auto& t : inst.stopping) {
            const Partition ft = sigma_T(t);
            for (std::size_t n = 0; n <= inst.filtration->horizon(); ++n) {
                std::vector<bool> on(t.times().size());
                for (std::size_t i = 0; i < on.size(); ++i) on[i] = t[i] == n;
                const auto& fn = (*inst.filtration)[n];
                const auto a = cond_linfty_norm(masked(inst.x, on), ft);
                ensure(a == masked(cond_linfty_norm(inst.x, ft), on), "first equality");
                ensure(a == masked(cond_linfty_norm(inst.x, fn), on), "second equality");
                ensure(a == cond_linfty_norm(masked(inst.x, on), fn), "third equality");
            }
        }
    });
}

void check_cond_expectation(Recorder& rec, const Instance& inst, const Kernels& k, Rng& rng) {
    const Partition* fields[] = {&inst.g, &inst.h};
    rec.run("cond_expectation_minimality", [&] {
        for (const auto* v : {&inst.x, &inst.y})
            for (const auto* g : fields)
                ensure(oracle_cond_expectation_minimality(*v, *g, k.cond(*v, *g)), "ball field is not minimal");
    });
    rec.run("cond_expectation_serial_parallel", [&] {
        for (const auto* g : fields)
            ensure(cond_expectation(inst.x, *g) == serial::cond_expectation(inst.x, *g), "kernels disagree");
    });
    rec.run("cond_expectation_membership", [&] {
        for (const auto* g : fields) {
            const BallField field = k.cond(inst.x, *g);
            std::vector<RandomVariableK> candidates{inst.x, inst.y, inst.z};
            for (auto policy : kAllSelectionPolicies) {
                const auto sel = select(field, inst.x, policy, inst.seed + 7);
                ensure(member_by_characterization(sel, inst.x, *g), "selection outside the characterization");
                candidates.push_back(sel);
            }
            // Push one atom just outside its ball.
            const auto centers = select(field, inst.x, SelectionPolicy::CanonicalCenter);
            const std::size_t atom = uniform_below(rng, g->size());
            const Ball& b = field.ball(atom);
            const std::int64_t shift = b.is_point() ? draw(rng, -2, 8) : b.radius().exponent() - 1;
            std::vector<PadicNumber> pushed = centers.values();
            for (std::size_t i : g->atom(atom))
                pushed[i] = add(pushed[i], PadicNumber::from_parts(inst.p, inst.precision, shift, 1));
            candidates.emplace_back(inst.space, std::move(pushed));
            candidates.push_back(select(k.cond(inst.y, *g), inst.y, SelectionPolicy::CanonicalCenter));

            const auto best = cond_dist_norm(inst.x, centers, *g);
            for (const auto& y : candidates) {
                const bool member = member_of_cond_expectation(y, inst.x, *g);
                ensure(member == member_by_characterization(y, inst.x, *g), "membership characterization");
                if (!is_measurable(y, *g)) continue;
                // Definition: Y is a member iff no G-measurable Z beats it atomwise.
                const auto norm = cond_dist_norm(inst.x, y, *g);
                ensure(pointwise_leq(best, norm), "a G-measurable variable beats the center");
                ensure(member == (norm == best), "member iff the atomwise norm is minimal");
            }
        }
    });
    rec.run("cond_expectation_multiplication_addition", [&] {
        const auto one = RandomVariableK::constant(inst.space, PadicNumber::from_rational(1, 1, inst.p, inst.precision));
        const auto zero = RandomVariableK::constant(inst.space, PadicNumber::zero(inst.p, inst.precision));
        const BallField fx = k.cond(inst.x, inst.g);
        ensure(k.cond(inst.w * inst.x, inst.g) == affine(fx, inst.w, zero), "E[WX | G] != W E[X | G]");
        ensure(k.cond(inst.w + inst.x, inst.g) == affine(fx, one, inst.w), "E[W + X | G] != W + E[X | G]");
    });
    rec.run("cond_expectation_local", [&] {
        const auto inside = random_groups(rng, inst.g, 2);
        const auto xp = patch({&inst.x, &inst.z}, inst.g, inside);
        const auto a = k.cond(xp, inst.g), b = k.cond(inst.x, inst.g);
        for (std::size_t at = 0; at < inst.g.size(); ++at)
            if (inside[at] == 0) ensure(a.ball(at) == b.ball(at), "fields differ on A where X = Y");
    });
    rec.run("cond_expectation_patching", [&] {
        const std::vector<const RandomVariableK*> sources{&inst.x, &inst.y, &inst.z};
        const auto groups = random_groups(rng, inst.g, 3);
        const auto lhs = k.cond(patch(sources, inst.g, groups), inst.g);
        for (std::size_t at = 0; at < inst.g.size(); ++at)
            ensure(lhs.ball(at) == k.cond(*sources[groups[at]], inst.g).ball(at), "patching");
    });
    rec.run("cond_expectation_independence", [&] {
        ensure(is_independent(inst.xi, inst.gi), "generated instance is not independent");
        const Ball e = k.expect(inst.xi);
        const BallField field = k.cond(inst.xi, inst.gi);
        for (const auto& b : field.balls()) ensure(b == e, "E[X | G] != E[X] for independent X");
    });
}

void check_tower(Recorder& rec, const Instance& inst, const Kernels& k) {
    rec.run("cond_smaller_spread", [&] {
        ensure(pointwise_leq(radii(k.cond(inst.x, inst.h)), radii(k.cond(inst.x, inst.g))), "eps(X,H) > eps(X,G)");
    });
    std::uint64_t salt = 0;
    for (auto policy : kAllSelectionPolicies) {
        rec.run("tower_property", [&] {
            const auto yh = select(k.cond(inst.x, inst.h), inst.x, policy, inst.seed + ++salt);
            const auto zg = select(k.cond(yh, inst.g), yh, policy, inst.seed + ++salt);
            ensure(member_of_cond_expectation(zg, inst.x, inst.g), "Z not in E[X | G]");
        });
        rec.run("tower_spread", [&] {
            const auto yh = select(k.cond(inst.x, inst.h), inst.x, policy, inst.seed + ++salt);
            ensure(pointwise_leq(radii(k.cond(yh, inst.g)), radii(k.cond(inst.x, inst.g))), "eps(Y,G) > eps(X,G)");
        });
    }
}

void check_continuity(Recorder& rec, const Instance& inst, const Kernels& k) {
    rec.run("cond_expectation_continuity", [&] {
        for (const auto* g : {&inst.g, &inst.h})
            for (const auto* v : {&inst.y, &inst.z})
                ensure(hausdorff_ballfields(k.cond(inst.x, *g), k.cond(*v, *g)) <= sup_dist(inst.x, *v),
                       "D_H(E[X|G], E[Y|G]) > ||X - Y||");
    });
    rec.run("hausdorff_minkowski_sum", [&] {
        const auto a = k.cond(inst.x, inst.g), b = k.cond(inst.y, inst.g), c = k.cond(inst.z, inst.g);
        ensure(hausdorff_ballfields(minkowski_sum(a, c), minkowski_sum(b, c)) <= hausdorff_ballfields(a, b),
               "D_H(A+C, B+C) > D_H(A, B)");
    });
    rec.run("hausdorff_fields_oracle", [&] {
        const auto a = cond_expectation(inst.x, inst.g), b = cond_expectation(inst.y, inst.g);
        std::vector<const Ball*> all;
        for (const auto& x : a.balls()) all.push_back(&x);
        for (const auto& x : b.balls()) all.push_back(&x);
        const std::int64_t depth = oracle_depth(all);
        std::size_t na = 1, nb = 1;
        for (std::size_t at = 0; at < a.size(); ++at) {
            na *= member_count(a.ball(at), depth, 400);
            nb *= member_count(b.ball(at), depth, 400);
            if (na > 400 || nb > 400) throw SkipCheck{};
        }
        ensure(hausdorff_ballfields(a, b) == oracle_hausdorff_fields(a, b, depth),
               "closed form differs from selection enumeration");
    });
}

void check_martingales(Recorder& rec, const Instance& inst) {
    const auto& f = inst.filtration;
    const RandomVariableK& x = inst.x;
    for (auto policy : kAllSelectionPolicies) {
        const Martingale m = martingale_from_target(x, f, policy, inst.seed);
        rec.run("martingale_definition", [&] { ensure(satisfies_definition(m), "X_n not in E[X | F_n]"); });
        rec.run("optional_sampling", [&] {
            for (const auto& t : inst.stopping) {
                const auto sampled = optional_sample(m, t);
                ensure(member_by_characterization(sampled, x, sigma_T(t)), "X_T outside the characterization");
            }
        });
        rec.run("convergence_bound", [&] {
            const auto trace = convergence_trace(m);
            for (std::size_t n = 0; n < trace.size(); ++n) {
                Magnitude spread = Magnitude::zero();
                for (const auto& atom : (*f)[n].atoms()) spread = join(spread, oracle_epsilon(values_on(x, atom)));
                ensure(trace[n] <= spread, "||X_n - X|| exceeds eps(X, F_n)");
                if (n) ensure(trace[n] <= trace[n - 1], "trace increases");
            }
            if (is_measurable(x, (*f)[f->horizon()])) ensure(trace.back().is_zero(), "terminal entry is not zero");
        });
    }
}

}  // namespace

Instance make_instance(std::uint64_t seed, std::int64_t p, const VerifyOptions& options) {
    Rng rng(seed);
    const int n_digits = options.precision;
    const auto n = static_cast<std::size_t>(draw(rng, 1, static_cast<std::int64_t>(options.max_outcomes)));
    SpacePtr space = random_space(rng, n, "w");
    const auto pool = make_pool(rng, p, static_cast<std::size_t>(draw(rng, 1, static_cast<std::int64_t>(n))));

    const auto xr = pick(rng, pool, n);
    std::vector<Rational> yr = xr;
    for (auto& v : yr)
        if (coin(rng, 2)) v += rational_pow(p, draw(rng, 0, 4)) * draw(rng, 1, p - 1);
    const auto zr = pick(rng, make_pool(rng, p, n), n);

    Partition g = random_partition(rng, space);
    Partition h = random_refinement(rng, g);
    std::vector<Rational> per_atom;
    for (std::size_t a = 0; a < g.size(); ++a) per_atom.push_back(coin(rng, 4) ? Rational(0) : pool[uniform_below(rng, pool.size())]);
    std::vector<Rational> wr;
    for (std::size_t i = 0; i < n; ++i) wr.push_back(per_atom[g.atom_of(i)]);

    const auto s1 = random_real(rng, space);
    const auto s2 = random_real(rng, space);

    const auto horizon = static_cast<std::size_t>(draw(rng, 1, static_cast<std::int64_t>(options.max_horizon)));
    std::vector<Partition> steps{coin(rng, 2) ? Partition::trivial(space) : random_partition(rng, space)};
    while (steps.size() <= horizon) steps.push_back(random_refinement(rng, steps.back()));
    if (coin(rng, 2)) steps.back() = Partition::discrete(space);
    auto filtration = std::make_shared<const Filtration>(std::move(steps));
    std::vector<StoppingTime> stopping;
    for (std::size_t t = 0; t <= horizon; ++t) stopping.push_back(StoppingTime::constant(filtration, t));
    for (std::size_t t = 0; t < options.stopping_times; ++t) stopping.push_back(random_stopping_time(rng, filtration));

    const SpacePtr f0 = random_space(rng, static_cast<std::size_t>(draw(rng, 1, 4)), "a");
    const SpacePtr f1 = random_space(rng, static_cast<std::size_t>(draw(rng, 1, 4)), "b");
    ProductSpace product = independent_product({f0, f1});
    const auto xi = product.lift(0, make_variable(f0, pick(rng, pool, f0->size()), p, n_digits));
    const auto yi = product.lift(1, make_variable(f1, pick(rng, make_pool(rng, p, 3), f1->size()), p, n_digits));
    Partition gi = Partition::from_labels(product.space, product.coordinates[1]);

    std::vector<Ball> balls;
    for (int b = 0; b < 4; ++b) {
        const PadicNumber c = to_padic(pool[uniform_below(rng, pool.size())], p, n_digits);
        balls.push_back(coin(rng, 5) ? Ball::point(c) : Ball::around(c, Magnitude::finite(draw(rng, -1, 2))));
    }

    return Instance{seed,
                    p,
                    n_digits,
                    space,
                    make_variable(space, xr, p, n_digits),
                    make_variable(space, yr, p, n_digits),
                    make_variable(space, zr, p, n_digits),
                    make_variable(space, wr, p, n_digits),
                    std::move(g),
                    std::move(h),
                    s1,
                    s2,
                    filtration,
                    std::move(stopping),
                    std::move(product),
                    xi,
                    yi,
                    std::move(gi),
                    std::move(balls)};
}

Json to_json(const Instance& inst) {
    SpaceDocument doc;
    doc.p = inst.p;
    doc.precision = inst.precision;
    doc.space = inst.space;
    doc.vars.emplace("X", inst.x);
    doc.vars.emplace("Y", inst.y);
    doc.vars.emplace("Z", inst.z);
    doc.vars.emplace("W", inst.w);
    doc.partitions.emplace("G", inst.g);
    doc.partitions.emplace("H", inst.h);
    doc.filtration = inst.filtration;
    for (std::size_t t = 0; t < inst.stopping.size(); ++t) doc.stopping.emplace("T" + std::to_string(t), inst.stopping[t]);
    Json j = to_json(doc);
    j["seed"] = inst.seed;
    Json reals = Json::object();
    for (const auto& [name, s] : {std::pair{"S1", &inst.s1}, std::pair{"S2", &inst.s2}}) {
        Json values = Json::object();
        for (std::size_t i = 0; i < s->size(); ++i) values[inst.space->ids()[i]] = format_rational((*s)[i]);
        reals[name] = std::move(values);
    }
    j["real_vars"] = std::move(reals);
    Json indep{{"outcomes", Json::array()}, {"X", Json::object()}, {"Y", Json::object()}, {"G", to_json(inst.gi)}};
    for (std::size_t i = 0; i < inst.product.space->size(); ++i) {
        const auto& id = inst.product.space->ids()[i];
        indep["outcomes"].push_back({{"id", id}, {"prob", format_rational(inst.product.space->prob(i))}});
        indep["X"][id] = to_string(inst.xi[i]);
        indep["Y"][id] = to_string(inst.yi[i]);
    }
    j["independent"] = std::move(indep);
    Json balls = Json::array();
    for (const auto& b : inst.balls) balls.push_back(to_json(b));
    j["balls"] = std::move(balls);
    return j;
}

InstanceResult check_instance(const Instance& inst, const VerifyOptions& options) {
    InstanceResult result;
    result.seed = inst.seed;
    Recorder rec(inst, result);
    Rng rng(splitmix64(inst.seed ^ 0x636865636bULL));
    const Kernels k{options.mutate};
    check_expectation(rec, inst, k, rng);
    check_arithmetic(rec, inst);
    check_balls(rec, inst);
    check_ess_sup(rec, inst, rng);
    check_cond_norm(rec, inst, rng);
    check_cond_expectation(rec, inst, k, rng);
    check_tower(rec, inst, k);
    check_continuity(rec, inst, k);
    check_martingales(rec, inst);
    return result;
}

Json VerifyReport::to_json() const {
    Json checks_json = Json::object();
    for (const auto& [name, t] : checks)
        checks_json[name] = {{"passes", t.passes}, {"failures", t.failures}, {"skipped", t.skipped}};
    Json j{{"checks", std::move(checks_json)},
           {"passes", passes},
           {"failures", failures},
           {"skipped", skipped},
           {"seeds", seeds}};
    if (first_failure) {
        j["first_failure"] = {{"check", first_failure->check},
                              {"detail", first_failure->detail},
                              {"instance_seed", first_failure->instance_seed},
                              {"p", first_failure->p},
                              {"instance", first_failure->instance}};
    } else {
        j["first_failure"] = nullptr;
    }
    return j;
}

std::vector<std::pair<std::uint64_t, std::int64_t>> instance_plan(const VerifyOptions& options) {
    std::vector<std::pair<std::uint64_t, std::int64_t>> plan;
    const std::uint64_t base = splitmix64(options.seed);
    for (std::int64_t p : options.primes) {
        check_context(p, options.precision);
        for (std::size_t i = 0; i < options.instances; ++i)
            plan.emplace_back(splitmix64(base + static_cast<std::uint64_t>(p) * 0x100000001b3ULL + i), p);
    }
    std::sort(plan.begin(), plan.end());
    return plan;
}

namespace {

void validate(const VerifyOptions& options) {
    if (options.instances == 0) throw InputError("instances must be at least 1");
    if (options.primes.empty()) throw InputError("p-list is empty");
    if (options.max_outcomes == 0) throw InputError("max-outcomes must be at least 1");
    if (options.max_horizon == 0) throw InputError("max-horizon must be at least 1");
    for (std::int64_t p : options.primes) check_context(p, options.precision);
}

InstanceResult run_one(const std::pair<std::uint64_t, std::int64_t>& entry, const VerifyOptions& options) {
    try {
        return check_instance(make_instance(entry.first, entry.second, options), options);
    } catch (const std::exception& e) {
        InstanceResult r;
        r.seed = entry.first;
        r.tallies["instance_generation"].failures = 1;
        r.first_failure = FailureRecord{"instance_generation", e.what(), entry.first, entry.second, nullptr};
        return r;
    }
}

VerifyReport merge(const std::vector<std::pair<std::uint64_t, std::int64_t>>& plan,
                   const std::vector<InstanceResult>& results) {
    VerifyReport report;
    for (std::size_t i = 0; i < results.size(); ++i) {
        report.seeds.push_back(plan[i].first);
        for (const auto& [name, t] : results[i].tallies) {
            auto& total = report.checks[name];
            total.passes += t.passes;
            total.failures += t.failures;
            total.skipped += t.skipped;
            report.passes += t.passes;
            report.failures += t.failures;
            report.skipped += t.skipped;
        }
        if (!report.first_failure && results[i].first_failure) report.first_failure = results[i].first_failure;
    }
    return report;
}

template <class Loop>
VerifyReport timed(const VerifyOptions& options, Loop loop) {
    validate(options);
    const auto start = std::chrono::steady_clock::now();
    const auto plan = instance_plan(options);
    std::vector<InstanceResult> results(plan.size());
    loop(plan, results);
    VerifyReport report = merge(plan, results);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
    return timed(options, [&](const auto& plan, auto& results) {
        const auto count = static_cast<std::ptrdiff_t>(plan.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < count; ++i) results[i] = run_one(plan[i], options);
    });
}

namespace serial {

VerifyReport run_verify(const VerifyOptions& options) {
    return timed(options, [&](const auto& plan, auto& results) {
        for (std::size_t i = 0; i < plan.size(); ++i) results[i] = run_one(plan[i], options);
    });
}

}  // namespace serial

}  // namespace ultraprob
