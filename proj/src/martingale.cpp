#include "ultraprob/martingale.hpp"

#include <algorithm>

namespace ultraprob {

bool satisfies_definition(const Martingale& m) {
    if (m.selections.size() != m.filtration->steps().size()) return false;
    for (std::size_t n = 0; n < m.selections.size(); ++n)
        if (!member_of_cond_expectation(m.selections[n], m.target, (*m.filtration)[n])) return false;
    return true;
}

bool one_step_recursion_holds(const Martingale& m) {
    for (std::size_t n = 0; n + 1 < m.selections.size(); ++n)
        if (!member_of_cond_expectation(m.selections[n], m.selections[n + 1], (*m.filtration)[n]))
            return false;
    return true;
}

Martingale martingale_from_target(const RandomVariableK& x, FiltrationPtr filtration,
                                  SelectionPolicy policy, std::uint64_t seed) {
    require_same_space(x.space(), filtration->space(), "martingale_from_target");
    Martingale m{filtration, x, {}, std::string(to_string(policy))};
    for (std::size_t n = 0; n <= filtration->horizon(); ++n)
        m.selections.push_back(select(cond_expectation(x, (*filtration)[n]), x, policy, seed + n));
    return m;
}

IndependentSequence make_independent_sequence(const std::vector<RandomVariableK>& ys) {
    if (ys.empty()) throw InputError("need at least one summand");
    std::vector<SpacePtr> spaces;
    for (const auto& y : ys) spaces.push_back(y.space());
    IndependentSequence seq{independent_product(spaces), {}};
    for (std::size_t k = 0; k < ys.size(); ++k) seq.lifted.push_back(seq.product.lift(k, ys[k]));
    return seq;
}

namespace {

template <class Combine>
Martingale accumulate(const std::vector<RandomVariableK>& ys, Combine combine, const char* policy) {
    IndependentSequence seq = make_independent_sequence(ys);
    std::vector<RandomVariableK> partial{seq.lifted.front()};
    for (std::size_t k = 1; k < seq.lifted.size(); ++k)
        partial.push_back(combine(partial.back(), seq.lifted[k]));
    std::vector<Partition> steps;
    for (std::size_t n = 0; n < seq.lifted.size(); ++n)
        steps.push_back(generated_by(std::vector<RandomVariableK>(seq.lifted.begin(),
                                                                  seq.lifted.begin() + n + 1)));
    auto filtration = std::make_shared<const Filtration>(std::move(steps));
    Martingale m{filtration, partial.back(), partial, policy};
    if (!satisfies_definition(m))
        throw InvariantViolation(std::string(policy) + " martingale fails X_n in E[X | F_n]");
    return m;
}

}  // namespace

Martingale sum_martingale(const std::vector<RandomVariableK>& ys) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const PadicNumber zero = PadicNumber::zero(ys[k].prime(), ys[k].precision());
        if (!expectation(ys[k]).contains(zero))
            throw ZeroNotInExpectation("0 is not in E[Y_" + std::to_string(k) + "]");
    }
    return accumulate(ys, [](const auto& a, const auto& b) { return a + b; }, "partial-sums");
}

Martingale product_martingale(const std::vector<RandomVariableK>& ys) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const PadicNumber one = PadicNumber::from_rational(1, 1, ys[k].prime(), ys[k].precision());
        if (!expectation(ys[k]).contains(one))
            throw OneNotInExpectation("1 is not in E[Y_" + std::to_string(k) + "]");
    }
    return accumulate(ys, [](const auto& a, const auto& b) { return a * b; }, "partial-products");
}

namespace {

void validate_matrix(const std::vector<std::vector<Rational>>& p) {
    if (p.empty()) throw InvalidTransitionMatrix("no states");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].size() != p.size())
            throw InvalidTransitionMatrix("row " + std::to_string(i) + " has the wrong length");
        Rational total = 0;
        for (const auto& x : p[i]) {
            if (x < 0) throw InvalidTransitionMatrix("negative entry in row " + std::to_string(i));
            total += x;
        }
        if (total != 1) throw InvalidTransitionMatrix("row " + std::to_string(i) + " does not sum to 1");
    }
}

}  // namespace

void MarkovChain::validate() const {
    validate_matrix(transition);
    if (states.size() != transition.size()) throw InvalidTransitionMatrix("state list and matrix disagree");
    if (!initial.empty()) {
        if (initial.size() != states.size()) throw InvalidTransitionMatrix("initial law has the wrong length");
        Rational total = 0;
        for (const auto& x : initial) {
            if (x < 0) throw InvalidTransitionMatrix("negative initial probability");
            total += x;
        }
        if (total != 1) throw InvalidTransitionMatrix("initial law does not sum to 1");
    }
}

bool harmonic_check(const std::vector<PadicNumber>& f, const std::vector<std::vector<Rational>>& transition) {
    validate_matrix(transition);
    if (f.size() != transition.size()) throw InvalidTransitionMatrix("f and P disagree on the state count");
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<PadicNumber> reachable;
        for (std::size_t j = 0; j < f.size(); ++j)
            if (transition[i][j] > 0) reachable.push_back(f[j]);
        if (!smallest_ball(reachable).contains(f[i])) return false;
    }
    return true;
}

ChainMartingale stopped_chain_martingale(const MarkovChain& chain, const std::vector<PadicNumber>& f,
                                         std::size_t horizon) {
    chain.validate();
    if (!harmonic_check(f, chain.transition)) throw NotHarmonic("f is not harmonic for P");
    const std::size_t states = chain.states.size();
    std::vector<Rational> initial = chain.initial;
    if (initial.empty()) initial.assign(states, Rational(1, static_cast<long long>(states)));

    // Enumerate positive-probability paths depth-first.
    std::vector<std::vector<std::size_t>> paths;
    std::vector<Rational> probs;
    std::vector<std::size_t> path;
    std::function<void(Rational)> extend = [&](Rational mass) {
        if (path.size() == horizon + 1) {
            paths.push_back(path);
            probs.push_back(mass);
            return;
        }
        const std::size_t from = path.back();
        for (std::size_t j = 0; j < states; ++j) {
            if (chain.transition[from][j] <= 0) continue;
            path.push_back(j);
            extend(mass * chain.transition[from][j]);
            path.pop_back();
        }
    };
    for (std::size_t s = 0; s < states; ++s) {
        if (initial[s] <= 0) continue;
        path = {s};
        extend(initial[s]);
    }

    std::vector<std::string> ids;
    for (const auto& pth : paths) {
        std::string id;
        for (std::size_t n = 0; n < pth.size(); ++n) id += (n ? "-" : "") + chain.states[pth[n]];
        ids.push_back(id);
    }
    auto space = std::make_shared<const FiniteProbSpace>(std::move(ids), std::move(probs));

    std::vector<Partition> steps;
    std::vector<RandomVariableK> selections;
    for (std::size_t n = 0; n <= horizon; ++n) {
        std::vector<std::size_t> labels(paths.size(), 0);
        std::vector<PadicNumber> values;
        for (std::size_t w = 0; w < paths.size(); ++w) {
            for (std::size_t t = 0; t <= n; ++t) labels[w] = labels[w] * states + paths[w][t];
            values.push_back(f[paths[w][n]]);
        }
        steps.push_back(Partition::from_labels(space, labels));
        selections.emplace_back(space, std::move(values));
    }
    auto filtration = std::make_shared<const Filtration>(std::move(steps));
    Martingale m{filtration, selections.back(), std::move(selections), "stopped-chain"};
    if (!satisfies_definition(m)) throw InvariantViolation("stopped chain fails X_n in E[X | F_n]");
    return {std::move(m), std::move(paths)};
}

RandomVariableK optional_sample(const Martingale& m, const StoppingTime& t) {
    if (!(*t.filtration() == *m.filtration))
        throw InvalidStoppingTime("stopping time is adapted to a different filtration");
    if (t.max_time() > m.horizon())
        throw HorizonExceeded("T reaches " + std::to_string(t.max_time()) + " beyond horizon " +
                              std::to_string(m.horizon()));
    std::vector<PadicNumber> out;
    out.reserve(m.target.size());
    for (std::size_t w = 0; w < m.target.size(); ++w) out.push_back(m.selections[t[w]][w]);
    RandomVariableK sampled(m.target.space(), std::move(out));
    if (!member_of_cond_expectation(sampled, m.target, sigma_T(t)))
        throw InvariantViolation("optional sampling: X_T is not in E[X | F_T]");
    return sampled;
}

StoppingTime first_small_time(const Martingale& m, Magnitude threshold) {
    std::vector<std::size_t> times(m.target.size(), m.horizon());
    for (std::size_t w = 0; w < times.size(); ++w)
        for (std::size_t n = 0; n <= m.horizon(); ++n)
            if (abs(m.selections[n][w]) <= threshold) {
                times[w] = n;
                break;
            }
    return StoppingTime(m.filtration, std::move(times));
}

std::vector<Magnitude> convergence_trace(const Martingale& m) {
    std::vector<Magnitude> trace;
    trace.reserve(m.selections.size());
    for (const auto& xn : m.selections) {
        Magnitude norm = Magnitude::zero();
        for (std::size_t w = 0; w < xn.size(); ++w) norm = join(norm, dist(xn[w], m.target[w]));
        trace.push_back(norm);
    }
    return trace;
}

}  // namespace ultraprob
