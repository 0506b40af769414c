#pragma once

#include "ultraprob/expectation.hpp"
#include "ultraprob/prob_space.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ultraprob {

/// X_0, ..., X_horizon with X_n in E[X | F_n] for one target X.
struct Martingale {
    FiltrationPtr filtration;
    RandomVariableK target;
    std::vector<RandomVariableK> selections;
    std::string policy;

    std::size_t horizon() const { return selections.size() - 1; }
};

/// Checks X_n in E[X | F_n] at every n.
bool satisfies_definition(const Martingale& m);

/// X_n in E[X_{n+1} | F_n] for every n < horizon. Not implied by the definition.
bool one_step_recursion_holds(const Martingale& m);

/// X_n = policy-selected member of E[X | F_n].
Martingale martingale_from_target(const RandomVariableK& x, FiltrationPtr filtration,
                                  SelectionPolicy policy = SelectionPolicy::CanonicalCenter,
                                  std::uint64_t seed = 0);

/// Independent summands/factors, each given on its own finite space; the martingale
/// lives on their product with F_n = sigma(Y_0, ..., Y_n).
struct IndependentSequence {
    ProductSpace product;
    std::vector<RandomVariableK> lifted;
};

IndependentSequence make_independent_sequence(const std::vector<RandomVariableK>& ys);

/// X_n = Y_0 + ... + Y_n, target the full sum. Requires 0 in E[Y_k] for every k.
Martingale sum_martingale(const std::vector<RandomVariableK>& ys);

/// X_n = Y_0 * ... * Y_n, target the full product. Requires 1 in E[Y_k] for every k.
Martingale product_martingale(const std::vector<RandomVariableK>& ys);

struct MarkovChain {
    std::vector<std::string> states;
    /// Row-stochastic, exact.
    std::vector<std::vector<Rational>> transition;
    /// Initial law; empty means uniform over states.
    std::vector<Rational> initial;

    /// Throws InvalidTransitionMatrix on shape, sign or row-sum errors.
    void validate() const;
};

/// f(i) lies in the smallest ball containing {f(j) : P(i, j) > 0}, for every state i.
bool harmonic_check(const std::vector<PadicNumber>& f, const std::vector<std::vector<Rational>>& transition);

/// Chain paths of length horizon+1 with their path-prefix filtration.
struct ChainMartingale {
    Martingale martingale;
    /// paths[omega][n] = state index of Z_n on path omega.
    std::vector<std::vector<std::size_t>> paths;
};

/// f(Z_{n ^ N}) for n = 0..N on the explicit path space; target f(Z_N).
ChainMartingale stopped_chain_martingale(const MarkovChain& chain, const std::vector<PadicNumber>& f,
                                         std::size_t horizon);

/// omega -> X_{T(omega)}(omega). Asserts X_T in E[X | F_T].
RandomVariableK optional_sample(const Martingale& m, const StoppingTime& t);

/// First n with |X_n| <= threshold, otherwise the horizon.
StoppingTime first_small_time(const Martingale& m, Magnitude threshold);

/// n -> ||X_n - X||_inf.
std::vector<Magnitude> convergence_trace(const Martingale& m);

}  // namespace ultraprob
