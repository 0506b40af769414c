#pragma once

// Brute-force evaluations of the defining formulas. Nothing here calls the
// closed forms in expectation.hpp or the ball algorithms in padic.hpp; only
// p-adic arithmetic, dist() and the Ball data accessors are used.

#include "ultraprob/padic.hpp"
#include "ultraprob/prob_space.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ultraprob {

class BallField;

/// min over c in supp X of max over omega of |X(omega) - c|.
Magnitude oracle_epsilon(std::span<const PadicNumber> values);
Magnitude oracle_epsilon(const RandomVariableK& x);

/// Floating evaluation of E[S^q | G]^(1/q) at q = q_max, per outcome.
std::vector<long double> oracle_cond_ess_sup(const RealVariable& s, const Partition& g, double q_max);

/// Members c + sum_{k <= i < depth} d_i p^i of a ball of radius p^-k
/// (the single point for a point ball). Throws InputError past `limit` members.
std::vector<PadicNumber> truncated_members(const Ball& b, std::int64_t depth, std::size_t limit = 100000);

/// Discrete Hausdorff distance between the depth-truncated member sets.
Magnitude oracle_hausdorff(const Ball& b, const Ball& c, std::int64_t depth);

/// Sup-norm Hausdorff distance between the sets of selections of two ball fields,
/// enumerating every selection built from depth-truncated members.
Magnitude oracle_hausdorff_fields(const BallField& f1, const BallField& f2, std::int64_t depth);

/// Checks the claimed field atom by atom against the defining minimization:
/// the ball contains the atom's values, no candidate constant (support points and
/// one point per maximal proper sub-ball) attains a smaller atom norm than the
/// radius, and the center attains exactly the radius.
bool oracle_cond_expectation_minimality(const RandomVariableK& x, const Partition& g, const BallField& claimed);

/// Y is a projection of X onto L^inf(G): G-measurable and ||X - Y||_inf minimal.
bool oracle_projection_admits(const RandomVariableK& x, const Partition& g, const RandomVariableK& y);

/// Smallest-ball radius and containment for {xy : x in B, y in C} over truncated members.
struct ProductHull {
    Magnitude radius;
    std::vector<PadicNumber> products;
};
ProductHull oracle_product_hull(const Ball& b, const Ball& c, std::int64_t depth);

}  // namespace ultraprob
