#pragma once

#include "ultraprob/padic.hpp"
#include "ultraprob/prob_space.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ultraprob {

/// A G-measurable assignment of one ball per atom.
///
/// Stands for the whole set {Y in L^inf(G) : Y(w) in ball(atom(w))}, which is
/// how conditional expectation is represented; a single selection is taken
/// separately via select().
class BallField {
public:
    BallField(Partition partition, std::vector<Ball> balls);

    const Partition& partition() const { return partition_; }
    const std::vector<Ball>& balls() const { return balls_; }
    const Ball& ball(std::size_t atom) const { return balls_[atom]; }
    const Ball& ball_at(std::size_t outcome) const { return balls_[partition_.atom_of(outcome)]; }
    std::size_t size() const { return balls_.size(); }

    friend bool operator==(const BallField& a, const BallField& b) {
        return a.partition_ == b.partition_ && a.balls_ == b.balls_;
    }

private:
    Partition partition_;
    std::vector<Ball> balls_;
};

/// ess sup |X|; every outcome carries mass, so a plain maximum.
Magnitude linfty_norm(const RandomVariableK& x);

/// ess sup{S | G}: on each atom, the maximum of S over that atom.
template <class V>
NonnegVariable<V> cond_ess_sup(const NonnegVariable<V>& s, const Partition& g) {
    require_same_space(s.space(), g.space(), "cond_ess_sup");
    std::vector<V> out(s.size());
    for (const auto& atom : g.atoms()) {
        V best = s[atom.front()];
        for (std::size_t i : atom)
            if (best < s[i]) best = s[i];
        for (std::size_t i : atom) out[i] = best;
    }
    return NonnegVariable<V>(s.space(), std::move(out));
}

/// Pointwise |X|.
MagnitudeVariable abs(const RandomVariableK& x);

/// ||X||_G = ess sup{|X| | G}.
MagnitudeVariable cond_linfty_norm(const RandomVariableK& x, const Partition& g);

/// Smallest closed ball containing the support of X.
Ball expectation(const RandomVariableK& x);

/// Radius of expectation(x).
Magnitude epsilon(const RandomVariableK& x);

/// Per-atom smallest enclosing balls. Atoms are processed in parallel.
BallField cond_expectation(const RandomVariableK& x, const Partition& g);

namespace serial {
/// Reference single-threaded version of cond_expectation.
BallField cond_expectation(const RandomVariableK& x, const Partition& g);
}  // namespace serial

/// Conditional spread eps(X, G): omega -> radius of its atom's ball.
MagnitudeVariable cond_epsilon(const RandomVariableK& x, const Partition& g);
MagnitudeVariable radii(const BallField& field);

/// Y is constant on every atom of the field's partition and lies in that atom's ball.
bool is_selection(const RandomVariableK& y, const BallField& field);

/// Y in E[X | G]: G-measurable with |X - Y| <= eps(X, G).
bool member_of_cond_expectation(const RandomVariableK& y, const RandomVariableK& x, const Partition& g);

/// Sup-norm Hausdorff distance between the selection sets of two fields on one partition.
Magnitude hausdorff_ballfields(const BallField& f1, const BallField& f2);

/// Atomwise Minkowski sum.
BallField minkowski_sum(const BallField& f1, const BallField& f2);

/// Atomwise image of the field under y -> W y + B for G-measurable W and B.
BallField affine(const BallField& field, const RandomVariableK& w, const RandomVariableK& b);

enum class SelectionPolicy { CanonicalCenter, SupportPoint, RandomMember };

inline constexpr SelectionPolicy kAllSelectionPolicies[] = {
    SelectionPolicy::CanonicalCenter, SelectionPolicy::SupportPoint, SelectionPolicy::RandomMember};

std::string_view to_string(SelectionPolicy policy);

/// A G-measurable member of the field.
///   CanonicalCenter: each ball's canonical center.
///   SupportPoint:    X at the first outcome of the atom (support points lie in the ball).
///   RandomMember:    center plus seeded uniform digits at and above the radius position.
RandomVariableK select(const BallField& field, const RandomVariableK& x, SelectionPolicy policy,
                       std::uint64_t seed = 0);

}  // namespace ultraprob
