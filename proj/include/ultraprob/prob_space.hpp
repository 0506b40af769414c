#pragma once

#include "ultraprob/padic.hpp"
#include "ultraprob/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ultraprob {

/// Finite outcome set with exact, strictly positive probabilities summing to 1.
class FiniteProbSpace {
public:
    FiniteProbSpace(std::vector<std::string> ids, std::vector<Rational> probs);

    /// n outcomes named "w0".."w{n-1}", each with mass 1/n.
    static std::shared_ptr<const FiniteProbSpace> uniform(std::size_t n);
    static std::shared_ptr<const FiniteProbSpace> uniform(std::vector<std::string> ids);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<Rational>& probs() const { return probs_; }
    const Rational& prob(std::size_t i) const { return probs_[i]; }
    /// Throws InvalidSpace for an unknown id.
    std::size_t index_of(const std::string& id) const;

    friend bool operator==(const FiniteProbSpace&, const FiniteProbSpace&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<Rational> probs_;
};

using SpacePtr = std::shared_ptr<const FiniteProbSpace>;

bool same_space(const SpacePtr& a, const SpacePtr& b);
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what);

/// K-valued random variable: one PadicNumber per outcome, one shared context.
class RandomVariableK {
public:
    RandomVariableK(SpacePtr space, std::vector<PadicNumber> values);

    static RandomVariableK constant(SpacePtr space, const PadicNumber& c);

    const SpacePtr& space() const { return space_; }
    const std::vector<PadicNumber>& values() const { return values_; }
    const PadicNumber& operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    std::int64_t prime() const { return values_.front().prime(); }
    int precision() const { return values_.front().working_precision(); }

    friend bool operator==(const RandomVariableK& a, const RandomVariableK& b) {
        return same_space(a.space_, b.space_) && a.values_ == b.values_;
    }

private:
    SpacePtr space_;
    std::vector<PadicNumber> values_;
};

RandomVariableK operator+(const RandomVariableK& x, const RandomVariableK& y);
RandomVariableK operator-(const RandomVariableK& x, const RandomVariableK& y);
RandomVariableK operator*(const RandomVariableK& x, const RandomVariableK& y);
/// omega -> k * X(omega) + b.
RandomVariableK affine(const RandomVariableK& x, const PadicNumber& k, const PadicNumber& b);

/// Nonnegative real-valued random variable over an ordered value type
/// (Rational for general data, Magnitude for norms of K-valued variables).
template <class V>
class NonnegVariable {
public:
    NonnegVariable(SpacePtr space, std::vector<V> values)
        : space_(std::move(space)), values_(std::move(values)) {
        if (!space_ || values_.size() != space_->size())
            throw InputError("variable must assign one value per outcome");
        for (const auto& v : values_)
            if (v < V{}) throw InputError("nonnegative variable has a negative value");
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<V>& values() const { return values_; }
    const V& operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    friend bool operator==(const NonnegVariable& a, const NonnegVariable& b) {
        return same_space(a.space_, b.space_) && a.values_ == b.values_;
    }

private:
    SpacePtr space_;
    std::vector<V> values_;
};

using RealVariable = NonnegVariable<Rational>;
using MagnitudeVariable = NonnegVariable<Magnitude>;

template <class V>
bool pointwise_leq(const NonnegVariable<V>& a, const NonnegVariable<V>& b) {
    require_same_space(a.space(), b.space(), "pointwise_leq");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b[i] < a[i]) return false;
    return true;
}

template <class V>
NonnegVariable<V> pointwise_max(const NonnegVariable<V>& a, const NonnegVariable<V>& b) {
    require_same_space(a.space(), b.space(), "pointwise_max");
    std::vector<V> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] < b[i] ? b[i] : a[i];
    return NonnegVariable<V>(a.space(), std::move(out));
}

/// Magnitudes as exact reals p^(-e).
RealVariable to_real(const MagnitudeVariable& m, std::int64_t p);

/// Finite partition of the outcome set: the atoms of a finitely generated sigma-field.
/// Atoms are stored sorted (members ascending, atoms by first member), so
/// structural equality is set equality.
class Partition {
public:
    Partition(SpacePtr space, std::vector<std::vector<std::size_t>> atoms);

    static Partition trivial(SpacePtr space);
    static Partition discrete(SpacePtr space);
    static Partition from_ids(SpacePtr space, const std::vector<std::vector<std::string>>& atoms);
    /// Partition whose atoms are the level sets of atom_label.
    static Partition from_labels(SpacePtr space, const std::vector<std::size_t>& atom_label);

    const SpacePtr& space() const { return space_; }
    const std::vector<std::vector<std::size_t>>& atoms() const { return atoms_; }
    const std::vector<std::size_t>& atom(std::size_t a) const { return atoms_[a]; }
    std::size_t atom_of(std::size_t outcome) const { return atom_of_[outcome]; }
    std::size_t size() const { return atoms_.size(); }

    friend bool operator==(const Partition& a, const Partition& b) {
        return same_space(a.space_, b.space_) && a.atoms_ == b.atoms_;
    }

private:
    SpacePtr space_;
    std::vector<std::vector<std::size_t>> atoms_;
    std::vector<std::size_t> atom_of_;
};

/// True iff every atom of `fine` lies inside one atom of `coarse`.
bool refine_check(const Partition& coarse, const Partition& fine);

/// Coarsest common refinement.
Partition common_refinement(const Partition& a, const Partition& b);

/// sigma(X_1, ..., X_k): atoms are the joint level sets (values compared exactly).
Partition generated_by(const std::vector<RandomVariableK>& vars);

bool is_measurable(const RandomVariableK& x, const Partition& g);

template <class V>
bool is_measurable(const NonnegVariable<V>& s, const Partition& g) {
    require_same_space(s.space(), g.space(), "is_measurable");
    for (const auto& atom : g.atoms())
        for (std::size_t i : atom)
            if (!(s[i] == s[atom.front()])) return false;
    return true;
}

/// X independent of G: P(X = x, A) = P(X = x) P(A) for every value x and atom A.
bool is_independent(const RandomVariableK& x, const Partition& g);

/// Non-decreasing sequence of partitions F_0, ..., F_horizon.
class Filtration {
public:
    explicit Filtration(std::vector<Partition> steps);

    const Partition& operator[](std::size_t n) const { return steps_[n]; }
    const std::vector<Partition>& steps() const { return steps_; }
    std::size_t horizon() const { return steps_.size() - 1; }
    const SpacePtr& space() const { return steps_.front().space(); }

    friend bool operator==(const Filtration&, const Filtration&) = default;

private:
    std::vector<Partition> steps_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

/// Bounded stopping time: {T = n} is a union of atoms of F_n for every n.
class StoppingTime {
public:
    StoppingTime(FiltrationPtr filtration, std::vector<std::size_t> times);

    static StoppingTime constant(FiltrationPtr filtration, std::size_t n);

    const FiltrationPtr& filtration() const { return filtration_; }
    const std::vector<std::size_t>& times() const { return times_; }
    std::size_t operator[](std::size_t outcome) const { return times_[outcome]; }
    std::size_t max_time() const;

private:
    FiltrationPtr filtration_;
    std::vector<std::size_t> times_;
};

/// Partition generating F_T: atoms of F_n lying inside {T = n}, over all n.
Partition sigma_T(const StoppingTime& t);

/// `count` draws from normalized Haar measure on p^k Z_p, truncated to N digits:
/// digits at positions k..k+N-1 are independent and uniform. Deterministic in seed.
std::vector<PadicNumber> haar_sample(std::int64_t k, std::int64_t p, int precision,
                                     std::size_t count, std::uint64_t seed);

/// Product of independent finite spaces with coordinate maps.
struct ProductSpace {
    SpacePtr space;
    std::vector<SpacePtr> factors;
    /// coordinates[i][omega] = index of omega's i-th coordinate in factors[i].
    std::vector<std::vector<std::size_t>> coordinates;

    /// Random variable on factor i pulled back to the product.
    RandomVariableK lift(std::size_t i, const RandomVariableK& on_factor) const;
    /// sigma(coordinates 0..n).
    Partition prefix_partition(std::size_t n) const;
};

ProductSpace independent_product(const std::vector<SpacePtr>& spaces);

}  // namespace ultraprob
