#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symrank/numeric.hpp"
#include "symrank/rng.hpp"

namespace symrank {

/// Finite atomic distribution on integers with exact rational probabilities.
/// Invariants enforced at construction: probabilities positive and summing to
/// exactly 1, at least two distinct atoms (so the max atom rho < 1).
class EntryDistribution {
public:
    enum class Tag { Bernoulli01, Rademacher, Custom };

    struct Atom {
        long long value;
        Rat prob;
    };

    static EntryDistribution bernoulli01();
    static EntryDistribution rademacher();
    static EntryDistribution custom(std::vector<Atom> atoms);

    /// Parses "bernoulli01", "rademacher" or "custom:v:p,v:p,..." (p as "a/b").
    static EntryDistribution parse(const std::string& spec);

    const std::vector<Atom>& atoms() const { return atoms_; }
    Tag tag() const { return tag_; }
    std::string name() const;

    /// Maximum atom probability (the rho of the rho-property).
    Rat max_atom() const;

    bool is_atom(long long v) const;
    bool uniform() const { return uniform_; }

    /// One exact draw: a uniform integer below the common denominator selects
    /// an atom through the cumulative numerator table.
    long long sample(Rng& rng) const;

private:
    EntryDistribution(Tag tag, std::vector<Atom> atoms);

    Tag tag_;
    std::vector<Atom> atoms_;
    std::uint64_t common_den_ = 0;
    std::vector<std::uint64_t> cum_num_;
    bool uniform_ = false;
};

Rat rho_of(const EntryDistribution& dist);

/// Square integer matrix with entries kept symmetric by construction.
class SymMatrix {
public:
    SymMatrix() : n_(0) {}
    explicit SymMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n, 0) {}

    /// Builds from explicit rows; throws if not symmetric.
    static SymMatrix from_rows(const std::vector<std::vector<long long>>& rows);

    int dim() const { return n_; }
    long long at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }

    /// Sets both (i,j) and (j,i).
    void set_sym(int i, int j, long long v) {
        e_[static_cast<std::size_t>(i) * n_ + j] = v;
        e_[static_cast<std::size_t>(j) * n_ + i] = v;
    }

    std::span<const long long> row(int i) const {
        return {e_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
    }

    /// Full-scan symmetry check (the invariant is maintained by construction;
    /// this exists so tests can verify it independently).
    bool is_symmetric() const;

    bool operator==(const SymMatrix&) const = default;

private:
    int n_;
    std::vector<long long> e_;
};

/// Border column plus the new diagonal corner entry used to grow an n x n
/// symmetric matrix into an (n+1) x (n+1) one.
struct AugmentationVector {
    std::vector<long long> border;
    long long corner = 0;
};

/// Samples the upper triangle (diagonal included) i.i.d. from `dist`, row by
/// row, and mirrors it. Pure function of (n, dist, seed).
SymMatrix sample_symmetric(int n, const EntryDistribution& dist, std::uint64_t seed);

/// Same, but the diagonal is drawn from a separate distribution.
SymMatrix sample_symmetric(int n, const EntryDistribution& offdiag, const EntryDistribution& diag,
                           std::uint64_t seed);

/// Border entries first (index order), then the corner.
AugmentationVector sample_augmentation(int n, const EntryDistribution& dist, std::uint64_t seed);

/// Returns the (n+1) x (n+1) matrix with `a` as leading principal block,
/// v.border as last column/row and v.corner in the bottom-right cell.
SymMatrix augment(const SymMatrix& a, const AugmentationVector& v);

}  // namespace symrank
