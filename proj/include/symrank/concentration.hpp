#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "symrank/matrix_core.hpp"
#include "symrank/numeric.hpp"

namespace symrank {

struct LinearForm {
    std::vector<Rat> coeffs;  // length >= 1
};

/// Degree-k multilinear form sum c_{i_1..i_k} z_{i_1} ... z_{i_k} given as a
/// map from index tuples to exact rational coefficients.
struct PolyForm {
    int degree = 1;
    int nvars = 0;
    std::vector<std::pair<std::vector<int>, Rat>> terms;  // sorted, unique tuples

    static PolyForm from_terms(int degree, int nvars,
                               std::vector<std::pair<std::vector<int>, Rat>> terms);

    Rat eval(std::span<const long long> z) const;
};

/// Half-open interval [left, left+length) for length > 0; a closed point {c}
/// when length == 0.
struct Interval {
    Rat left;
    Rat length;

    static Interval point(Rat c) { return Interval{std::move(c), Rat(0)}; }
    static Interval half_open(Rat left, Rat length);

    bool contains(const Rat& x) const {
        if (length == 0) return x == left;
        return left <= x && x < left + length;
    }
    std::string str() const;
};

enum class Method { ExactDP, ExactEnum, MonteCarlo };

std::string to_string(Method m);

struct ConcentrationReport {
    std::string form;
    std::string interval;
    int size = 0;
    Method method = Method::ExactEnum;
    bool exact = false;
    Rat prob;                // valid when exact
    double estimate = 0.0;   // exact value as double, or the MC estimate
    double stderr_ = 0.0;    // 0 for exact methods
    long long trials = 0;    // 0 for exact methods
    std::string atom_value;  // argmax value for max-atom reports
    double bound = 0.0;      // theoretical bound (NaN when hypothesis unmet)
    bool hypothesis_met = true;
};

/// Exact P(f(z) in I) under i.i.d. entries from dist. Integer coefficients
/// run through a dynamic program over achievable sums; rational ones are
/// allowed only up to n <= 24 (beyond that a GuardError points to Monte
/// Carlo).
Rat atom_linear_exact(const LinearForm& f, const Interval& i, const EntryDistribution& dist);

/// Sharp classical bound binomial(k, floor(k/2)) / 2^k, which witnesses the
/// O(k^{-1/2}) decay rate.
Rat erdos_bound(int k);

struct MonteCarloMode {
    long long trials = 0;
    std::uint64_t seed = 0;
};

/// Exact P(f in I) by full enumeration (guarded), or an unbiased Monte Carlo
/// estimate with standard error. Deterministic given the seed.
ConcentrationReport atom_poly(const PolyForm& f, const Interval& i, const EntryDistribution& dist,
                              Method method, const MonteCarloMode& mc = {}, int threads = 1);

/// C * (S^{-1/2} + S^{-1} sum d_i^{-1/2})^{1/4}; every d_i must be >= 1.
double quad_lo_bound(int s_size, std::span<const int> d_values, double c);

/// 2^{-(k^2+k)/2}.
Rat poly_lo_exponent(int k);

/// Independent finite-support variable for decoupling checks.
struct FiniteVar {
    std::vector<std::pair<long long, Rat>> atoms;

    static FiniteVar uniform_bits(int bits);  // uniform on {0 .. 2^bits - 1}
    void validate() const;
};

/// Exact check of the 2^k-fold decoupling inequality
///   P(E)^{2^k} <= P( AND over all S subset of {1..k} of E(X^S) ).
/// p_joint is the right-hand probability; holds compares exactly in rational
/// arithmetic (never through floating roots).
struct DecouplingResult {
    int k = 0;
    Rat p_event;
    Rat p_joint;
    bool holds = false;
    double rhs_root() const;  // p_joint^(1/2^k), for display only
};

DecouplingResult decoupling_check(std::span<const FiniteVar> vars,
                                  const std::function<bool(std::span<const long long>)>& event,
                                  std::uint64_t outcome_guard = std::uint64_t{1} << 22);

/// Parametrized form family for concentration experiments.
struct FormFamily {
    std::string name;
    std::function<PolyForm(int)> make;
};

PolyForm all_ones_offdiag_form(int m);  // sum over ordered pairs i != j of z_i z_j
PolyForm all_ones_linear_form(int k);
PolyForm diagonal_only_form(int m);
FormFamily family_by_name(const std::string& name);

/// For each size, measures the maximum point atom of the family member
/// (exactly within the guard, else Monte Carlo with `trials` samples) and
/// pairs it with the theoretical bound; the bound constant is fitted at the
/// first size whose hypothesis is met.
std::vector<ConcentrationReport> lo_experiment(const FormFamily& family, std::span<const int> sizes,
                                               long long trials, std::uint64_t seed,
                                               const EntryDistribution& dist, int threads = 1,
                                               std::uint64_t exact_guard = std::uint64_t{1} << 24);

namespace detail {

/// Exact value distribution: scaled integer value -> probability, where the
/// true value is key / scale.
struct ValueDist {
    Int scale = 1;
    std::map<Int, Rat> prob;
};

ValueDist value_distribution(const PolyForm& f, const EntryDistribution& dist,
                             std::uint64_t outcome_guard);

}  // namespace detail

}  // namespace symrank
