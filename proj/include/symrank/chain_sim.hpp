#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "symrank/exact_linalg.hpp"
#include "symrank/matrix_core.hpp"
#include "symrank/structure.hpp"

namespace symrank {

struct ChainStep {
    int n = 0;
    int rank = 0;
    int increment = 0;  // 0 by convention on the first step
    StructTag cls = StructTag::NotClassified;
    double x_value = 0.0;  // 0 when full rank, else 1.1^(n - rank)
};

struct ChainTrace {
    std::uint64_t seed = 0;
    std::string dist;
    double epsilon = 0.1;
    int classify_up_to = 0;
    std::vector<ChainStep> steps;  // dimensions 1..n_max
};

/// Builds the nested chain Q_1 in Q_2 in ... by repeated augmentation with
/// fresh randomness per step. Ranks come from certify_rank; the (rankn)
/// inequality 0 <= rank(Q_{n+1}) - rank(Q_n) <= 2 is asserted at runtime.
/// Steps with n <= classify_up_to are structurally classified; when
/// classify_dims is non-empty only those dimensions are classified.
ChainTrace run_chain(int n_max, const EntryDistribution& dist, std::uint64_t seed, double epsilon,
                     int classify_up_to = 16, std::span<const int> classify_dims = {});

/// Counts of (predecessor dimension, predecessor class, next increment),
/// mergeable across disjoint trace sets.
class IncrementStats {
public:
    void add(const ChainTrace& trace);
    void merge(const IncrementStats& other);

    struct Cond {
        long long hits = 0;
        long long total = 0;
        double freq = 0.0;
        double se = 0.0;
    };

    /// Frequency of `increment` given class `cls` at predecessor dimension n.
    Cond conditional(int n, StructTag cls, int increment) const;

    const std::map<std::tuple<int, StructTag, int>, long long>& counts() const { return counts_; }

private:
    std::map<std::tuple<int, StructTag, int>, long long> counts_;
};

IncrementStats conditional_increment_stats(std::span<const ChainTrace> traces);

struct XDecayRow {
    int n = 0;
    long long count = 0;
    double mean = 0.0;
    double se = 0.0;
};

std::vector<XDecayRow> x_decay_estimate(std::span<const ChainTrace> traces);

struct SurveyRow {
    int n = 0;
    long long trials = 0;
    long long singular_count = 0;
    Rat p_hat;
    double stderr_ = 0.0;
    double mean_log_det_scaled = 0.0;  // NaN when undefined (n == 1 or no samples)
    long long nonsingular_count = 0;
    bool exhaustive = false;
};

/// Independent samples of Q_n per dimension; singularity is certified
/// exactly. The scaled log-determinant statistic averages
/// log|det| / (n log n) over the non-singular samples.
std::vector<SurveyRow> survey_singularity(std::span<const int> ns, long long trials,
                                          const EntryDistribution& dist, std::uint64_t seed,
                                          int threads = 1, bool with_logdet = true);

/// Exact singular fraction over all 2^{n(n+1)/2} symmetric matrices with the
/// given two-atom entry distribution. Guarded at n(n+1)/2 <= 28.
SurveyRow exhaustive_survey_row(int n, const EntryDistribution& dist);

/// Ground-truth oracle: exact p_n for symmetric 0/1 matrices.
Rat exhaustive_singularity(int n);

}  // namespace symrank
