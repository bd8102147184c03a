#include "symrank/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symrank/parallel.hpp"
#include "symrank/rng.hpp"

namespace symrank {

namespace {

double x_functional(int n, int rank) {
    return rank == n ? 0.0 : std::pow(1.1, n - rank);
}

double binom_se(double p, long long trials) {
    return trials > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials)) : 0.0;
}

}  // namespace

ChainTrace run_chain(int n_max, const EntryDistribution& dist, std::uint64_t seed, double epsilon,
                     int classify_up_to, std::span<const int> classify_dims) {
    if (n_max < 1) throw std::invalid_argument("run_chain: n_max must be >= 1");
    ChainTrace trace;
    trace.seed = seed;
    trace.dist = dist.name();
    trace.epsilon = epsilon;
    trace.classify_up_to = classify_up_to;
    trace.steps.reserve(n_max);

    SymMatrix q;  // 0 x 0
    int prev_rank = 0;
    for (int n = 1; n <= n_max; ++n) {
        const AugmentationVector v =
            sample_augmentation(n - 1, dist, derive_seed(seed, SeedDomain::ChainStep, n));
        q = augment(q, v);
        const RankCertificate cert = certify_rank(q, default_primes());
        ChainStep step;
        step.n = n;
        step.rank = cert.rank;
        step.increment = (n == 1) ? 0 : cert.rank - prev_rank;
        if (n > 1 && (step.increment < 0 || step.increment > 2)) {
            throw std::logic_error("rank chain violated rank(Q_n) <= rank(Q_{n+1}) <= rank(Q_n)+2");
        }
        step.x_value = x_functional(n, cert.rank);
        const bool want_class =
            n <= classify_up_to &&
            (classify_dims.empty() || std::find(classify_dims.begin(), classify_dims.end(), n) !=
                                          classify_dims.end());
        if (want_class) {
            step.cls = classify_with_rank(q, compute_N(n, epsilon), cert.rank).tag;
        }
        trace.steps.push_back(step);
        prev_rank = cert.rank;
    }
    return trace;
}

void IncrementStats::add(const ChainTrace& trace) {
    for (std::size_t t = 0; t + 1 < trace.steps.size(); ++t) {
        const ChainStep& pred = trace.steps[t];
        const ChainStep& succ = trace.steps[t + 1];
        if (pred.cls == StructTag::NotClassified) continue;
        ++counts_[{pred.n, pred.cls, succ.increment}];
    }
}

void IncrementStats::merge(const IncrementStats& other) {
    for (const auto& [key, c] : other.counts_) counts_[key] += c;
}

IncrementStats::Cond IncrementStats::conditional(int n, StructTag cls, int increment) const {
    Cond out;
    for (const auto& [key, c] : counts_) {
        if (std::get<0>(key) != n || std::get<1>(key) != cls) continue;
        out.total += c;
        if (std::get<2>(key) == increment) out.hits += c;
    }
    if (out.total > 0) {
        out.freq = static_cast<double>(out.hits) / static_cast<double>(out.total);
        out.se = binom_se(out.freq, out.total);
    }
    return out;
}

IncrementStats conditional_increment_stats(std::span<const ChainTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("conditional_increment_stats: no traces");
    IncrementStats stats;
    for (const ChainTrace& t : traces) stats.add(t);
    return stats;
}

std::vector<XDecayRow> x_decay_estimate(std::span<const ChainTrace> traces) {
    int n_max = 0;
    for (const auto& t : traces) n_max = std::max(n_max, static_cast<int>(t.steps.size()));
    std::vector<XDecayRow> rows;
    for (int n = 1; n <= n_max; ++n) {
        XDecayRow row;
        row.n = n;
        double sum = 0;
        for (const auto& t : traces) {
            if (static_cast<int>(t.steps.size()) >= n) {
                sum += t.steps[n - 1].x_value;
                ++row.count;
            }
        }
        if (row.count > 0) {
            row.mean = sum / static_cast<double>(row.count);
            double ss = 0;
            for (const auto& t : traces) {
                if (static_cast<int>(t.steps.size()) >= n) {
                    const double d = t.steps[n - 1].x_value - row.mean;
                    ss += d * d;
                }
            }
            if (row.count > 1) {
                row.se = std::sqrt(ss / static_cast<double>(row.count - 1)) /
                         std::sqrt(static_cast<double>(row.count));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<SurveyRow> survey_singularity(std::span<const int> ns, long long trials,
                                          const EntryDistribution& dist, std::uint64_t seed,
                                          int threads, bool with_logdet) {
    if (trials < 1) throw std::invalid_argument("survey_singularity: trials must be >= 1");
    std::vector<SurveyRow> rows;
    for (const int n : ns) {
        if (n < 1) throw std::invalid_argument("survey_singularity: dimensions must be positive");
        struct Partial {
            long long singular = 0;
            long long nonsingular = 0;
            double logdet_sum = 0;
        };
        constexpr long long kBlock = 1 << 12;
        const std::uint64_t blocks = static_cast<std::uint64_t>((trials + kBlock - 1) / kBlock);
        std::vector<Partial> partial(blocks);
        const double denom = static_cast<double>(n) * std::log(static_cast<double>(n));
        parallel_units(blocks, threads, [&](std::uint64_t b) {
            Partial& mine = partial[b];
            const long long lo = static_cast<long long>(b) * kBlock;
            const long long hi = std::min(trials, lo + kBlock);
            for (long long t = lo; t < hi; ++t) {
                const std::uint64_t unit = (static_cast<std::uint64_t>(n) << 40) ^ static_cast<std::uint64_t>(t);
                const SymMatrix q =
                    sample_symmetric(n, dist, derive_seed(seed, SeedDomain::SurveyTrial, unit));
                const RankCertificate cert = certify_rank(q, default_primes());
                if (cert.rank < n) {
                    ++mine.singular;
                } else {
                    ++mine.nonsingular;
                    if (with_logdet && denom > 0) {
                        mine.logdet_sum += log_abs(det_exact(q)) / denom;
                    }
                }
            }
        });
        SurveyRow row;
        row.n = n;
        row.trials = trials;
        for (const Partial& p : partial) {
            row.singular_count += p.singular;
            row.nonsingular_count += p.nonsingular;
        }
        double logdet_sum = 0;
        for (const Partial& p : partial) logdet_sum += p.logdet_sum;
        row.p_hat = Rat(to_int(row.singular_count)) / to_rat(trials);
        row.p_hat.canonicalize();
        row.stderr_ = binom_se(row.p_hat.get_d(), trials);
        row.mean_log_det_scaled = (with_logdet && denom > 0 && row.nonsingular_count > 0)
                                      ? logdet_sum / static_cast<double>(row.nonsingular_count)
                                      : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

/// Destructive Bareiss determinant for tiny matrices; minors fit a word.
long long det_small_i64(long long* a, int n) {
    long long prev = 1;
    int sign = 1;
    for (int k = 0; k < n; ++k) {
        int piv = -1;
        for (int i = k; i < n; ++i)
            if (a[i * n + k] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) {
            // Current column is zero below the diagonal; the matrix is
            // singular unless a later column provides the pivot, which full
            // pivoting would catch. A column swap is enough here.
            int pj = -1;
            for (int j = k + 1; j < n && pj < 0; ++j)
                for (int i = k; i < n; ++i)
                    if (a[i * n + j] != 0) {
                        pj = j;
                        break;
                    }
            if (pj < 0) return 0;
            for (int i = 0; i < n; ++i) std::swap(a[i * n + k], a[i * n + pj]);
            sign = -sign;
            --k;
            continue;
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            sign = -sign;
        }
        const long long pivot = a[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const long long aik = a[i * n + k];
            for (int j = k + 1; j < n; ++j) {
                const __int128 num =
                    static_cast<__int128>(pivot) * a[i * n + j] - static_cast<__int128>(aik) * a[k * n + j];
                a[i * n + j] = static_cast<long long>(num / prev);
            }
            a[i * n + k] = 0;
        }
        prev = pivot;
    }
    return sign * prev;
}

}  // namespace

SurveyRow exhaustive_survey_row(int n, const EntryDistribution& dist) {
    if (n < 1) throw std::invalid_argument("exhaustive mode: dimension must be positive");
    if (dist.atoms().size() != 2) {
        throw std::invalid_argument("exhaustive mode supports two-atom distributions only");
    }
    const int m = n * (n + 1) / 2;
    if (m > 28) throw GuardError("exhaustive mode guarded at n(n+1)/2 <= 28");

    const long long v0 = dist.atoms()[0].value;
    const long long v1 = dist.atoms()[1].value;
    const double denom = static_cast<double>(n) * std::log(static_cast<double>(n));

    std::vector<long long> singular_by_ones(m + 1, 0);
    std::vector<long long> buf(static_cast<std::size_t>(n) * n);
    std::vector<long long> entries(static_cast<std::size_t>(n) * n);
    // Weighted log-det average: weight each matrix by its probability.
    std::vector<double> w1pow(m + 1), w0pow(m + 1);
    const double p0 = dist.atoms()[0].prob.get_d();
    const double p1 = dist.atoms()[1].prob.get_d();
    w0pow[0] = w1pow[0] = 1.0;
    for (int i = 1; i <= m; ++i) {
        w0pow[i] = w0pow[i - 1] * p0;
        w1pow[i] = w1pow[i - 1] * p1;
    }
    double logdet_wsum = 0, nonsing_wsum = 0;
    long long singular_total = 0;

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        int t = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j, ++t) {
                const long long v = ((mask >> t) & 1) ? v1 : v0;
                entries[static_cast<std::size_t>(i) * n + j] = v;
                entries[static_cast<std::size_t>(j) * n + i] = v;
            }
        }
        std::copy(entries.begin(), entries.end(), buf.begin());
        const long long det = det_small_i64(buf.data(), n);
        const int ones = static_cast<int>(__builtin_popcountll(mask));
        if (det == 0) {
            ++singular_total;
            ++singular_by_ones[ones];
        } else if (denom > 0) {
            const double w = w0pow[m - ones] * w1pow[ones];
            nonsing_wsum += w;
            logdet_wsum += w * std::log(std::fabs(static_cast<double>(det))) / denom;
        }
    }

    SurveyRow row;
    row.n = n;
    row.exhaustive = true;
    row.trials = 1LL << m;
    row.singular_count = singular_total;
    row.nonsingular_count = row.trials - singular_total;
    Rat p = 0;
    for (int ones = 0; ones <= m; ++ones) {
        if (singular_by_ones[ones] == 0) continue;
        Rat w = 1;
        for (int i = 0; i < ones; ++i) w *= dist.atoms()[1].prob;
        for (int i = 0; i < m - ones; ++i) w *= dist.atoms()[0].prob;
        p += to_rat(singular_by_ones[ones]) * w;
    }
    p.canonicalize();
    row.p_hat = p;
    row.stderr_ = 0.0;
    row.mean_log_det_scaled = (denom > 0 && nonsing_wsum > 0)
                                  ? logdet_wsum / nonsing_wsum
                                  : std::numeric_limits<double>::quiet_NaN();
    return row;
}

Rat exhaustive_singularity(int n) {
    return exhaustive_survey_row(n, EntryDistribution::bernoulli01()).p_hat;
}

}  // namespace symrank
