#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "symrank/rng.hpp"
#include "symrank/structure.hpp"

using namespace symrank;

namespace {

SymMatrix random_sym(int n, const EntryDistribution& dist, std::uint64_t unit) {
    return sample_symmetric(n, dist, derive_seed(0x57, SeedDomain::MatrixEntries, unit));
}

/// Brute-force minimum circuit: scan all row subsets by size, rational rank.
std::optional<std::vector<int>> brute_min_circuit(const SymMatrix& a, int bound) {
    const int n = a.dim();
    for (int k = 1; k < bound && k <= n; ++k) {
        std::vector<int> idx(k);
        std::function<std::optional<std::vector<int>>(int, int)> rec =
            [&](int pos, int start) -> std::optional<std::vector<int>> {
            if (pos == k) {
                std::vector<std::vector<long long>> sub;
                for (int i : idx) sub.emplace_back(a.row(i).begin(), a.row(i).end());
                if (oracles::rref_rank_ll(sub, n) != k - 1) return std::nullopt;
                // minimality: every (k-1)-subset independent
                for (int drop = 0; drop < k; ++drop) {
                    std::vector<std::vector<long long>> s2;
                    for (int t = 0; t < k; ++t)
                        if (t != drop) s2.emplace_back(a.row(idx[t]).begin(), a.row(idx[t]).end());
                    if (oracles::rref_rank_ll(s2, n) != static_cast<int>(s2.size())) return std::nullopt;
                }
                return idx;
            }
            for (int i = start; i <= n - (k - pos); ++i) {
                idx[pos] = i;
                if (auto r = rec(pos + 1, i + 1)) return r;
            }
            return std::nullopt;
        };
        if (auto r = rec(0, 0)) return r;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("compute_N") {
    CHECK(compute_N(1, 0.1).N == 1);
    CHECK(compute_N(100, 0.5).N == 10);
    CHECK(compute_N(10, 0.1).N == 8);  // ceil(10^0.9) = ceil(7.94...)
    CHECK(compute_N(0, 0.3).N == 1);
    CHECK(compute_N(16, 0.1).N == 13);
    CHECK_THROWS_AS(compute_N(5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_N(5, 1.0), std::invalid_argument);
}

TEST_CASE("min_dependent_support examples") {
    SymMatrix id4(4);
    for (int i = 0; i < 4; ++i) id4.set_sym(i, i, 1);
    CHECK_FALSE(min_dependent_support(id4, 4).has_value());

    // a zero row is a degree-1 circuit
    auto z = SymMatrix::from_rows({{1, 0, 1}, {0, 0, 0}, {1, 0, 1}});
    const auto w1 = min_dependent_support(z, 2);
    REQUIRE(w1.has_value());
    CHECK(w1->rows == std::vector<int>{1});

    const auto w2 = min_dependent_support(z, 3);
    REQUIRE(w2.has_value());
    CHECK(w2->rows == std::vector<int>{1});  // the singleton still wins

    // duplicated rows give the circuit {0, 2} with coefficients (1, -1)
    auto dup = SymMatrix::from_rows({{1, 1, 1}, {1, 0, 1}, {1, 1, 1}});
    const auto w3 = min_dependent_support(dup, 3);
    REQUIRE(w3.has_value());
    CHECK(w3->rows == std::vector<int>{0, 2});
    CHECK(w3->coeffs == std::vector<Int>{1, -1});
}

TEST_CASE("min_dependent_support matches brute force and witnesses are valid") {
    const auto dist = EntryDistribution::bernoulli01();
    int found = 0;
    for (int t = 0; t < 400; ++t) {
        const int n = 3 + t % 5;
        const auto q = random_sym(n, dist, t);
        const auto got = min_dependent_support(q, n + 1);
        const auto expect = brute_min_circuit(q, n + 1);
        CHECK(got.has_value() == expect.has_value());
        if (got && expect) {
            ++found;
            CHECK(got->rows == *expect);
            // the combination annihilates the rows exactly, all coeffs non-zero
            REQUIRE(got->coeffs.size() == got->rows.size());
            for (const Int& c : got->coeffs) CHECK(c != 0);
            for (int j = 0; j < n; ++j) {
                Int dot = 0;
                for (std::size_t t2 = 0; t2 < got->rows.size(); ++t2) {
                    dot += got->coeffs[t2] * to_int(q.at(got->rows[t2], j));
                }
                CHECK(dot == 0);
            }
        }
    }
    CHECK(found > 50);
}

TEST_CASE("classify_singular contract and examples") {
    const SymMatrix zero2(2);
    // N = 1: no combination of degree < 1 exists
    CHECK(classify_singular(zero2, DegreeThreshold{2, 0.5, 1}).tag == StructTag::SingularNormal);
    const auto c = classify_singular(zero2, DegreeThreshold{2, 0.5, 2});
    CHECK(c.tag == StructTag::SingularAbnormal);
    REQUIRE(c.circuit.has_value());
    CHECK(c.circuit->rows.size() == 1);

    SymMatrix id2(2);
    id2.set_sym(0, 0, 1);
    id2.set_sym(1, 1, 1);
    CHECK_THROWS_AS(classify_singular(id2, compute_N(2, 0.1)), std::invalid_argument);
}

TEST_CASE("abnormality is monotone in the threshold") {
    const auto dist = EntryDistribution::bernoulli01();
    for (int t = 0; t < 300; ++t) {
        const int n = 4 + t % 4;
        const auto q = random_sym(n, dist, 5000 + t);
        if (rank_exact(q) == n) continue;
        bool prev = false;
        for (int N = 1; N <= n + 1; ++N) {
            const bool abnormal =
                classify_singular(q, DegreeThreshold{n, 0.1, N}).tag == StructTag::SingularAbnormal;
            if (prev) CHECK(abnormal);  // once abnormal, abnormal at every larger N
            prev = abnormal;
        }
    }
}

TEST_CASE("row_null_support examples") {
    SymMatrix id3(3);
    for (int i = 0; i < 3; ++i) id3.set_sym(i, i, 1);
    for (int i = 0; i < 3; ++i) CHECK(row_null_support(id3, i) == 1);

    const auto swap2 = SymMatrix::from_rows({{0, 1}, {1, 0}});
    CHECK(row_null_support(swap2, 0) == 1);

    CHECK_THROWS_AS(row_null_support(SymMatrix(2), 0), std::invalid_argument);
    CHECK_THROWS_AS(row_null_support(id3, 5), std::invalid_argument);
}

TEST_CASE("duality: nullspace support equals adjugate support") {
    const auto dist = EntryDistribution::bernoulli01();
    int tested = 0;
    for (int t = 0; tested < 60; ++t) {
        const int n = 2 + t % 8;
        const auto q = random_sym(n, dist, 9000 + t);
        if (rank_exact(q) != n) continue;
        ++tested;
        const auto fast = row_null_supports_all(q);
        for (int i = 0; i < n; ++i) CHECK(row_null_support(q, i) == fast[i]);
    }
}

TEST_CASE("classify_nonsingular examples and contract") {
    SymMatrix id4(4);
    for (int i = 0; i < 4; ++i) id4.set_sym(i, i, 1);
    const auto imp = classify_nonsingular(id4, DegreeThreshold{4, 0.1, 2});
    CHECK(imp.tag == StructTag::NonsingularImperfect);
    REQUIRE(imp.bad_row.has_value());

    // N = 1: support >= 1 always, so everything is perfect
    CHECK(classify_nonsingular(id4, DegreeThreshold{4, 0.1, 1}).tag == StructTag::NonsingularPerfect);

    CHECK_THROWS_AS(classify_nonsingular(SymMatrix(3), compute_N(3, 0.1)), std::invalid_argument);
}

TEST_CASE("count_01_points_in_span examples") {
    // span{e_1} in dimension 2 contains (0,0) and (1,0)
    CHECK(count_01_points_in_span({{Rat(1), Rat(0)}}, 2) == 2);

    // full space
    std::vector<std::vector<Rat>> full;
    for (int i = 0; i < 5; ++i) {
        std::vector<Rat> e(5, Rat(0));
        e[i] = 1;
        full.push_back(e);
    }
    CHECK(count_01_points_in_span(full, 5) == 32);

    // empty basis spans only the origin
    CHECK(count_01_points_in_span({}, 3) == 1);

    CHECK_THROWS_AS(count_01_points_in_span({}, 30), GuardError);
}

TEST_CASE("subspace lemma: random spans hold at most 2^d points") {
    Rng rng(derive_seed(11, SeedDomain::SpanGen, 0));
    for (int t = 0; t < 200; ++t) {
        const int n = 4 + static_cast<int>(rng.below(9));  // 4..12
        const int d = 1 + static_cast<int>(rng.below(6));  // 1..6
        std::vector<std::vector<Rat>> basis(d, std::vector<Rat>(n));
        for (auto& v : basis)
            for (auto& x : v) x = to_rat(static_cast<long long>(rng.below(5)) - 2);
        // actual dimension may be smaller than d; bound with the exact rank
        const int dim = oracles::rref_rank(basis, n);
        const long long count = count_01_points_in_span(basis, n);
        CHECK(count <= (1LL << dim));
        // cross-check against brute-force span membership on small cases
        if (n <= 8) {
            long long brute = 0;
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
                std::vector<Rat> v(n);
                for (int j = 0; j < n; ++j) v[j] = to_rat((mask >> j) & 1);
                if (oracles::in_span(basis, v, n)) ++brute;
            }
            CHECK(count == brute);
        }
    }
}

TEST_CASE("abnormal and imperfect fractions decay with n" * doctest::timeout(900)) {
    // Empirical counterpart of the O((2/3)^n) lemmas: the class fractions
    // fall as n grows; only the trend is asserted, never a constant.
    const auto dist = EntryDistribution::bernoulli01();
    const double eps = 0.1;
    std::vector<double> abn_frac, abn_se, imp_frac, imp_se;
    for (const int n : {6, 8, 10, 12}) {
        const auto thr = compute_N(n, eps);
        long long singular = 0, abnormal = 0, nonsingular = 0, imperfect = 0;
        const long long want_singular = 1500;
        long long t = 0;
        while (singular < want_singular) {
            const auto q = random_sym(n, dist, 100000ull * n + t);
            ++t;
            const int rank = rank_exact(q);
            if (rank < n) {
                ++singular;
                if (classify_with_rank(q, thr, rank).tag == StructTag::SingularAbnormal) ++abnormal;
            } else {
                ++nonsingular;
                if (classify_with_rank(q, thr, rank).tag == StructTag::NonsingularImperfect)
                    ++imperfect;
            }
        }
        const double fa = static_cast<double>(abnormal) / static_cast<double>(singular);
        const double fi = static_cast<double>(imperfect) / static_cast<double>(nonsingular);
        abn_frac.push_back(fa);
        abn_se.push_back(std::sqrt(fa * (1 - fa) / static_cast<double>(singular)));
        imp_frac.push_back(fi);
        imp_se.push_back(std::sqrt(fi * (1 - fi) / static_cast<double>(nonsingular)));
        CHECK(fa < 1.0);  // strictly below 1: normal singular matrices exist
    }
    auto decreasing_3sigma = [](const std::vector<double>& f, const std::vector<double>& se) {
        const double drop = f.front() - f.back();
        const double sigma = std::sqrt(se.front() * se.front() + se.back() * se.back());
        if (drop <= 3 * sigma) return false;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            const double s = std::sqrt(se[i] * se[i] + se[i + 1] * se[i + 1]);
            if (f[i + 1] - f[i] > 3 * s) return false;  // no significant increase anywhere
        }
        return true;
    };
    CHECK(decreasing_3sigma(abn_frac, abn_se));
    CHECK(decreasing_3sigma(imp_frac, imp_se));
}
