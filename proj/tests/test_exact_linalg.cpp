#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "symrank/exact_linalg.hpp"
#include "symrank/rng.hpp"

using namespace symrank;

namespace {

SymMatrix random_sym(int n, const EntryDistribution& dist, std::uint64_t unit) {
    return sample_symmetric(n, dist, derive_seed(0xE1, SeedDomain::MatrixEntries, unit));
}

}  // namespace

TEST_CASE("rank_mod_p basics") {
    const auto id3 = SymMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK(rank_mod_p(id3, 2) == 3);
    const SymMatrix zero4(4);
    CHECK(rank_mod_p(zero4, 2) == 0);
    CHECK(rank_mod_p(zero4, 4611686018427387847ull) == 0);

    // characteristic artifact: modular rank undercounts when p | det
    const auto twos = SymMatrix::from_rows({{2, 0}, {0, 2}});
    CHECK(rank_mod_p(twos, 2) == 0);
    CHECK(rank_exact(twos) == 2);

    CHECK_THROWS_AS(rank_mod_p(id3, 4), std::invalid_argument);
}

TEST_CASE("rank_exact examples") {
    CHECK(rank_exact(SymMatrix::from_rows({{0, 1}, {1, 0}})) == 2);
    CHECK(rank_exact(SymMatrix::from_rows({{1, 1}, {1, 1}})) == 1);

    // exhaustive: exactly 4 of the 8 symmetric 0/1 2x2 matrices are rank deficient
    int deficient = 0;
    oracles::for_each_symmetric(2, 0, 1, [&](const SymMatrix& q) {
        if (rank_exact(q) < 2) ++deficient;
    });
    CHECK(deficient == 4);
}

TEST_CASE("det_exact examples and cofactor oracle") {
    CHECK(det_exact(SymMatrix::from_rows({{0, 1}, {1, 0}})) == -1);
    SymMatrix id6(6);
    for (int i = 0; i < 6; ++i) id6.set_sym(i, i, 1);
    CHECK(det_exact(id6) == 1);

    const auto dist = EntryDistribution::bernoulli01();
    for (int t = 0; t < 50; ++t) {
        const auto q = random_sym(8, dist, t);
        CHECK(det_exact(q) == oracles::naive_det(q));
    }
    // +-1 entries as well
    const auto rad = EntryDistribution::rademacher();
    for (int t = 0; t < 30; ++t) {
        const auto q = random_sym(7, rad, 1000 + t);
        CHECK(det_exact(q) == oracles::naive_det(q));
    }
}

TEST_CASE("word-size and big-integer elimination paths agree") {
    // Entries large enough that the Hadamard bound rejects the i64 path.
    const auto dist = EntryDistribution::custom(
        {{-3000000000LL, make_rat(1, 2)}, {3000000001LL, make_rat(1, 2)}});
    for (int t = 0; t < 6; ++t) {
        const auto q = random_sym(6, dist, t);
        std::vector<std::vector<long long>> rows(q.dim());
        for (int i = 0; i < q.dim(); ++i) rows[i].assign(q.row(i).begin(), q.row(i).end());
        CHECK_FALSE(detail::minors_fit_i64(rows));
        CHECK(det_exact(q) == oracles::naive_det(q));
        CHECK(rank_exact(q) == oracles::rref_rank_ll(rows, q.dim()));
    }
}

TEST_CASE("rank_mod_p is a lower bound for rank_exact") {
    const auto dist = EntryDistribution::bernoulli01();
    for (int t = 0; t < 200; ++t) {
        const auto q = random_sym(1 + t % 9, dist, 40000 + t);
        const int re = rank_exact(q);
        for (std::uint64_t p : {2ull, 3ull, 4611686018427387847ull}) {
            CHECK(rank_mod_p(q, p) <= re);
        }
        CHECK((rank_exact(q) == q.dim()) == (det_exact(q) != 0));
    }
}

TEST_CASE("certify_rank") {
    SymMatrix id5(5);
    for (int i = 0; i < 5; ++i) id5.set_sym(i, i, 1);
    const auto c1 = certify_rank(id5, default_primes());
    CHECK(c1.rank == 5);
    CHECK_FALSE(c1.exact_confirmed);
    CHECK(c1.modular_evidence.size() == 1);  // first prime already certifies

    const auto c2 = certify_rank(SymMatrix(3), default_primes());
    CHECK(c2.rank == 0);
    CHECK(c2.exact_confirmed);

    const auto twos = SymMatrix::from_rows({{2, 0}, {0, 2}});
    const std::uint64_t p2[] = {2};
    const auto c3 = certify_rank(twos, p2);
    CHECK(c3.rank == 2);
    CHECK(c3.exact_confirmed);
    CHECK(c3.modular_evidence.front().second == 0);

    const auto c4 = certify_rank(id5, default_primes(), /*force_exact=*/true);
    CHECK(c4.rank == 5);
    CHECK(c4.exact_confirmed);

    CHECK_THROWS_AS(certify_rank(id5, {}), std::invalid_argument);
    // every modular rank is <= the certified rank
    for (int t = 0; t < 50; ++t) {
        const auto q = random_sym(6, EntryDistribution::bernoulli01(), 90000 + t);
        const auto cert = certify_rank(q, default_primes());
        for (const auto& [p, r] : cert.modular_evidence) CHECK(r <= cert.rank);
    }
}

TEST_CASE("nullspace examples and normalization") {
    SymMatrix id3(3);
    for (int i = 0; i < 3; ++i) id3.set_sym(i, i, 1);
    std::vector<std::vector<long long>> rows(3);
    for (int i = 0; i < 3; ++i) rows[i].assign(id3.row(i).begin(), id3.row(i).end());
    CHECK(nullspace_rational(rows, 3).empty());

    const auto ns1 = nullspace_rational(std::vector<std::vector<long long>>{{1, 1}, {1, 1}}, 2);
    REQUIRE(ns1.size() == 1);
    CHECK(ns1[0] == std::vector<Int>{1, -1});

    const auto ns2 = nullspace_rational(std::vector<std::vector<long long>>{{1, 2}}, 2);
    REQUIRE(ns2.size() == 1);
    CHECK(ns2[0] == std::vector<Int>{2, -1});

    // 0 x n matrix: everything is in the nullspace
    const auto ns3 = nullspace_rational(std::vector<std::vector<long long>>{}, 2);
    CHECK(ns3.size() == 2);

    // basis vectors annihilate the rows exactly
    for (int t = 0; t < 40; ++t) {
        const auto q = random_sym(6, EntryDistribution::bernoulli01(), 50000 + t);
        std::vector<std::vector<long long>> r(q.dim());
        for (int i = 0; i < q.dim(); ++i) r[i].assign(q.row(i).begin(), q.row(i).end());
        for (const auto& v : nullspace_rational(r, q.dim())) {
            for (int i = 0; i < q.dim(); ++i) {
                Int dot = 0;
                for (int j = 0; j < q.dim(); ++j) dot += to_int(q.at(i, j)) * v[j];
                CHECK(dot == 0);
            }
            Int g = 0;
            for (const auto& x : v) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
            CHECK(g == 1);
        }
    }
}

TEST_CASE("adjugate closed form and identity") {
    const auto m = SymMatrix::from_rows({{3, -2}, {-2, 7}});
    const auto adj = adjugate(m);
    CHECK(adj[0][0] == 7);
    CHECK(adj[0][1] == 2);
    CHECK(adj[1][0] == 2);
    CHECK(adj[1][1] == 3);

    SymMatrix id4(4);
    for (int i = 0; i < 4; ++i) id4.set_sym(i, i, 1);
    const auto adj_id = adjugate(id4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(adj_id[i][j] == (i == j ? 1 : 0));

    CHECK(adjugate(SymMatrix::from_rows({{0}}))[0][0] == 1);
}

TEST_CASE("A * adj(A) == det(A) * I, singular included") {
    const auto dist = EntryDistribution::bernoulli01();
    const auto rad = EntryDistribution::rademacher();
    int singular_seen = 0;
    for (int t = 0; t < 120; ++t) {
        const int n = 1 + t % 10;
        const auto q = random_sym(n, t % 2 ? dist : rad, 60000 + t);
        const auto adj = adjugate(q);
        const Int det = det_exact(q);
        if (det == 0) ++singular_seen;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Int dot = 0;
                for (int k = 0; k < n; ++k) dot += to_int(q.at(i, k)) * adj[k][j];
                CHECK(dot == (i == j ? det : Int(0)));
            }
        }
    }
    CHECK(singular_seen > 0);  // the Gauss-Jordan and minors paths were both hit
}

TEST_CASE("augmented_det_form closed forms") {
    // A = [[1]]: F(x1, x2) = x2 - x1^2
    const auto f1 = augmented_det_form(SymMatrix::from_rows({{1}}));
    CHECK(f1.nvars == 2);
    CHECK(f1.eval(std::vector<long long>{3, 5}) == 5 - 9);

    // A = [[0]]: F = -x1^2
    const auto f0 = augmented_det_form(SymMatrix(1));
    CHECK(f0.eval(std::vector<long long>{3, 5}) == -9);

    // empty A: F(x1) = x1
    const auto fe = augmented_det_form(SymMatrix());
    CHECK(fe.eval(std::vector<long long>{7}) == 7);
}

TEST_CASE("augmented_det_form identity, exhaustive n<=4 then random") {
    const auto dist = EntryDistribution::bernoulli01();
    for (int n = 0; n <= 4; ++n) {
        for (int t = 0; t < 6; ++t) {
            const auto a = random_sym(n, dist, 70000 + 10 * n + t);
            const auto f = augmented_det_form(a);
            const auto folded = f.folded_01();
            std::vector<long long> v(n + 1);
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n + 1)); ++mask) {
                AugmentationVector av;
                av.border.resize(n);
                for (int i = 0; i < n; ++i) av.border[i] = (mask >> i) & 1;
                av.corner = (mask >> n) & 1;
                for (int i = 0; i < n; ++i) v[i] = av.border[i];
                v[n] = av.corner;
                const Int expect = det_exact(augment(a, av));
                CHECK(f.eval(v) == expect);
                CHECK(folded.eval(v) == expect);  // x^2 == x on 0/1 inputs
            }
        }
    }
    // random v at larger n, both 0/1 and +-1 entry models
    Rng rng(derive_seed(7, SeedDomain::MatrixEntries, 0));
    for (int t = 0; t < 20; ++t) {
        const int n = 5 + t % 8;
        const auto a = random_sym(n, t % 2 ? dist : EntryDistribution::rademacher(), 80000 + t);
        const auto f = augmented_det_form(a);
        for (int rep = 0; rep < 10; ++rep) {
            AugmentationVector av;
            av.border.resize(n);
            std::vector<long long> v(n + 1);
            for (int i = 0; i < n; ++i) {
                av.border[i] = static_cast<long long>(rng.below(2));
                v[i] = av.border[i];
            }
            av.corner = static_cast<long long>(rng.below(2));
            v[n] = av.corner;
            CHECK(f.eval(v) == det_exact(augment(a, av)));
        }
    }
}
