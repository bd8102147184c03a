#include "symrank/structure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace symrank {

DegreeThreshold compute_N(int n, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
    if (n < 0) throw std::invalid_argument("negative dimension");
    // The 1e-9 nudge absorbs representation noise when n^(1-eps) is an exact
    // integer (e.g. 100^0.5), so the ceiling does not jump a whole step.
    const long double t = std::pow(static_cast<long double>(n), 1.0L - static_cast<long double>(epsilon));
    long long N = static_cast<long long>(std::ceil(t - 1e-9L));
    if (N < 1) N = 1;
    return DegreeThreshold{n, epsilon, static_cast<int>(N)};
}

std::string to_string(StructTag t) {
    switch (t) {
        case StructTag::SingularNormal:
            return "singular_normal";
        case StructTag::SingularAbnormal:
            return "singular_abnormal";
        case StructTag::NonsingularPerfect:
            return "nonsingular_perfect";
        case StructTag::NonsingularImperfect:
            return "nonsingular_imperfect";
        case StructTag::NotClassified:
            return "not_classified";
    }
    return "?";
}

namespace {

void normalize_int_vec(std::vector<Int>& w) {
    Int g = 0;
    for (const Int& x : w) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1)
        for (Int& x : w) x /= g;
    for (const Int& x : w) {
        if (x != 0) {
            if (x < 0)
                for (Int& y : w) y = -y;
            break;
        }
    }
}

std::vector<int> support_of(const std::vector<Int>& v) {
    std::vector<int> s;
    for (int i = 0; i < static_cast<int>(v.size()); ++i)
        if (v[i] != 0) s.push_back(i);
    return s;
}

CircuitWitness make_witness(const std::vector<Int>& full) {
    CircuitWitness w;
    for (int i = 0; i < static_cast<int>(full.size()); ++i) {
        if (full[i] != 0) {
            w.rows.push_back(i);
            w.coeffs.push_back(full[i]);
        }
    }
    return w;
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Enumerates k-subsets of 0..m-1 in lexicographic order.
bool next_subset(std::vector<int>& idx, int m) {
    const int k = static_cast<int>(idx.size());
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    return true;
}

}  // namespace

std::optional<CircuitWitness> min_dependent_support(const SymMatrix& a, int bound) {
    if (bound < 1) throw std::invalid_argument("bound must be >= 1");
    const int n = a.dim();
    if (bound <= 1 || n == 0) return std::nullopt;  // only sizes 1..bound-1 are searched

    // Row combinations c with sum_i c_i row_i = 0 are right-nullspace vectors
    // of A^T; A is symmetric, so of A itself.
    std::vector<std::vector<long long>> rows(n);
    for (int i = 0; i < n; ++i) rows[i].assign(a.row(i).begin(), a.row(i).end());
    const auto basis = nullspace_rational(rows, n);
    const int d = static_cast<int>(basis.size());
    if (d == 0) return std::nullopt;

    std::set<int> union_support;
    for (const auto& w : basis)
        for (int i : support_of(w)) union_support.insert(i);
    const std::vector<int> u(union_support.begin(), union_support.end());
    const int usz = static_cast<int>(u.size());

    if (d == 1) {
        // One-dimensional nullspace: the unique circuit is the support itself.
        const auto supp = support_of(basis[0]);
        if (static_cast<int>(supp.size()) < bound) return make_witness(basis[0]);
        return std::nullopt;
    }

    // Every circuit is the support of a nullspace vector pinned down by d-1
    // independent vanishing-coordinate constraints, so enumerating (d-1)-
    // subsets of the support closure finds them all.
    if (d - 1 <= usz && log_choose(usz, d - 1) < std::log(5e5)) {
        std::optional<CircuitWitness> best;
        std::vector<int> z(d - 1);
        for (int i = 0; i < d - 1; ++i) z[i] = i;
        do {
            std::vector<std::vector<Rat>> constraints(d - 1, std::vector<Rat>(d));
            for (int t = 0; t < d - 1; ++t)
                for (int b = 0; b < d; ++b) constraints[t][b] = Rat(basis[b][u[z[t]]]);
            const auto kernel = nullspace_rational(constraints, d);
            if (kernel.size() != 1) continue;
            std::vector<Int> v(n, Int(0));
            for (int b = 0; b < d; ++b)
                if (kernel[0][b] != 0)
                    for (int i = 0; i < n; ++i) v[i] += kernel[0][b] * basis[b][i];
            normalize_int_vec(v);
            const auto supp = support_of(v);
            if (supp.empty() || static_cast<int>(supp.size()) >= bound) continue;
            if (!best || supp.size() < best->rows.size() ||
                (supp.size() == best->rows.size() && supp < best->rows)) {
                best = make_witness(v);
            }
        } while (next_subset(z, usz));
        return best;
    }

    // Fallback: breadth-first over support sizes within the closure.
    if (n > 32) throw GuardError("min_dependent_support: exhaustive circuit search guarded at n <= 32");
    double work = 0;
    for (int k = 1; k < bound && k <= usz; ++k) work += std::exp(log_choose(usz, k));
    if (work > 2e6) throw GuardError("min_dependent_support: circuit search too large");
    for (int k = 1; k < bound && k <= usz; ++k) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        do {
            std::vector<std::vector<long long>> sub(k);
            for (int t = 0; t < k; ++t) sub[t].assign(a.row(u[idx[t]]).begin(), a.row(u[idx[t]]).end());
            if (detail::rank_exact_rows(sub, n) != k - 1) continue;
            // Transpose so the dependency is a right-nullspace vector.
            std::vector<std::vector<long long>> subT(n, std::vector<long long>(k));
            for (int t = 0; t < k; ++t)
                for (int j = 0; j < n; ++j) subT[j][t] = sub[t][j];
            const auto dep = nullspace_rational(subT, k);
            if (dep.size() != 1) continue;
            if (std::any_of(dep[0].begin(), dep[0].end(), [](const Int& x) { return x == 0; })) continue;
            CircuitWitness w;
            for (int t = 0; t < k; ++t) w.rows.push_back(u[idx[t]]);
            w.coeffs = dep[0];
            return w;
        } while (next_subset(idx, usz));
    }
    return std::nullopt;
}

StructuralClass classify_singular(const SymMatrix& a, const DegreeThreshold& thr) {
    const int rank = rank_exact(a);
    if (rank == a.dim()) throw std::invalid_argument("classify_singular requires a singular matrix");
    return classify_with_rank(a, thr, rank);
}

int row_null_support(const SymMatrix& a, int i) {
    const int n = a.dim();
    if (i < 0 || i >= n) throw std::invalid_argument("row index out of range");
    if (rank_exact(a) != n) throw std::invalid_argument("row_null_support requires a non-singular matrix");
    std::vector<std::vector<long long>> rows;
    rows.reserve(n - 1);
    for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        rows.emplace_back(a.row(r).begin(), a.row(r).end());
    }
    const auto ns = nullspace_rational(rows, n);
    if (ns.size() != 1) throw std::logic_error("deleted-row nullspace is not one-dimensional");
    return static_cast<int>(support_of(ns[0]).size());
}

std::vector<int> row_null_supports_all(const SymMatrix& a) {
    const int n = a.dim();
    const auto adj = adjugate(a);
    std::vector<int> sup(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (adj[j][i] != 0) ++sup[i];
    return sup;
}

StructuralClass classify_nonsingular(const SymMatrix& a, const DegreeThreshold& thr) {
    if (rank_exact(a) != a.dim()) {
        throw std::invalid_argument("classify_nonsingular requires a non-singular matrix");
    }
    return classify_with_rank(a, thr, a.dim());
}

StructuralClass classify_with_rank(const SymMatrix& a, const DegreeThreshold& thr, int rank) {
    const int n = a.dim();
    StructuralClass out;
    if (rank < n) {
        auto circuit = min_dependent_support(a, thr.N);
        if (circuit) {
            out.tag = StructTag::SingularAbnormal;
            out.circuit = std::move(circuit);
        } else {
            out.tag = StructTag::SingularNormal;
        }
        return out;
    }
    const auto sup = row_null_supports_all(a);
    for (int i = 0; i < n; ++i) {
        if (sup[i] < thr.N) {
            out.tag = StructTag::NonsingularImperfect;
            out.bad_row = i;
            return out;
        }
    }
    out.tag = StructTag::NonsingularPerfect;
    return out;
}

long long count_01_points_in_span(const std::vector<std::vector<Rat>>& basis, int n) {
    if (n < 0) throw std::invalid_argument("negative dimension");
    if (n > 24) throw GuardError("count_01_points_in_span guarded at n <= 24");
    for (const auto& v : basis) {
        if (static_cast<int>(v.size()) != n) throw std::invalid_argument("basis vector of wrong dimension");
    }
    // Row-reduce to an RREF basis; points in the span are determined by their
    // pivot coordinates, and 0/1 points need 0/1 pivot coordinates.
    std::vector<std::vector<Rat>> a = basis;
    const int m = static_cast<int>(a.size());
    std::vector<int> pivcols;
    int r = 0;
    for (int c = 0; c < n && r < m; ++c) {
        int piv = -1;
        for (int i = r; i < m; ++i)
            if (a[i][c] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[piv], a[r]);
        const Rat pv = a[r][c];
        for (int j = c; j < n; ++j) a[r][j] /= pv;
        for (int i = 0; i < m; ++i) {
            if (i == r || a[i][c] == 0) continue;
            const Rat f = a[i][c];
            for (int j = c; j < n; ++j) a[i][j] -= f * a[r][j];
        }
        pivcols.push_back(c);
        ++r;
    }
    const int d = r;
    long long count = 0;
    std::vector<Rat> v(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        for (int j = 0; j < n; ++j) v[j] = 0;
        for (int b = 0; b < d; ++b) {
            if (!((mask >> b) & 1)) continue;
            for (int j = 0; j < n; ++j) v[j] += a[b][j];
        }
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) ok = (v[j] == 0 || v[j] == 1);
        if (ok) ++count;
    }
    return count;
}

}  // namespace symrank
