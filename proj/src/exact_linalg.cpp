#include "symrank/exact_linalg.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

namespace symrank {

namespace {

using i128 = __int128;

long long exact_div_i128(i128 num, long long den) {
    // den is a previous Bareiss pivot, never 0.
    i128 q = num / den;
    if (num % den != 0) throw std::logic_error("fraction-free elimination: inexact division");
    if (q > i128{1} << 62 || q < -(i128{1} << 62)) {
        throw std::logic_error("fraction-free elimination: word overflow");
    }
    return static_cast<long long>(q);
}

Int exact_div_int(const Int& num, const Int& den) {
    Int q, r;
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (r != 0) throw std::logic_error("fraction-free elimination: inexact division");
    return q;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

std::vector<std::vector<long long>> rows_of(const SymMatrix& a) {
    std::vector<std::vector<long long>> rows(a.dim());
    for (int i = 0; i < a.dim(); ++i) rows[i].assign(a.row(i).begin(), a.row(i).end());
    return rows;
}

std::vector<std::vector<Int>> to_int_rows(const std::vector<std::vector<long long>>& rows) {
    std::vector<std::vector<Int>> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i].reserve(rows[i].size());
        for (long long v : rows[i]) out[i].push_back(to_int(v));
    }
    return out;
}

constexpr std::array<std::uint64_t, 3> kDefaultPrimes = {4611686018427387847ull, 4611686018427387817ull,
                                                         4611686018427387787ull};

}  // namespace

std::span<const std::uint64_t> default_primes() { return kDefaultPrimes; }

namespace detail {

bool minors_fit_i64(const std::vector<std::vector<long long>>& rows) {
    long double bits = 0;
    for (const auto& r : rows) {
        long double s = 0;
        for (long long v : r) s += static_cast<long double>(v) * static_cast<long double>(v);
        if (s > 1) bits += 0.5L * std::log2(s);
        if (bits > 61) return false;
    }
    return true;
}

BareissResult bareiss_i64(std::vector<std::vector<long long>> a, int cols, bool want_det) {
    const int m = static_cast<int>(a.size());
    const int steps = std::min(m, cols);
    long long prev = 1;
    int sign = 1;
    int rank = 0;
    for (int k = 0; k < steps; ++k) {
        int pi = -1, pj = -1;
        for (int i = k; i < m && pi < 0; ++i)
            for (int j = k; j < cols; ++j)
                if (a[i][j] != 0) {
                    pi = i;
                    pj = j;
                    break;
                }
        if (pi < 0) break;
        if (pi != k) {
            std::swap(a[pi], a[k]);
            sign = -sign;
        }
        if (pj != k) {
            for (int i = 0; i < m; ++i) std::swap(a[i][pj], a[i][k]);
            sign = -sign;
        }
        const long long pivot = a[k][k];
        for (int i = k + 1; i < m; ++i) {
            const long long aik = a[i][k];
            for (int j = k + 1; j < cols; ++j) {
                a[i][j] = exact_div_i128(static_cast<i128>(pivot) * a[i][j] - static_cast<i128>(aik) * a[k][j],
                                         prev);
            }
            a[i][k] = 0;
        }
        prev = pivot;
        ++rank;
    }
    BareissResult res;
    res.rank = rank;
    if (want_det && m == cols) res.det = (rank == m) ? Int(sign) * to_int(prev) : Int(0);
    return res;
}

BareissResult bareiss_int(std::vector<std::vector<Int>> a, int cols, bool want_det) {
    const int m = static_cast<int>(a.size());
    const int steps = std::min(m, cols);
    Int prev = 1;
    int sign = 1;
    int rank = 0;
    for (int k = 0; k < steps; ++k) {
        int pi = -1, pj = -1;
        for (int i = k; i < m && pi < 0; ++i)
            for (int j = k; j < cols; ++j)
                if (a[i][j] != 0) {
                    pi = i;
                    pj = j;
                    break;
                }
        if (pi < 0) break;
        if (pi != k) {
            std::swap(a[pi], a[k]);
            sign = -sign;
        }
        if (pj != k) {
            for (int i = 0; i < m; ++i) std::swap(a[i][pj], a[i][k]);
            sign = -sign;
        }
        const Int pivot = a[k][k];
        for (int i = k + 1; i < m; ++i) {
            const Int aik = a[i][k];
            for (int j = k + 1; j < cols; ++j) {
                a[i][j] = exact_div_int(pivot * a[i][j] - aik * a[k][j], prev);
            }
            a[i][k] = 0;
        }
        prev = pivot;
        ++rank;
    }
    BareissResult res;
    res.rank = rank;
    if (want_det && m == cols) res.det = (rank == m) ? Int(sign) * prev : Int(0);
    return res;
}

int rank_exact_rows(const std::vector<std::vector<long long>>& rows, int cols) {
    if (rows.empty()) return 0;
    if (minors_fit_i64(rows)) return bareiss_i64(rows, cols, false).rank;
    return bareiss_int(to_int_rows(rows), cols, false).rank;
}

Int det_exact_rows(const std::vector<std::vector<long long>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) return 1;
    if (minors_fit_i64(rows)) return bareiss_i64(rows, n, true).det;
    return bareiss_int(to_int_rows(rows), n, true).det;
}

int rank_mod_p_rows(const std::vector<std::vector<long long>>& rows, int cols, std::uint64_t p) {
    const int m = static_cast<int>(rows.size());
    std::vector<std::vector<std::uint64_t>> a(m, std::vector<std::uint64_t>(cols));
    const long long sp = static_cast<long long>(p);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < cols; ++j) {
            long long v = rows[i][j] % sp;
            if (v < 0) v += sp;
            a[i][j] = static_cast<std::uint64_t>(v);
        }
    int r = 0;
    for (int c = 0; c < cols && r < m; ++c) {
        int piv = -1;
        for (int i = r; i < m; ++i)
            if (a[i][c] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[piv], a[r]);
        const std::uint64_t inv = powmod(a[r][c], p - 2, p);
        for (int i = r + 1; i < m; ++i) {
            if (a[i][c] == 0) continue;
            const std::uint64_t f = mulmod(a[i][c], inv, p);
            for (int j = c; j < cols; ++j) {
                a[i][j] = (a[i][j] + p - mulmod(f, a[r][j], p)) % p;
            }
        }
        ++r;
    }
    return r;
}

}  // namespace detail

int rank_mod_p(const SymMatrix& a, std::uint64_t p) {
    if (!is_prime_u64(p)) throw std::invalid_argument("rank_mod_p: p is not prime");
    return detail::rank_mod_p_rows(rows_of(a), a.dim(), p);
}

int rank_exact(const SymMatrix& a) { return detail::rank_exact_rows(rows_of(a), a.dim()); }

Int det_exact(const SymMatrix& a) { return detail::det_exact_rows(rows_of(a)); }

RankCertificate certify_rank(const SymMatrix& a, std::span<const std::uint64_t> primes, bool force_exact) {
    if (primes.empty()) throw std::invalid_argument("certify_rank: need at least one prime");
    const int n = a.dim();
    RankCertificate cert;
    const auto rows = rows_of(a);
    int best = 0;
    for (std::uint64_t p : primes) {
        if (!is_prime_u64(p)) throw std::invalid_argument("certify_rank: composite modulus");
        const int r = detail::rank_mod_p_rows(rows, n, p);
        cert.modular_evidence.emplace_back(p, r);
        best = std::max(best, r);
        if (r == n && !force_exact) {
            cert.rank = n;
            cert.exact_confirmed = false;
            return cert;
        }
    }
    cert.rank = detail::rank_exact_rows(rows, n);
    cert.exact_confirmed = true;
    return cert;
}

namespace {

std::vector<std::vector<Int>> normalize_basis(std::vector<std::vector<Rat>> basis) {
    std::vector<std::vector<Int>> out;
    out.reserve(basis.size());
    for (auto& v : basis) {
        Int lcm = 1;
        for (const Rat& x : v) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), x.get_den().get_mpz_t());
        std::vector<Int> w(v.size());
        Int g = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            w[i] = v[i].get_num() * (lcm / v[i].get_den());
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), w[i].get_mpz_t());
        }
        if (g > 1)
            for (Int& x : w) x /= g;
        for (const Int& x : w) {
            if (x != 0) {
                if (x < 0)
                    for (Int& y : w) y = -y;
                break;
            }
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

std::vector<std::vector<Int>> nullspace_rational(const std::vector<std::vector<Rat>>& m, int cols) {
    std::vector<std::vector<Rat>> a = m;
    const int rows = static_cast<int>(a.size());
    std::vector<int> pivcols;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (a[i][c] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[piv], a[r]);
        const Rat pv = a[r][c];
        for (int j = c; j < cols; ++j) a[r][j] /= pv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            const Rat f = a[i][c];
            for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        pivcols.push_back(c);
        ++r;
    }
    std::vector<std::vector<Rat>> basis;
    int next_piv = 0;
    for (int c = 0; c < cols; ++c) {
        if (next_piv < static_cast<int>(pivcols.size()) && pivcols[next_piv] == c) {
            ++next_piv;
            continue;
        }
        std::vector<Rat> v(cols, Rat(0));
        v[c] = 1;
        for (int i = 0; i < static_cast<int>(pivcols.size()); ++i) v[pivcols[i]] = -a[i][c];
        basis.push_back(std::move(v));
    }
    return normalize_basis(std::move(basis));
}

std::vector<std::vector<Int>> nullspace_rational(const std::vector<std::vector<long long>>& m, int cols) {
    std::vector<std::vector<Rat>> a(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        a[i].reserve(m[i].size());
        for (long long v : m[i]) a[i].push_back(to_rat(v));
    }
    return nullspace_rational(a, cols);
}

namespace {

/// Word-sized Montante pass, valid when every minor fits in int64.
std::vector<std::vector<Int>> adjugate_nonsingular_i64(const SymMatrix& m, const Int& det) {
    const int n = m.dim();
    std::vector<long long> a(static_cast<std::size_t>(n) * 2 * n, 0);
    const auto at = [&](int i, int j) -> long long& { return a[static_cast<std::size_t>(i) * 2 * n + j]; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) at(i, j) = m.at(i, j);
        at(i, n + i) = 1;
    }
    long long prev = 1;
    for (int k = 0; k < n; ++k) {
        int piv = -1;
        for (int i = k; i < n; ++i)
            if (at(i, k) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) throw std::logic_error("adjugate: unexpected singular input");
        if (piv != k)
            for (int j = 0; j < 2 * n; ++j) std::swap(at(piv, j), at(k, j));
        const long long pivot = at(k, k);
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            const long long aik = at(i, k);
            for (int j = 0; j < 2 * n; ++j) {
                at(i, j) = exact_div_i128(static_cast<i128>(pivot) * at(i, j) -
                                              static_cast<i128>(aik) * at(k, j),
                                          prev);
            }
        }
        prev = pivot;
    }
    const Int p = to_int(at(0, 0));
    if (p != det && p != -det) throw std::logic_error("adjugate: pivot/determinant mismatch");
    const int s = (p == det) ? 1 : -1;
    std::vector<std::vector<Int>> adj(n, std::vector<Int>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) adj[i][j] = to_int(s * at(i, n + j));
    return adj;
}

/// Fraction-free Gauss-Jordan (Montante) on [A | I]; requires det(A) != 0.
/// Final state is p*I on the left and p*A^{-1} on the right with p = +-det(A);
/// the caller rescales by det/p. Divisions are checked exact.
std::vector<std::vector<Int>> adjugate_nonsingular(const SymMatrix& m, const Int& det) {
    const int n = m.dim();
    std::vector<std::vector<Int>> a(n, std::vector<Int>(2 * n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = to_int(m.at(i, j));
        a[i][n + i] = 1;
    }
    Int prev = 1;
    for (int k = 0; k < n; ++k) {
        int piv = -1;
        for (int i = k; i < n; ++i)
            if (a[i][k] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) throw std::logic_error("adjugate: unexpected singular input");
        if (piv != k) std::swap(a[piv], a[k]);
        const Int pivot = a[k][k];
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            const Int aik = a[i][k];
            for (int j = 0; j < 2 * n; ++j) {
                a[i][j] = exact_div_int(pivot * a[i][j] - aik * a[k][j], prev);
            }
        }
        prev = pivot;
    }
    const Int p = a[0][0];  // == final pivot on every diagonal cell
    if (p != det && p != -det) throw std::logic_error("adjugate: pivot/determinant mismatch");
    const int s = (p == det) ? 1 : -1;
    std::vector<std::vector<Int>> adj(n, std::vector<Int>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) adj[i][j] = s * a[i][n + j];
    return adj;
}

std::vector<std::vector<Int>> adjugate_minors(const SymMatrix& m) {
    const int n = m.dim();
    std::vector<std::vector<Int>> adj(n, std::vector<Int>(n, 0));
    if (n == 1) {
        adj[0][0] = 1;  // empty minor has determinant 1
        return adj;
    }
    std::vector<std::vector<long long>> minor(n - 1, std::vector<long long>(n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor[rr][cc++] = m.at(r, c);
                }
                ++rr;
            }
            Int cof = detail::det_exact_rows(minor);
            if ((i + j) & 1) cof = -cof;
            adj[j][i] = cof;  // adjugate is the transposed cofactor matrix
        }
    }
    return adj;
}

}  // namespace

std::vector<std::vector<Int>> adjugate(const SymMatrix& a) {
    const Int det = det_exact(a);
    if (a.dim() == 0) return {};
    if (det == 0) return adjugate_minors(a);
    if (detail::minors_fit_i64(rows_of(a))) return adjugate_nonsingular_i64(a, det);
    return adjugate_nonsingular(a, det);
}

Int QuadraticFormInt::eval(std::span<const long long> x) const {
    if (static_cast<int>(x.size()) != nvars) throw std::invalid_argument("eval: wrong arity");
    Int acc = constant;
    for (int i = 0; i < nvars; ++i) {
        if (x[i] == 0) continue;
        Int rowsum = linear[i];
        for (int j = 0; j < nvars; ++j) {
            if (x[j] != 0) rowsum += q(i, j) * to_int(x[j]);
        }
        acc += rowsum * to_int(x[i]);
    }
    return acc;
}

QuadraticFormInt QuadraticFormInt::folded_01() const {
    QuadraticFormInt f = *this;
    for (int i = 0; i < nvars; ++i) {
        f.q(i, i) += f.linear[i];
        f.linear[i] = 0;
    }
    return f;
}

QuadraticFormInt augmented_det_form(const SymMatrix& a) {
    const int n = a.dim();
    QuadraticFormInt f;
    f.nvars = n + 1;
    f.quad.assign(static_cast<std::size_t>(n + 1) * (n + 1), Int(0));
    f.linear.assign(n + 1, Int(0));
    const auto adj = adjugate(a);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.q(i, j) = -adj[i][j];
    f.linear[n] = det_exact(a);
    return f;
}

}  // namespace symrank
