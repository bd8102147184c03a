#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "symrank/matrix_core.hpp"
#include "symrank/numeric.hpp"

namespace symrank {

/// Exact rank with the evidence that produced it. A full modular rank
/// certifies non-singularity on its own; anything less is confirmed by
/// fraction-free elimination over the integers.
struct RankCertificate {
    int rank = 0;
    std::vector<std::pair<std::uint64_t, int>> modular_evidence;
    bool exact_confirmed = false;
};

/// Word-sized primes near 2^62 used for modular rank screening.
std::span<const std::uint64_t> default_primes();

/// Rank of A over GF(p). Throws std::invalid_argument if p is not prime.
int rank_mod_p(const SymMatrix& a, std::uint64_t p);

/// Rank over the rationals via fraction-free (Bareiss) elimination.
int rank_exact(const SymMatrix& a);

/// Exact determinant (big-integer arithmetic; a word-sized fast path is used
/// when the Hadamard bound allows it).
Int det_exact(const SymMatrix& a);

/// Modular ranks first; a full modular rank certifies rank == n without exact
/// work, otherwise (or when forced) the rank is confirmed by rank_exact.
RankCertificate certify_rank(const SymMatrix& a, std::span<const std::uint64_t> primes,
                             bool force_exact = false);

/// Basis of the right nullspace of an m x n rational matrix. Each basis
/// vector is normalized to integer entries with gcd 1 and positive leading
/// coefficient; vectors are ordered by ascending free column.
std::vector<std::vector<Int>> nullspace_rational(const std::vector<std::vector<Rat>>& m, int cols);

/// Convenience overload for integer matrices.
std::vector<std::vector<Int>> nullspace_rational(const std::vector<std::vector<long long>>& m, int cols);

/// Exact adjugate: A * adj(A) == det(A) * I. Fraction-free Gauss-Jordan when A
/// is non-singular, cofactor minors otherwise.
std::vector<std::vector<Int>> adjugate(const SymMatrix& a);

/// Integer quadratic form q(x) = x^T Q x + l.x + c in `nvars` variables.
struct QuadraticFormInt {
    int nvars = 0;
    std::vector<Int> quad;    // nvars x nvars, row-major
    std::vector<Int> linear;  // nvars
    Int constant = 0;

    const Int& q(int i, int j) const { return quad[static_cast<std::size_t>(i) * nvars + j]; }
    Int& q(int i, int j) { return quad[static_cast<std::size_t>(i) * nvars + j]; }

    Int eval(std::span<const long long> x) const;

    /// Folds linear terms onto the diagonal; agrees with the original on
    /// {0,1}-valued inputs (x_i^2 == x_i there).
    QuadraticFormInt folded_01() const;
};

/// The quadratic form F with det(augment(A, v)) == F(v.border, v.corner) for
/// every integer augmentation: F(x) = det(A) * x_{n+1} - u^T adj(A) u where u
/// is the border. Sign convention pinned by the exhaustive identity tests.
QuadraticFormInt augmented_det_form(const SymMatrix& a);

namespace detail {

/// Rank (and determinant when square and full-rank) of an integer matrix via
/// Bareiss elimination with full pivoting. Rows are mutated in place.
struct BareissResult {
    int rank = 0;
    Int det = 0;  // 0 when rank-deficient or non-square
};

BareissResult bareiss_int(std::vector<std::vector<Int>> rows, int cols, bool want_det);
BareissResult bareiss_i64(std::vector<std::vector<long long>> rows, int cols, bool want_det);

/// True when every minor of the matrix is guaranteed to fit comfortably in a
/// signed 64-bit word (Hadamard bound with safety margin).
bool minors_fit_i64(const std::vector<std::vector<long long>>& rows);

int rank_exact_rows(const std::vector<std::vector<long long>>& rows, int cols);
Int det_exact_rows(const std::vector<std::vector<long long>>& rows);

int rank_mod_p_rows(const std::vector<std::vector<long long>>& rows, int cols, std::uint64_t p);

}  // namespace detail

}  // namespace symrank
