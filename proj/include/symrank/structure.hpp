#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symrank/exact_linalg.hpp"
#include "symrank/matrix_core.hpp"

namespace symrank {

/// Degree threshold N = max(1, ceil(n^(1-epsilon))).
struct DegreeThreshold {
    int n = 0;
    double epsilon = 0.0;
    int N = 1;
};

DegreeThreshold compute_N(int n, double epsilon);

enum class StructTag {
    SingularNormal,
    SingularAbnormal,
    NonsingularPerfect,
    NonsingularImperfect,
    NotClassified,
};

std::string to_string(StructTag t);

/// A minimal dependent row set together with its exact vanishing combination
/// (all coefficients non-zero, primitive integers, positive leading entry).
struct CircuitWitness {
    std::vector<int> rows;    // ascending 0-based indices
    std::vector<Int> coeffs;  // aligned with `rows`
};

struct StructuralClass {
    StructTag tag = StructTag::NotClassified;
    std::optional<CircuitWitness> circuit;  // SingularAbnormal witness
    std::optional<int> bad_row;             // NonsingularImperfect witness
};

/// Minimum-size circuit of the rows with size < bound, if one exists. Ties
/// are broken lexicographically on the sorted index sets. Search is pruned by
/// the rational nullspace: a circuit's support lies inside the union of
/// nullspace supports.
std::optional<CircuitWitness> min_dependent_support(const SymMatrix& a, int bound);

/// Requires rank(a) < n. SingularAbnormal iff a circuit of size < thr.N
/// exists, else SingularNormal.
StructuralClass classify_singular(const SymMatrix& a, const DegreeThreshold& thr);

/// Support size of the unique (up to scale) vanishing column combination of
/// the matrix with row i deleted. Requires a non-singular.
int row_null_support(const SymMatrix& a, int i);

/// All n supports at once through a single adjugate computation (column i of
/// adj(A) is the deleted-row-i null combination, up to scale).
std::vector<int> row_null_supports_all(const SymMatrix& a);

/// Requires a non-singular. NonsingularPerfect iff every row's null support
/// is >= thr.N, else NonsingularImperfect with a witness row.
StructuralClass classify_nonsingular(const SymMatrix& a, const DegreeThreshold& thr);

/// Dispatch on a precomputed exact rank (used by the chain driver, which
/// already certified the rank).
StructuralClass classify_with_rank(const SymMatrix& a, const DegreeThreshold& thr, int rank);

/// Exact count of {0,1}^n points lying in the span of the given vectors.
/// Guarded at n <= 24.
long long count_01_points_in_span(const std::vector<std::vector<Rat>>& basis, int n);

}  // namespace symrank
