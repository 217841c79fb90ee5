#pragma once

#include <cstddef>
#include <vector>

#include "idfd/matrix.hpp"

namespace idfd {

inline constexpr double kZeroNormTolerance = 1e-12;

/// Scales every row to unit Euclidean norm. Throws ZeroRow when a row norm
/// falls below kZeroNormTolerance.
Matrix l2_normalize_rows(const Matrix& m);

/// Column-wise counterpart of l2_normalize_rows; throws DegenerateFeature for
/// a column whose norm falls below kZeroNormTolerance.
Matrix l2_normalize_columns(const Matrix& m);

/// m * m^T. Entry (j, i) is computed as the mirror of (i, j), so the result
/// is exactly symmetric.
Matrix gram(const Matrix& m);

struct EigenResult {
    std::vector<double> values;  ///< ascending
    Matrix vectors;              ///< one orthonormal eigenvector per column
};

struct JacobiOptions {
    int max_sweeps = 100;
    /// Convergence when the off-diagonal Frobenius norm drops below
    /// tolerance * ||m||_F.
    double tolerance = 1e-12;
    double symmetry_tolerance = 1e-9;
};

/// The k smallest eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
EigenResult symmetric_eigen(const Matrix& m, std::size_t k, const JacobiOptions& opts = {});

}  // namespace idfd
