#pragma once

#include "nsem/matrix.hpp"

#include <vector>

namespace nsem {

/// Thin SVD a = u * diag(sigma) * vt with min(rows, cols) triplets.
/// sigma is non-increasing; u and vt rows/columns are orthonormal.
struct SvdResult {
    Matrix u;                  // rows x r, orthonormal columns
    std::vector<double> sigma; // length r, descending, >= 0
    Matrix vt;                 // r x cols, orthonormal rows
};

/// Lower-triangular Cholesky factor of an SPD matrix: l * l^T = input.
struct CholeskyFactor {
    Matrix l;
    std::size_t dim = 0;
};

/// Thin singular value decomposition. Throws svd_error on non-convergence.
SvdResult thin_svd(const Matrix& a);

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Symmetry is checked to 1e-10 relative tolerance; a non-positive pivot
/// throws not_spd_error carrying the pivot index.
CholeskyFactor cholesky(const Matrix& a);

/// Solves (l * l^T) x = b given the factor. b may have any number of columns.
Matrix tri_solve(const CholeskyFactor& factor, const Matrix& b);

/// Largest singular value, computed via thin_svd.
double spectral_norm(const Matrix& a);

/// Solves x * a = b for x by LU factorization with partial pivoting of a^T.
/// a is square and need not be symmetric. Throws conditioning_error when the
/// factorization meets a numerically vanishing pivot.
Matrix solve_right(const Matrix& a, const Matrix& b);

} // namespace nsem
