#pragma once

#include "nsem/matrix.hpp"
#include "nsem/projector.hpp"

namespace nsem {

/// One edit step's keys and target values.
struct EditBatch {
    Matrix keys;   // d_k x n
    Matrix values; // d_v x n
};

struct Residual {
    Matrix r; // d_v x n, values - w * keys
};

/// Residual of the edit under the current weights.
Residual residual(const Matrix& w, const EditBatch& batch);

/// Closed-form projected update through the full-dimension normal equations:
///   delta = r k^T p (k k^T p + I)^{-1}
/// Kept as a reference path; cost is cubic in the key dimension.
Matrix solve_direct(const Matrix& w, const Projector& p, const EditBatch& batch);

/// Reduced-system form of the same update. Projects the keys, factors the
/// n x n inner system l2*I + k^T p k by Cholesky, and assembles
/// delta = r (l2*I + k^T p k)^{-1} k^T p. The only cubic term is in the
/// batch size. With l2 = 1 this equals solve_direct.
Matrix solve_woodbury(const Matrix& w, const Projector& p, const EditBatch& batch,
                      double l2 = 1.0);

/// Fixed-projector baseline:
///   delta = r k^T p0 (k_p k_p^T p0 + k k^T p0 + I)^{-1}
/// where p0 never evolves and preserved_keys stacks all earlier keys.
Matrix solve_alphaedit(const Matrix& w, const Projector& p0, const Matrix& preserved_keys,
                       const EditBatch& batch);

/// Joint preservation/injection baseline with no null-space projection:
///   delta = r k^T (k0 k0^T + k k^T + ridge*I)^{-1}
Matrix solve_plain(const Matrix& w, const EditBatch& preserved, const EditBatch& batch,
                   double ridge);

} // namespace nsem
