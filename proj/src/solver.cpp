#include "nsem/solver.hpp"

#include "nsem/errors.hpp"
#include "nsem/numerics.hpp"

#include <string>

namespace nsem {

namespace {

void check_batch(const Matrix& w, const EditBatch& batch) {
    if (batch.keys.cols() != batch.values.cols()) {
        throw dimension_error("edit batch: keys and values disagree on count");
    }
    if (batch.keys.cols() == 0) throw dimension_error("edit batch: at least one edit required");
    if (w.cols() != batch.keys.rows()) {
        throw dimension_error("edit batch: key rows " + std::to_string(batch.keys.rows()) +
                              " do not match weight columns " + std::to_string(w.cols()));
    }
    if (w.rows() != batch.values.rows()) {
        throw dimension_error("edit batch: value rows " + std::to_string(batch.values.rows()) +
                              " do not match weight rows " + std::to_string(w.rows()));
    }
}

bool is_zero(const Matrix& m) { return max_abs(m) == 0.0; }

Matrix identity_plus(Matrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
    return m;
}

} // namespace

Residual residual(const Matrix& w, const EditBatch& batch) {
    check_batch(w, batch);
    return Residual{subtract(batch.values, product(w, batch.keys))};
}

Matrix solve_direct(const Matrix& w, const Projector& p, const EditBatch& batch) {
    check_batch(w, batch);
    if (p.dim() != batch.keys.rows()) {
        throw dimension_error("solve_direct: projector dimension does not match keys");
    }
    const Residual res = residual(w, batch);
    if (is_zero(res.r)) return Matrix(w.rows(), w.cols());

    const Matrix projected = p.apply(batch.keys);                     // p k
    const Matrix system = identity_plus(product_nt(batch.keys, projected)); // k k^T p + I
    const Matrix rhs = product_nt(res.r, projected);                  // r k^T p
    return solve_right(system, rhs);
}

Matrix solve_woodbury(const Matrix& w, const Projector& p, const EditBatch& batch, double l2) {
    check_batch(w, batch);
    if (p.dim() != batch.keys.rows()) {
        throw dimension_error("solve_woodbury: projector dimension does not match keys");
    }
    if (!(l2 > 0.0)) throw numeric_error("solve_woodbury: l2 must be positive");
    const Residual res = residual(w, batch);
    if (is_zero(res.r)) return Matrix(w.rows(), w.cols());

    const Matrix projected = p.apply(batch.keys);       // y = p k
    Matrix inner = product_tn(batch.keys, projected);   // m = k^T y
    for (std::size_t i = 0; i < inner.rows(); ++i) inner(i, i) += l2;
    const CholeskyFactor factor = cholesky(inner);      // s = l2*I + m, spd by construction
    const Matrix x = tri_solve(factor, transpose(projected));
    return product(res.r, x);
}

Matrix solve_alphaedit(const Matrix& w, const Projector& p0, const Matrix& preserved_keys,
                       const EditBatch& batch) {
    check_batch(w, batch);
    if (p0.dim() != batch.keys.rows()) {
        throw dimension_error("solve_alphaedit: projector dimension does not match keys");
    }
    if (preserved_keys.cols() > 0 && preserved_keys.rows() != batch.keys.rows()) {
        throw dimension_error("solve_alphaedit: preserved keys have wrong row count");
    }
    const Residual res = residual(w, batch);
    if (is_zero(res.r)) return Matrix(w.rows(), w.cols());

    const Matrix projected = p0.apply(batch.keys);
    Matrix system = product_nt(batch.keys, projected); // k k^T p0
    if (preserved_keys.cols() > 0) {
        const Matrix projected_prev = p0.apply(preserved_keys);
        system = add(system, product_nt(preserved_keys, projected_prev)); // + k_p k_p^T p0
    }
    system = identity_plus(std::move(system));
    return solve_right(system, product_nt(res.r, projected));
}

Matrix solve_plain(const Matrix& w, const EditBatch& preserved, const EditBatch& batch,
                   double ridge) {
    check_batch(w, batch);
    if (ridge < 0.0) throw numeric_error("solve_plain: ridge must be non-negative");
    if (preserved.keys.cols() > 0 && preserved.keys.rows() != batch.keys.rows()) {
        throw dimension_error("solve_plain: preserved keys have wrong row count");
    }
    const Residual res = residual(w, batch);
    if (is_zero(res.r)) return Matrix(w.rows(), w.cols());

    Matrix system = product_nt(batch.keys, batch.keys);
    if (preserved.keys.cols() > 0) {
        system = add(system, product_nt(preserved.keys, preserved.keys));
    }
    for (std::size_t i = 0; i < system.rows(); ++i) system(i, i) += ridge;
    try {
        const CholeskyFactor factor = cholesky(system);
        return transpose(tri_solve(factor, product_nt(batch.keys, res.r)));
    } catch (const not_spd_error&) {
        throw conditioning_error("solve_plain: normal equations are singular (ridge too small)");
    }
}

} // namespace nsem
