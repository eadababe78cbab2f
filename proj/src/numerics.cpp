#include "nsem/numerics.hpp"

#include "nsem/errors.hpp"

#include "eigen_map.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <string>

namespace nsem {

namespace {

SvdResult pack_svd(const Eigen::MatrixXd& u, const Eigen::VectorXd& sigma,
                   const Eigen::MatrixXd& v) {
    SvdResult out;
    out.u = from_eigen(u);
    out.sigma.assign(sigma.data(), sigma.data() + sigma.size());
    out.vt = from_eigen(v.transpose());
    return out;
}

} // namespace

SvdResult thin_svd(const Matrix& a) {
    if (a.rows() < 1 || a.cols() < 1) {
        throw dimension_error("thin_svd: matrix must have at least one row and column");
    }
    if (!a.all_finite()) {
        throw numeric_error("thin_svd: input has non-finite entries");
    }
    const auto view = emap_const(a);
    const std::size_t r = std::min(a.rows(), a.cols());
    // Divide-and-conquer for larger problems, Jacobi for small ones where it
    // is both exact enough and cheap.
    if (r <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(view, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw svd_error(a.rows(), a.cols());
        return pack_svd(svd.matrixU(), svd.singularValues(), svd.matrixV());
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(view, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw svd_error(a.rows(), a.cols());
    return pack_svd(svd.matrixU(), svd.singularValues(), svd.matrixV());
}

CholeskyFactor cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) {
        throw dimension_error("cholesky: matrix must be square and non-empty");
    }
    double asym = 0.0;
    double norm = frobenius_norm(a);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
    if (asym > 1e-10 * std::max(norm, 1e-300)) {
        throw numeric_error("cholesky: input is not symmetric to 1e-10 relative tolerance");
    }

    CholeskyFactor factor;
    factor.dim = n;
    factor.l = Matrix(n, n);
    Matrix& l = factor.l;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0)) throw not_spd_error(j);
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            l(i, j) = sum / ljj;
        }
    }
    return factor;
}

Matrix tri_solve(const CholeskyFactor& factor, const Matrix& b) {
    if (factor.dim != b.rows()) {
        throw dimension_error("tri_solve: factor dimension " + std::to_string(factor.dim) +
                              " does not match rhs rows " + std::to_string(b.rows()));
    }
    Matrix x = b;
    auto lview = emap_const(factor.l);
    auto xview = emap(x);
    lview.triangularView<Eigen::Lower>().solveInPlace(xview);
    lview.transpose().triangularView<Eigen::Upper>().solveInPlace(xview);
    return x;
}

double spectral_norm(const Matrix& a) {
    if (a.empty()) return 0.0;
    if (!a.all_finite()) throw numeric_error("spectral_norm: input has non-finite entries");
    return thin_svd(a).sigma.front();
}

Matrix solve_right(const Matrix& a, const Matrix& b) {
    const std::size_t d = a.rows();
    if (a.cols() != d || d == 0) {
        throw dimension_error("solve_right: system matrix must be square and non-empty");
    }
    if (b.cols() != d) {
        throw dimension_error("solve_right: rhs has " + std::to_string(b.cols()) +
                              " columns, expected " + std::to_string(d));
    }
    // x a = b  <=>  a^T x^T = b^T
    Eigen::MatrixXd at = emap_const(a).transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(at);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    if (!(dmax > 0.0) || dmin < dmax * 1e-14 * static_cast<double>(d)) {
        throw conditioning_error("solve_right: system is numerically singular");
    }
    Eigen::MatrixXd xt = lu.solve(emap_const(b).transpose());
    Matrix x(b.rows(), d);
    emap(x) = xt.transpose();
    return x;
}

} // namespace nsem
