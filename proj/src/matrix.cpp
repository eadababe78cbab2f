#include "nsem/matrix.hpp"

#include "nsem/errors.hpp"

#include "eigen_map.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace nsem {

namespace {

[[noreturn]] void throw_shape(const char* op, const Matrix& a, const Matrix& b) {
    throw dimension_error(std::string(op) + ": incompatible shapes " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " and " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw dimension_error("matrix data length " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }
    if (!all_finite()) {
        throw numeric_error("matrix contains NaN or Inf entries");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
        throw dimension_error("column range [" + std::to_string(first) + ", " +
                              std::to_string(first + count) + ") out of bounds for " +
                              std::to_string(cols_) + " columns");
    }
    Matrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
    return out;
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix product(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw_shape("product", a, b);
    Matrix c(a.rows(), b.cols());
    emap(c).noalias() = emap_const(a) * emap_const(b);
    return c;
}

Matrix product_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw_shape("product_tn", a, b);
    Matrix c(a.cols(), b.cols());
    emap(c).noalias() = emap_const(a).transpose() * emap_const(b);
    return c;
}

Matrix product_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw_shape("product_nt", a, b);
    Matrix c(a.rows(), b.rows());
    emap(c).noalias() = emap_const(a) * emap_const(b).transpose();
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    emap(t) = emap_const(a).transpose();
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("add", a, b);
    Matrix c(a.rows(), a.cols());
    emap(c) = emap_const(a) + emap_const(b);
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("subtract", a, b);
    Matrix c(a.rows(), a.cols());
    emap(c) = emap_const(a) - emap_const(b);
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c(a.rows(), a.cols());
    emap(c) = emap_const(a) * s;
    return c;
}

Matrix add_scaled(const Matrix& a, double s, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("add_scaled", a, b);
    Matrix c = a;
    emap(c) += s * emap_const(b);
    return c;
}

double frobenius_norm(const Matrix& a) {
    return emap_const(a).norm();
}

double max_abs(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return emap_const(a).cwiseAbs().maxCoeff();
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    if (a.empty() && a.cols() == 0) {
        if (a.rows() != 0 && !b.empty() && a.rows() != b.rows()) throw_shape("hcat", a, b);
        return b;
    }
    if (b.empty() && b.cols() == 0) return a;
    if (a.rows() != b.rows()) throw_shape("hcat", a, b);
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
    }
    return c;
}

} // namespace nsem
