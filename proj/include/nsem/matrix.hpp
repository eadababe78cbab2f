#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsem {

/// Dense row-major matrix of 64-bit reals. The single carrier type for
/// weights, keys, values and projector bases. Values are immutable by
/// convention once handed to another module; all operations below return
/// fresh matrices.
class Matrix {
public:
    Matrix() = default;

    /// Zero-filled rows x cols matrix.
    Matrix(std::size_t rows, std::size_t cols);

    /// Takes ownership of row-major data; rejects NaN/Inf entries and
    /// length mismatches (external-input constructor).
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Copy of columns [first, first + count).
    Matrix columns(std::size_t first, std::size_t count) const;

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix& a, const Matrix& b) noexcept {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Products. Shapes are checked; mismatches throw dimension_error.
Matrix product(const Matrix& a, const Matrix& b);    // a * b
Matrix product_tn(const Matrix& a, const Matrix& b); // a^T * b
Matrix product_nt(const Matrix& a, const Matrix& b); // a * b^T

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

/// a + s * b, in place on a copy of a.
Matrix add_scaled(const Matrix& a, double s, const Matrix& b);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

/// Horizontal concatenation [a | b]; an empty operand passes the other through.
Matrix hcat(const Matrix& a, const Matrix& b);

} // namespace nsem
