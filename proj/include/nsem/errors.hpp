#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsem {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class dimension_error : public error {
public:
    using error::error;
};

class numeric_error : public error {
public:
    using error::error;
};

// Iterative SVD failed to converge; carries the offending shape.
class svd_error : public numeric_error {
public:
    svd_error(std::size_t rows, std::size_t cols)
        : numeric_error("svd did not converge on a " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " matrix"),
          rows(rows), cols(cols) {}
    std::size_t rows;
    std::size_t cols;
};

// Non-positive pivot during Cholesky; the input was not SPD.
class not_spd_error : public numeric_error {
public:
    explicit not_spd_error(std::size_t pivot)
        : numeric_error("matrix is not symmetric positive definite (pivot " +
                        std::to_string(pivot) + ")"),
          pivot(pivot) {}
    std::size_t pivot;
};

class conditioning_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

// Tied singular values at the truncation index: the deviation bound is undefined.
class degenerate_gap_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

class io_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

} // namespace nsem
