#pragma once

// Internal: Eigen views over nsem::Matrix storage. Not part of the public API.

#include "nsem/matrix.hpp"

#include <Eigen/Dense>

namespace nsem {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<EigenRowMajor> emap(Matrix& m) {
    return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

inline Eigen::Map<const EigenRowMajor> emap_const(const Matrix& m) {
    return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

inline Matrix from_eigen(const Eigen::Ref<const EigenRowMajor>& e) {
    Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    emap(m) = e;
    return m;
}

} // namespace nsem
