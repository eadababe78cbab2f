#pragma once

#include "nsem/matrix.hpp"

#include <filesystem>

namespace nsem {

// Binary matrix file: magic "NSEM", one version byte (1), unsigned 64-bit
// little-endian row and column counts, then rows*cols IEEE-754 doubles in
// row-major order, little-endian. Round-trips are bit-exact.

void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Throws io_error on missing file, bad magic/version, truncated payload or
/// non-finite entries.
Matrix read_matrix(const std::filesystem::path& path);

} // namespace nsem
