#include "nsem/matrix_io.hpp"

#include "nsem/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace nsem {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'E', 'M'};
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::ostream& out, std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return value;
}

} // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u64_le(out, m.rows());
    put_u64_le(out, m.cols());
    for (double v : m.data()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        put_u64_le(out, bits);
    }
    if (!out) throw io_error("write failed for " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw io_error(path.string() + ": bad magic bytes");
    }
    const int version = in.get();
    if (version != kVersion) {
        throw io_error(path.string() + ": unsupported version " + std::to_string(version));
    }
    const std::uint64_t rows = get_u64_le(in);
    const std::uint64_t cols = get_u64_le(in);
    if (!in) throw io_error(path.string() + ": truncated header");
    if (rows > (1u << 24) || cols > (1u << 24)) {
        throw io_error(path.string() + ": implausible dimensions");
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows * cols));
    for (std::uint64_t i = 0; i < rows * cols; ++i) {
        const std::uint64_t bits = get_u64_le(in);
        if (!in) throw io_error(path.string() + ": truncated payload");
        data.push_back(std::bit_cast<double>(bits));
    }
    try {
        return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                      std::move(data));
    } catch (const numeric_error&) {
        throw io_error(path.string() + ": non-finite entries");
    }
}

} // namespace nsem
