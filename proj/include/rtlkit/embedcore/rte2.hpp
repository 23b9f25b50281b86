#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"

namespace rtlkit::embedcore {

static_assert(std::endian::native == std::endian::little, "RTE2 I/O assumes a little-endian host");

/// n embeddings of dimension d, stored as floats.
struct EmbeddingMatrix {
    std::uint32_t dim = 0;
    std::vector<float> values;  // count * dim, row-major
    bool normalized = false;

    std::size_t count() const { return dim ? values.size() / dim : 0; }
    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

    void push_back(std::span<const double> v) {
        if (dim == 0 && values.empty()) dim = static_cast<std::uint32_t>(v.size());
        require(v.size() == dim && dim > 0, ErrorKind::Precondition, "embedding dimension mismatch");
        for (double x : v) values.push_back(static_cast<float>(x));
        normalized = false;
    }

    void normalize() {
        for (std::size_t i = 0; i < count(); ++i) {
            double s = 0;
            for (float x : row(i)) s += static_cast<double>(x) * x;
            require(s > 0, ErrorKind::NumericError, "cannot normalize zero embedding row " + std::to_string(i));
            const double inv = 1.0 / std::sqrt(s);
            for (std::size_t k = 0; k < dim; ++k)
                values[i * dim + k] = static_cast<float>(values[i * dim + k] * inv);
        }
        normalized = true;
    }

    /// Every row is unit length within `tol`.
    bool rows_unit(double tol = 1e-6) const {
        for (std::size_t i = 0; i < count(); ++i) {
            double s = 0;
            for (float x : row(i)) s += static_cast<double>(x) * x;
            if (std::abs(std::sqrt(s) - 1.0) > tol) return false;
        }
        return true;
    }

    bool operator==(const EmbeddingMatrix& o) const { return dim == o.dim && values == o.values; }
};

inline constexpr char kRte2Magic[4] = {'R', 'T', 'E', '2'};
inline constexpr std::uint16_t kRte2Version = 1;

inline std::string encode_rte2(const EmbeddingMatrix& m) {
    require(m.dim > 0 || m.values.empty(), ErrorKind::Precondition, "embedding matrix without dimension");
    require(m.dim == 0 || m.values.size() % m.dim == 0, ErrorKind::Precondition, "ragged embedding matrix");
    std::string out(kRte2Magic, 4);
    auto put = [&](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(kRte2Version);
    put(m.dim);
    put(static_cast<std::uint64_t>(m.count()));
    out.append(reinterpret_cast<const char*>(m.values.data()), m.values.size() * sizeof(float));
    return out;
}

inline EmbeddingMatrix decode_rte2(std::string_view bytes, const std::string& origin = "<memory>") {
    constexpr std::size_t header = 4 + 2 + 4 + 8;
    if (bytes.size() < header || std::memcmp(bytes.data(), kRte2Magic, 4) != 0)
        fail(ErrorKind::ParseError, origin + ": not an RTE2 embedding file");
    std::uint16_t version;
    std::uint32_t dim;
    std::uint64_t count;
    std::memcpy(&version, bytes.data() + 4, 2);
    std::memcpy(&dim, bytes.data() + 6, 4);
    std::memcpy(&count, bytes.data() + 10, 8);
    if (version != kRte2Version)
        fail(ErrorKind::ParseError, origin + ": unsupported RTE2 version " + std::to_string(version));
    const std::uint64_t n = count * dim;
    if (dim == 0 && count != 0) fail(ErrorKind::ParseError, origin + ": zero dimension with nonzero count");
    if (bytes.size() - header != n * sizeof(float))
        fail(ErrorKind::ParseError, origin + ": payload size does not match header");
    EmbeddingMatrix m;
    m.dim = dim;
    m.values.resize(n);
    std::memcpy(m.values.data(), bytes.data() + header, n * sizeof(float));
    m.normalized = m.count() > 0 && m.rows_unit();
    return m;
}

inline void write_rte2(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    write_file(path, encode_rte2(m));
}

inline EmbeddingMatrix read_rte2(const std::filesystem::path& path) {
    return decode_rte2(read_file(path), path.string());
}

/// One JSON object per row: {"index": i, "embedding": [...]}.
inline std::string export_jsonl(const EmbeddingMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.count(); ++i) {
        ordered_json j;
        j["index"] = i;
        j["embedding"] = std::vector<float>(m.row(i).begin(), m.row(i).end());
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace rtlkit::embedcore
