#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"

namespace rtlkit::embedcore {

using Vec = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::Precondition, "dot: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Cosine similarity; zero vectors have no direction and are rejected.
inline double cosine(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0 || nb == 0) fail(ErrorKind::NumericError, "cosine similarity of a zero-norm vector");
    double c = dot(a, b) / (na * nb);
    return std::max(-1.0, std::min(1.0, c));
}

/// Accumulates d cos(a,b) / da scaled by `w` into `out`.
inline void add_cosine_grad(std::span<const double> a, std::span<const double> b, double w, std::span<double> out) {
    double na = norm(a), nb = norm(b);
    double c = dot(a, b) / (na * nb);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] += w * (b[k] / (na * nb) - c * a[k] / (na * na));
}

} // namespace rtlkit::embedcore
