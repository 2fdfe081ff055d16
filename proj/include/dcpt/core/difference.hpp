#pragma once
#include <array>
#include <span>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt {

/// Coefficients of the order-D difference, oldest lag first: (-1, 1) or (1, -2, 1).
inline std::span<const double> difference_coefficients(int order)
{
    static constexpr std::array<double, 2> first{-1.0, 1.0};
    static constexpr std::array<double, 3> second{1.0, -2.0, 1.0};
    if (order == 1) return first;
    if (order == 2) return second;
    throw ValidationError("unsupported difference order " + std::to_string(order));
}

/**
 * Applies the n x n order-D difference matrix to every column of `b`:
 * the first D rows pass through unchanged, row t >= D holds the D-th
 * difference ending at t.
 */
inline Matrix difference_apply(const Matrix& b, int order)
{
    const auto c = difference_coefficients(order);
    Matrix out(b.rows(), b.cols());
    for (Eigen::Index t = 0; t < b.rows(); ++t) {
        if (t < order) {
            out.row(t) = b.row(t);
            continue;
        }
        out.row(t).setZero();
        for (int a = 0; a <= order; ++a) out.row(t) += c[a] * b.row(t - order + a);
    }
    return out;
}

} // namespace dcpt
