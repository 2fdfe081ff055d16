#pragma once
#include <dcpt/core/difference.hpp>
#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt {

/**
 * The n x n order-D difference matrix and its inverse.
 *
 * The first D rows of the difference matrix are identity rows (the
 * unpenalized initial states); row t >= D holds the D-th difference ending
 * at t. The inverse is lower triangular: column t is the unit change
 * introduced at t (a step for D = 1, a ramp for D = 2).
 */
struct DifferenceOperator
{
    int order = 1;
    Eigen::Index n = 0;
    Matrix inverse;
    Matrix difference;
};

inline DifferenceOperator build_inverse_difference(int order, Eigen::Index n)
{
    if (order != 1 && order != 2) throw ValidationError("unsupported difference order " + std::to_string(order));
    if (n < 2 * order + 2) throw ValidationError("series too short for difference order " + std::to_string(order));

    DifferenceOperator op;
    op.order = order;
    op.n = n;
    op.difference = difference_apply(Matrix::Identity(n, n), order);

    // forward substitution of D Z = I, exploiting the unit diagonal
    const auto c = difference_coefficients(order);
    op.inverse = Matrix::Zero(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index t = col; t < n; ++t) {
            double v = t == col ? 1.0 : 0.0;
            if (t >= order) {
                for (int a = 0; a < order; ++a) v -= c[a] * op.inverse(t - order + a, col);
            }
            op.inverse(t, col) = v;
        }
    }
    return op;
}

} // namespace dcpt
