#pragma once
#include <cmath>

#include <dcpt/core/difference.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt {

struct WeightVector
{
    Vector w;
};

/// w_t = (posterior mean of sigma2_eps_t)^(-1/2).
inline WeightVector compute_weights(const PosteriorDraws& draws)
{
    if (draws.draws() < 1) throw ValidationError("weights: empty posterior");
    const Vector mean_var = draws.sigma2_eps.rowwise().mean();
    return {mean_var.array().rsqrt().matrix()};
}

/// Adaptive-penalty normalizers.
struct PsiNormalizers
{
    /// n x p posterior mean of the order-th difference (rows < order unused, zero).
    Matrix per_series;
    /// n x G mean of |per_series| over each group, floored (rows < order unused).
    Matrix grouped;
    double floor = 0.0;
};

/**
 * psi_{t,j} is the posterior mean of Delta^D beta_{t,j}; the grouped
 * normalizer is the mean of |psi_{t,j}| over the members of each group,
 * floored at 1e-8 * max |psi| (or 1e-8 when every difference is zero).
 */
inline PsiNormalizers compute_psi(const PosteriorDraws& draws, int order, const GroupSpec& groups)
{
    const auto n = draws.n();
    const auto p = draws.p();
    if (groups.p() != p) throw ValidationError("groups do not cover the posterior's predictors");

    PsiNormalizers out;
    out.per_series = difference_apply(draws.beta_mean(), order);
    out.per_series.topRows(order).setZero();

    const double mx = out.per_series.cwiseAbs().maxCoeff();
    out.floor = mx > 0.0 ? 1e-8 * mx : 1e-8;

    out.grouped = Matrix::Zero(n, groups.size());
    for (int g = 0; g < groups.size(); ++g) {
        const auto& mem = groups.members(g);
        for (Eigen::Index t = order; t < n; ++t) {
            double s = 0.0;
            for (int j : mem) s += std::fabs(out.per_series(t, j));
            out.grouped(t, g) = std::max(s / static_cast<double>(mem.size()), out.floor);
        }
    }
    return out;
}

} // namespace dcpt
