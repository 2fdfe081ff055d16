#pragma once
#include <array>
#include <cmath>
#include <vector>

#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::sampler {

/**
 * Ten-component normal mixture approximating the log chi-square(1)
 * distribution (Omori, Chib, Shephard and Nakajima, 2007).
 */
struct LogChiSquareMixture
{
    static constexpr std::array<double, 10> prob{
        0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
        0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
    static constexpr std::array<double, 10> mean{
        1.92677, 1.34744, 0.73504, 0.02266, -0.85173,
        -1.97278, -3.46788, -5.55246, -8.68384, -14.65000};
    static constexpr std::array<double, 10> var{
        0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
        0.98583, 1.57469, 2.54498, 4.16591, 7.33342};
};

/**
 * Samples the mixture indicator of every observation of
 * log_sq[t] = h[t] + log chi-square(1) noise.
 */
inline std::vector<int> sample_mixture_indicators(const Vector& log_sq, const Vector& h, Rng& rng)
{
    using M = LogChiSquareMixture;
    static const auto log_weight = [] {
        std::array<double, 10> w{};
        for (std::size_t k = 0; k < 10; ++k) w[k] = std::log(M::prob[k]) - 0.5 * std::log(M::var[k]);
        return w;
    }();

    std::vector<int> s(static_cast<std::size_t>(log_sq.size()));
    std::array<double, 10> lp{};
    for (Eigen::Index t = 0; t < log_sq.size(); ++t) {
        const double r = log_sq[t] - h[t];
        double mx = -INFINITY;
        for (std::size_t k = 0; k < 10; ++k) {
            const double d = r - M::mean[k];
            lp[k] = log_weight[k] - 0.5 * d * d / M::var[k];
            mx = std::max(mx, lp[k]);
        }
        double total = 0.0;
        for (auto& v : lp) {
            v = std::exp(v - mx);
            total += v;
        }
        double u = rng.uniform() * total;
        int k = 0;
        for (; k < 9; ++k) {
            u -= lp[k];
            if (u <= 0.0) break;
        }
        s[t] = k;
    }
    return s;
}

} // namespace dcpt::sampler
