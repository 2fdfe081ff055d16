#pragma once
#include <cmath>
#include <numbers>

#include <dcpt/core/rng.hpp>

namespace dcpt::sampler {

namespace pg_detail {

inline constexpr double kTrunc = 0.64;
inline constexpr double kPi = std::numbers::pi;

/// log of the standard normal CDF.
inline double log_norm_cdf(double x)
{
    return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

/// Piecewise coefficients of the alternating series for the J*(1, 0) density.
inline double series_coef(int n, double x)
{
    const double k = (n + 0.5) * kPi;
    if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
    if (x <= 0.0) return 0.0;
    const double e = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                     2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(e);
}

/// Probability that the proposal comes from the exponential tail piece.
inline double mass_texpon(double z)
{
    const double t = kTrunc;
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
    const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
    const double x0 = std::log(fz) + fz * t;
    const double xb = x0 - z + log_norm_cdf(b);
    const double xa = x0 + z + log_norm_cdf(a);
    const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + qdivp);
}

/// Inverse Gaussian with mean 1/z truncated to (0, kTrunc).
inline double truncated_inverse_gaussian(double z, Rng& rng)
{
    const double t = kTrunc;
    double x = t + 1.0;
    if (1.0 / t > z) {
        double alpha = 0.0;
        while (rng.uniform() > alpha) {
            double e1 = rng.exponential();
            double e2 = rng.exponential();
            while (e1 * e1 > 2.0 * e2 / t) {
                e1 = rng.exponential();
                e2 = rng.exponential();
            }
            x = 1.0 + e1 * t;
            x = t / (x * x);
            alpha = std::exp(-0.5 * z * z * x);
        }
    } else {
        const double mu = 1.0 / z;
        while (x > t) {
            double y = rng.normal();
            y *= y;
            const double half_mu = 0.5 * mu;
            const double mu_y = mu * y;
            x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
            if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
        }
    }
    return x;
}

} // namespace pg_detail

/**
 * Exact draw from the Polya-Gamma PG(1, z) distribution by Devroye-style
 * alternating-series rejection (Polson, Scott and Windle, 2013).
 */
inline double polya_gamma(double z, Rng& rng)
{
    using namespace pg_detail;
    z = 0.5 * std::fabs(z);
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    for (;;) {
        double x;
        if (rng.uniform() < mass_texpon(z)) {
            x = kTrunc + rng.exponential() / fz;
        } else {
            x = truncated_inverse_gaussian(z, rng);
        }
        double s = series_coef(0, x);
        const double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_coef(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_coef(n, x);
                if (y > s) break;
            }
        }
    }
}

/// E[PG(1, z)] = tanh(z/2) / (2z), with limit 1/4 at z = 0.
inline double polya_gamma_mean(double z)
{
    z = std::fabs(z);
    if (z < 1e-8) return 0.25;
    return std::tanh(0.5 * z) / (2.0 * z);
}

} // namespace dcpt::sampler
