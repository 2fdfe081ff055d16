#pragma once
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <dcpt/core/error.hpp>
#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::sim {

enum class Noise
{
    Gaussian,
    T2,
    Sv,
};

enum class Design
{
    MeanGaussian,
    MeanT2,
    MeanSv,
    RegMulti,
    RegSv,
    RegCov,
    MeanTwo,
};

inline const std::vector<std::string>& design_names()
{
    static const std::vector<std::string> names{"mean-gaussian", "mean-t2", "mean-sv", "reg-multi",
                                                "reg-sv",        "reg-cov", "mean-two"};
    return names;
}

inline std::string to_string(Design d) { return design_names()[static_cast<std::size_t>(d)]; }

inline Design design_from_string(const std::string& s)
{
    const auto& names = design_names();
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == s) return static_cast<Design>(k);
    }
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    throw ValidationError("unknown design '" + s + "' (expected one of " + all + ")");
}

/// Magnitude grid used for each design.
inline std::vector<double> default_magnitudes(Design d)
{
    switch (d) {
    case Design::MeanGaussian: return {1.0, 0.75, 0.5, 0.25};
    case Design::MeanT2:
    case Design::MeanSv: return {2.0, 1.5, 1.0, 0.5};
    case Design::MeanTwo: return {2.0};
    default: return {2.0, 1.0, 0.5};
    }
}

/// Mean-change designs have no regressors beyond the intercept.
inline bool is_mean_design(Design d)
{
    return d == Design::MeanGaussian || d == Design::MeanT2 || d == Design::MeanSv || d == Design::MeanTwo;
}

struct Simulated
{
    Dataset data;
    std::vector<int> truth;  // 1-based changepoints
    Matrix beta;             // true coefficient paths, n x p
};

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// SV(1) noise: log variance AR(1) started from its stationary law.
inline Vector sv_noise(Eigen::Index n, double mu, double phi, double sigma2_eta, Rng& rng)
{
    Vector e(n);
    double h = rng.normal(mu, std::sqrt(sigma2_eta / (1.0 - phi * phi)));
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t > 0) h = mu + phi * (h - mu) + rng.normal(0.0, std::sqrt(sigma2_eta));
        e[t] = std::exp(0.5 * h) * rng.normal();
    }
    return e;
}

inline Vector draw_noise(Eigen::Index n, Noise noise, double sigma2_eta, Rng& rng)
{
    Vector e(n);
    switch (noise) {
    case Noise::Gaussian:
        for (Eigen::Index t = 0; t < n; ++t) e[t] = rng.normal();
        return e;
    case Noise::T2:
        for (Eigen::Index t = 0; t < n; ++t) e[t] = rng.student_t(2.0);
        return e;
    case Noise::Sv: return sv_noise(n, 0.0, 0.9, sigma2_eta, rng);
    }
    return e;
}

/// Piecewise-constant mean: levels[k] holds on segment k, truth gives segment starts.
inline Simulated gen_piecewise_mean(int n, const std::vector<int>& cps, const std::vector<double>& levels, Noise noise,
                                    std::uint64_t seed)
{
    if (levels.size() != cps.size() + 1) throw ValidationError("need one level per segment");
    Rng rng(seed);
    Vector mean(n);
    std::size_t seg = 0;
    for (int t = 1; t <= n; ++t) {
        while (seg < cps.size() && cps[seg] <= t) ++seg;
        mean[t - 1] = levels[seg];
    }
    const Vector y = mean + draw_noise(n, noise, 0.5, rng);
    return {Dataset::mean_change(y), cps, mean};
}

/// Single step of the given magnitude after time n/2 (changepoint at n/2 + 1).
inline Simulated gen_mean_change(double magnitude, Noise noise, std::uint64_t seed, int n = 200)
{
    if (!(magnitude >= 0.0)) throw ValidationError("magnitude must be non-negative");
    const int cp = n / 2 + 1;
    auto s = gen_piecewise_mean(n, {cp}, {0.0, magnitude}, noise, seed);
    if (magnitude == 0.0) s.truth.clear();
    return s;
}

/// p coefficients switching jointly 0 -> C -> 0, x_t ~ N(0, I).
inline Simulated gen_regression(double magnitude, Noise noise, std::uint64_t seed, int n = 300, int p = 3)
{
    if (!(magnitude >= 0.0)) throw ValidationError("magnitude must be non-negative");
    Rng rng(seed);
    const std::vector<int> cps{n / 4 + 1, 3 * n / 4 + 1};
    Matrix x(n, p);
    for (int t = 0; t < n; ++t) {
        for (int j = 0; j < p; ++j) x(t, j) = rng.normal();
    }
    Matrix beta = Matrix::Zero(n, p);
    for (int t = cps[0]; t < cps[1]; ++t) beta.row(t - 1).setConstant(magnitude);
    const Vector e = draw_noise(n, noise, 1.0, rng);
    const Vector y = (x.array() * beta.array()).rowwise().sum().matrix() + e;
    return {Dataset(y, x), magnitude == 0.0 ? std::vector<int>{} : cps, beta};
}

/// One predictor switching 0 -> C at n/2 + 1 plus two Bernoulli(1/2) covariates
/// with coefficients (0.3, 0.1).
inline Simulated gen_regression_with_covariates(double magnitude, std::uint64_t seed, int n = 300)
{
    if (!(magnitude >= 0.0)) throw ValidationError("magnitude must be non-negative");
    Rng rng(seed);
    const int cp = n / 2 + 1;
    Matrix x(n, 1);
    Matrix z(n, 2);
    for (int t = 0; t < n; ++t) {
        x(t, 0) = rng.normal();
        z(t, 0) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        z(t, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    Matrix beta = Matrix::Zero(n, 1);
    for (int t = cp; t <= n; ++t) beta(t - 1, 0) = magnitude;
    Vector y(n);
    for (int t = 0; t < n; ++t) y[t] = x(t, 0) * beta(t, 0) + 0.3 * z(t, 0) + 0.1 * z(t, 1) + rng.normal();
    return {Dataset(y, x, z), magnitude == 0.0 ? std::vector<int>{} : std::vector<int>{cp}, beta};
}

/// Dispatch by design name; mean-two uses levels 0, m, 2m at n/3 + 1 and 2n/3 + 1 with n = 300.
inline Simulated simulate(Design d, double magnitude, std::uint64_t seed)
{
    switch (d) {
    case Design::MeanGaussian: return gen_mean_change(magnitude, Noise::Gaussian, seed);
    case Design::MeanT2: return gen_mean_change(magnitude, Noise::T2, seed);
    case Design::MeanSv: return gen_mean_change(magnitude, Noise::Sv, seed);
    case Design::RegMulti: return gen_regression(magnitude, Noise::Gaussian, seed);
    case Design::RegSv: return gen_regression(magnitude, Noise::Sv, seed);
    case Design::RegCov: return gen_regression_with_covariates(magnitude, seed);
    case Design::MeanTwo: return gen_piecewise_mean(300, {101, 201}, {0.0, magnitude, 2.0 * magnitude}, Noise::Gaussian, seed);
    }
    throw ValidationError("unknown design");
}

} // namespace dcpt::sim
