#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace dcpt {

/**
 * Per-chain random number source.
 *
 * Wraps a 64-bit Mersenne twister together with the distribution objects
 * whose internal state (e.g. the cached second normal variate) must travel
 * with the engine for runs to be reproducible from a seed.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

    /// Exponential with rate 1.
    double exponential() { return -std::log(uniform()); }

    /// Gamma with the given shape and rate.
    double gamma(double shape, double rate)
    {
        std::gamma_distribution<double> dist(shape, 1.0);
        return dist(engine_) / rate;
    }

    /// Inverse gamma: 1 / Gamma(shape, rate = scale).
    double inv_gamma(double shape, double scale)
    {
        return 1.0 / gamma(shape, scale);
    }

    double beta(double a, double b)
    {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    double student_t(double dof)
    {
        std::student_t_distribution<double> dist(dof);
        return dist(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace dcpt
