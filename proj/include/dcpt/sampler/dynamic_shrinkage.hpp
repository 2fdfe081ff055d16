#pragma once
#include <cmath>

#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/sampler/mixture.hpp>
#include <dcpt/sampler/polya_gamma.hpp>
#include <dcpt/sampler/stochastic_volatility.hpp>

namespace dcpt::sampler {

/**
 * Dynamic shrinkage process on the variances of one series of increments:
 *
 *   omega_t ~ N(0, exp(h_t)),   h_t = u + phi (h_{t-1} - u) + xi_t,
 *   xi_t ~ Z(1/2, 1/2, 0, 1).
 *
 * The Z innovations are represented as xi_t | w_t ~ N(0, 1/w_t) with
 * w_t ~ PG(1, 0), so that w_t | xi_t ~ PG(1, xi_t). The initial level
 * h_0 - u carries its own Z innovation.
 */
class DynamicShrinkage
{
public:
    DynamicShrinkage(Eigen::Index m, const DspConfig& cfg, double offset, double default_mean)
        : cfg_(cfg), offset_(offset),
          mean_prior_(std::isnan(cfg.ar_mean_prior_mean) ? default_mean : cfg.ar_mean_prior_mean),
          h_(Vector::Constant(m, mean_prior_)), pg_(Vector::Constant(m, 0.25)), u_(mean_prior_),
          phi_(2.0 * cfg.ar_persistence_a / (cfg.ar_persistence_a + cfg.ar_persistence_b) - 1.0)
    {}

    void update(const Vector& increments, Rng& rng)
    {
        if (!increments.allFinite()) throw NumericError("dynamic shrinkage: non-finite increments");
        const Vector ls = log_squares(increments, offset_);
        const auto s = sample_mixture_indicators(ls, h_, rng);
        h_ = draw_ar1_path(ls, s, u_, phi_, pg_, rng);
        if (!h_.allFinite()) throw NumericError("dynamic shrinkage: log-variance path is not finite");
        update_mean(rng);
        update_persistence(rng);
        update_augmentation(rng);
    }

    const Vector& log_variance() const { return h_; }
    Vector variance() const { return h_.array().exp().matrix(); }
    double mean() const { return u_; }
    double persistence() const { return phi_; }
    const Vector& augmentation() const { return pg_; }

private:
    void update_mean(Rng& rng)
    {
        const auto m = h_.size();
        const double om = 1.0 - phi_;
        double prec = pg_[0] + 1.0 / cfg_.ar_mean_prior_var;
        double num = pg_[0] * h_[0] + mean_prior_ / cfg_.ar_mean_prior_var;
        for (Eigen::Index t = 1; t < m; ++t) {
            prec += pg_[t] * om * om;
            num += pg_[t] * om * (h_[t] - phi_ * h_[t - 1]);
        }
        u_ = rng.normal(num / prec, 1.0 / std::sqrt(prec));
    }

    void update_persistence(Rng& rng)
    {
        const auto m = h_.size();
        double sxx = 0.0;
        double sxy = 0.0;
        for (Eigen::Index t = 1; t < m; ++t) {
            const double a = h_[t - 1] - u_;
            sxx += pg_[t] * a * a;
            sxy += pg_[t] * a * (h_[t] - u_);
        }
        if (!(sxx > 0.0)) return;
        const double prop = rng.normal(sxy / sxx, 1.0 / std::sqrt(sxx));
        if (!(prop > -1.0 && prop < 1.0)) return;
        const auto log_prior = [&](double phi) {
            const double v = 0.5 * (phi + 1.0);
            return (cfg_.ar_persistence_a - 1.0) * std::log(v) +
                   (cfg_.ar_persistence_b - 1.0) * std::log1p(-v);
        };
        if (std::log(rng.uniform()) < log_prior(prop) - log_prior(phi_)) phi_ = prop;
    }

    void update_augmentation(Rng& rng)
    {
        const auto m = h_.size();
        pg_[0] = polya_gamma(h_[0] - u_, rng);
        for (Eigen::Index t = 1; t < m; ++t) {
            pg_[t] = polya_gamma((h_[t] - u_) - phi_ * (h_[t - 1] - u_), rng);
        }
        // PG(1, z) draws are almost surely positive; guard against underflow.
        pg_ = pg_.cwiseMax(1e-12);
    }

    DspConfig cfg_;
    double offset_;
    double mean_prior_;
    Vector h_;
    Vector pg_;
    double u_;
    double phi_;
};

/**
 * Time-constant variance with a half-Cauchy C+(0, scale) prior on its square
 * root, sampled through the inverse-gamma mixture representation
 * v | a ~ IG(1/2, 1/a), a ~ IG(1/2, 1/scale^2).
 */
class ConstantVariance
{
public:
    ConstantVariance(double initial, double scale) : value_(initial), aux_(1.0), scale_(scale) {}

    void update(const Vector& e, Rng& rng)
    {
        const double m = static_cast<double>(e.size());
        value_ = rng.inv_gamma(0.5 * (m + 1.0), 1.0 / aux_ + 0.5 * e.squaredNorm());
        aux_ = rng.inv_gamma(1.0, 1.0 / (scale_ * scale_) + 1.0 / value_);
        if (!(value_ > 0.0) || !std::isfinite(value_)) throw NumericError("constant variance draw invalid");
    }

    double value() const { return value_; }

private:
    double value_;
    double aux_;
    double scale_;
};

} // namespace dcpt::sampler
