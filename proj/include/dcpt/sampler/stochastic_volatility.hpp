#pragma once
#include <cmath>
#include <vector>

#include <dcpt/core/banded.hpp>
#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/sampler/mixture.hpp>

namespace dcpt::sampler {

/**
 * Draws an AR(1) log-variance path h from its conditional given the mixture
 * indicators of log_sq = h + log chi-square(1) noise.
 *
 * The prior on x = h - mu is x_0 ~ N(0, 1/prec[0]) and
 * x_t - phi x_{t-1} ~ N(0, 1/prec[t]) for t >= 1.
 */
inline Vector draw_ar1_path(const Vector& log_sq, const std::vector<int>& s, double mu, double phi,
                            const Vector& prec, Rng& rng)
{
    using M = LogChiSquareMixture;
    const auto m = log_sq.size();
    BandMatrix q(m, 1);
    Vector b(m);
    for (Eigen::Index t = 0; t < m; ++t) {
        double d = prec[t];
        if (t + 1 < m) d += phi * phi * prec[t + 1];
        const double v = M::var[s[t]];
        q.add(t, t, d + 1.0 / v);
        if (t > 0) q.add(t, t - 1, -phi * prec[t]);
        b[t] = (log_sq[t] - M::mean[s[t]] - mu) / v;
    }
    const BandCholesky chol(q);
    Vector z(m);
    for (Eigen::Index t = 0; t < m; ++t) z[t] = rng.normal();
    Vector h = chol.sample(b, z);
    h.array() += mu;
    return h;
}

inline Vector log_squares(const Vector& r, double offset)
{
    return (r.array().square() + offset).log().matrix();
}

/**
 * SV(1) model for the observation noise:
 *   log sigma2_t = mu + phi (log sigma2_{t-1} - mu) + eta_t,  eta_t ~ N(0, sigma2_eta),
 * with mu ~ N(mu_mean, mu_var), phi ~ beta(a, b) and sigma2_eta ~ Gamma(shape, rate).
 * One `update` is a sweep of the mixture-approximation sampler.
 */
class StochasticVolatility
{
public:
    StochasticVolatility(Eigen::Index n, SvPriors priors, double offset)
        : priors_(priors), offset_(offset), h_(Vector::Constant(n, priors.mu_mean)),
          mu_(priors.mu_mean), phi_(priors.phi_a / (priors.phi_a + priors.phi_b)),
          sigma2_(priors.sigma2_shape / priors.sigma2_rate)
    {}

    void update(const Vector& residuals, Rng& rng)
    {
        const auto n = h_.size();
        const Vector ls = log_squares(residuals, offset_);
        const auto s = sample_mixture_indicators(ls, h_, rng);

        Vector prec = Vector::Constant(n, 1.0 / sigma2_);
        prec[0] = (1.0 - phi_ * phi_) / sigma2_;
        h_ = draw_ar1_path(ls, s, mu_, phi_, prec, rng);
        if (!h_.allFinite()) throw NumericError("stochastic volatility path is not finite");

        update_mu(rng);
        update_phi(rng);
        update_sigma2(rng);
    }

    const Vector& log_variance() const { return h_; }
    Vector variance() const { return h_.array().exp().matrix(); }
    double mu() const { return mu_; }
    double phi() const { return phi_; }
    double sigma2() const { return sigma2_; }

private:
    void update_mu(Rng& rng)
    {
        const auto n = h_.size();
        const double one_minus = 1.0 - phi_;
        double prec = (1.0 - phi_ * phi_) / sigma2_ + 1.0 / priors_.mu_var;
        double num = (1.0 - phi_ * phi_) * h_[0] / sigma2_ + priors_.mu_mean / priors_.mu_var;
        for (Eigen::Index t = 1; t < n; ++t) {
            prec += one_minus * one_minus / sigma2_;
            num += one_minus * (h_[t] - phi_ * h_[t - 1]) / sigma2_;
        }
        mu_ = rng.normal(num / prec, 1.0 / std::sqrt(prec));
    }

    // Independence Metropolis step: Gaussian proposal from the transition
    // likelihood, corrected by the beta prior and the stationary initial term.
    void update_phi(Rng& rng)
    {
        const auto n = h_.size();
        double sxx = 0.0;
        double sxy = 0.0;
        for (Eigen::Index t = 1; t < n; ++t) {
            const double a = h_[t - 1] - mu_;
            sxx += a * a;
            sxy += a * (h_[t] - mu_);
        }
        if (!(sxx > 0.0)) return;
        const double prop = rng.normal(sxy / sxx, std::sqrt(sigma2_ / sxx));
        if (!(prop > 0.0 && prop < 1.0)) return;
        const double x0 = h_[0] - mu_;
        const auto log_target_extra = [&](double phi) {
            return (priors_.phi_a - 1.0) * std::log(phi) + (priors_.phi_b - 1.0) * std::log1p(-phi) +
                   0.5 * std::log1p(-phi * phi) - 0.5 * (1.0 - phi * phi) * x0 * x0 / sigma2_;
        };
        if (std::log(rng.uniform()) < log_target_extra(prop) - log_target_extra(phi_)) phi_ = prop;
    }

    // Independence Metropolis step with an inverse-gamma proposal matching the
    // likelihood, accepted by the gamma prior ratio.
    void update_sigma2(Rng& rng)
    {
        const auto n = h_.size();
        const double x0 = h_[0] - mu_;
        double ss = (1.0 - phi_ * phi_) * x0 * x0;
        for (Eigen::Index t = 1; t < n; ++t) {
            const double e = (h_[t] - mu_) - phi_ * (h_[t - 1] - mu_);
            ss += e * e;
        }
        const double shape = 0.5 * static_cast<double>(n) - 1.0;
        const double prop = rng.inv_gamma(shape, 0.5 * ss);
        if (!(prop > 0.0) || !std::isfinite(prop)) return;
        const auto log_prior = [&](double v) {
            return (priors_.sigma2_shape - 1.0) * std::log(v) - priors_.sigma2_rate * v;
        };
        if (std::log(rng.uniform()) < log_prior(prop) - log_prior(sigma2_)) sigma2_ = prop;
    }

    SvPriors priors_;
    double offset_;
    Vector h_;
    double mu_;
    double phi_;
    double sigma2_;
};

} // namespace dcpt::sampler
