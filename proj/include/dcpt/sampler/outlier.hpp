#pragma once
#include <algorithm>
#include <cmath>

#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::sampler {

/**
 * Additive outlier component zeta_t ~ N(0, lambda_t^2) with a horseshoe+
 * prior lambda_t ~ C+(0, tau * eta_t), eta_t ~ C+(0, 1), tau ~ C+(0, tau0).
 *
 * Every half-Cauchy is expanded into its inverse-gamma ladder
 * (x^2 | a ~ IG(1/2, 1/a), a ~ IG(1/2, 1/s^2)), which makes all scale
 * conditionals inverse gamma.
 */
class OutlierTerm
{
public:
    OutlierTerm(Eigen::Index n, double global_scale)
        : zeta_(Vector::Zero(n)), lambda2_(Vector::Ones(n)), a_(Vector::Ones(n)),
          eta2_(Vector::Ones(n)), b_(Vector::Ones(n)), tau2_(global_scale * global_scale), c_(1.0),
          tau0_(global_scale)
    {}

    /// `partial` is y - x'beta - alpha'z; `obs_var` the current noise variances.
    void update(const Vector& partial, const Vector& obs_var, Rng& rng)
    {
        const auto n = zeta_.size();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double prec = 1.0 / obs_var[t] + 1.0 / lambda2_[t];
            const double mean = partial[t] / obs_var[t] / prec;
            zeta_[t] = rng.normal(mean, 1.0 / std::sqrt(prec));
        }
        double sum_inv = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) {
            lambda2_[t] = rng.inv_gamma(1.0, 1.0 / a_[t] + 0.5 * zeta_[t] * zeta_[t]);
            a_[t] = rng.inv_gamma(1.0, 1.0 / lambda2_[t] + 1.0 / (tau2_ * eta2_[t]));
            eta2_[t] = rng.inv_gamma(1.0, 1.0 / b_[t] + 1.0 / (a_[t] * tau2_));
            b_[t] = rng.inv_gamma(1.0, 1.0 + 1.0 / eta2_[t]);
            sum_inv += 1.0 / (eta2_[t] * a_[t]);
        }
        tau2_ = rng.inv_gamma(0.5 * (static_cast<double>(n) + 1.0), 1.0 / c_ + sum_inv);
        c_ = rng.inv_gamma(1.0, 1.0 / (tau0_ * tau0_) + 1.0 / tau2_);
        // keep scales inside the representable range
        lambda2_ = lambda2_.cwiseMax(1e-300).cwiseMin(1e300);
        tau2_ = std::clamp(tau2_, 1e-300, 1e300);
    }

    const Vector& zeta() const { return zeta_; }
    const Vector& local_variance() const { return lambda2_; }
    double global_variance() const { return tau2_; }

private:
    Vector zeta_;
    Vector lambda2_;
    Vector a_;
    Vector eta2_;
    Vector b_;
    double tau2_;
    double c_;
    double tau0_;
};

/**
 * Conjugate draw of the static covariate coefficients alpha ~ N(0, prior_var I)
 * given the partial residual y - x'beta - zeta and noise variances.
 */
inline Vector sample_alpha(const Matrix& zc, const Vector& partial, const Vector& obs_var,
                           double prior_var, Rng& rng)
{
    const auto l = zc.cols();
    const Vector inv_var = obs_var.cwiseInverse();
    Matrix prec = zc.transpose() * inv_var.asDiagonal() * zc;
    prec.diagonal().array() += 1.0 / prior_var;
    const Vector rhs = zc.transpose() * inv_var.cwiseProduct(partial);
    const Eigen::LLT<Matrix> llt(prec);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariate posterior precision is singular (collinear covariates?)");
    }
    const Vector mean = llt.solve(rhs);
    Vector z(l);
    for (Eigen::Index k = 0; k < l; ++k) z[k] = rng.normal();
    Vector draw = mean + llt.matrixU().solve(z);
    if (!draw.allFinite()) throw NumericError("covariate draw is not finite");
    return draw;
}

} // namespace dcpt::sampler
