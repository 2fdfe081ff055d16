#pragma once
#include <cmath>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <dcpt/core/difference.hpp>
#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/core/validate.hpp>
#include <dcpt/sampler/dynamic_shrinkage.hpp>
#include <dcpt/sampler/outlier.hpp>
#include <dcpt/sampler/states.hpp>
#include <dcpt/sampler/stochastic_volatility.hpp>

namespace dcpt {

/// Optional hook called after each sweep with (sweep index, total sweeps).
using ProgressFn = std::function<void(int, int)>;

namespace sampler {

/// Mutable state of one chain.
class SamplerState
{
public:
    explicit SamplerState(const ValidatedInput& in)
        : data_(in.data()), cfg_(in.config()), rng_(cfg_.seed)
    {
        const auto n = data_.n();
        const auto p = data_.p();
        const auto m = n - cfg_.order;

        alpha_ = Vector::Zero(data_.l());
        zeta_ = Vector::Zero(n);
        obs_var_ = Vector::Ones(n);

        if (cfg_.sv_noise) sv_.emplace(n, cfg_.sv_priors, cfg_.log_offset);
        else noise_.emplace(1.0, 1.0);
        if (sv_) obs_var_ = sv_->variance();

        const double default_mean = std::log(1.0 / static_cast<double>(n));
        for (Eigen::Index j = 0; j < p; ++j) {
            if (cfg_.shrinkage == Shrinkage::DynamicShrinkage) {
                evol_.emplace_back(DynamicShrinkage(m, cfg_.dsp, cfg_.log_offset, default_mean));
            } else {
                evol_.emplace_back(ConstantVariance(1.0, 1.0));
            }
        }
        if (cfg_.outlier_term) {
            const double scale = cfg_.outlier_global_scale > 0.0 ? cfg_.outlier_global_scale
                                                                 : 1.0 / static_cast<double>(n);
            outlier_.emplace(n, scale);
        }

        // unpenalized GLS start: unit noise and evolution variances
        evol_var_ = Matrix::Ones(n, p);
        evol_var_.topRows(cfg_.order).setConstant(cfg_.initial_state_var);
        const Vector target = data_.y();
        beta_ = state_conditional_mean({data_.x(), target, obs_var_, evol_var_, cfg_.order});
        refresh_evolution_variances();
    }

    /// One full sweep: beta, zeta, alpha, noise variances, evolution variances.
    void sweep()
    {
        const auto& x = data_.x();
        const auto& y = data_.y();
        const auto& zc = data_.zc();

        {
            Vector target = y - zeta_;
            if (data_.l() > 0) target -= zc * alpha_;
            beta_ = draw_states({x, target, obs_var_, evol_var_, cfg_.order}, rng_);
        }
        const Vector fitted = (x.array() * beta_.array()).rowwise().sum().matrix();

        if (outlier_) {
            Vector partial = y - fitted;
            if (data_.l() > 0) partial -= zc * alpha_;
            outlier_->update(partial, obs_var_, rng_);
            zeta_ = outlier_->zeta();
        }
        if (data_.l() > 0) {
            alpha_ = sample_alpha(zc, y - fitted - zeta_, obs_var_, cfg_.alpha_prior_var, rng_);
        }

        Vector resid = y - fitted - zeta_;
        if (data_.l() > 0) resid -= zc * alpha_;
        if (sv_) {
            sv_->update(resid, rng_);
            obs_var_ = sv_->variance().cwiseMax(1e-300);
        } else {
            noise_->update(resid, rng_);
            obs_var_.setConstant(noise_->value());
        }

        const Matrix diffs = difference_apply(beta_, cfg_.order);
        for (std::size_t j = 0; j < evol_.size(); ++j) {
            const Vector inc = diffs.col(static_cast<Eigen::Index>(j)).tail(diffs.rows() - cfg_.order);
            std::visit([&](auto& block) { block.update(inc, rng_); }, evol_[j]);
        }
        refresh_evolution_variances();
    }

    const Matrix& beta() const { return beta_; }
    const Vector& obs_var() const { return obs_var_; }
    const Vector& alpha() const { return alpha_; }
    const Vector& zeta() const { return zeta_; }
    const Matrix& evol_var() const { return evol_var_; }
    const std::variant<DynamicShrinkage, ConstantVariance>& shrinkage(std::size_t j) const { return evol_[j]; }
    const std::optional<StochasticVolatility>& volatility() const { return sv_; }

    /// Log evolution variance of series j over t = order..n-1.
    Vector log_evol_var(std::size_t j) const
    {
        return evol_var_.col(static_cast<Eigen::Index>(j)).tail(evol_var_.rows() - cfg_.order).array().log().matrix();
    }

private:
    void refresh_evolution_variances()
    {
        const auto n = data_.n();
        for (std::size_t j = 0; j < evol_.size(); ++j) {
            auto col = evol_var_.col(static_cast<Eigen::Index>(j));
            col.head(cfg_.order).setConstant(cfg_.initial_state_var);
            if (const auto* ds = std::get_if<DynamicShrinkage>(&evol_[j])) {
                col.tail(n - cfg_.order) = ds->variance().cwiseMax(1e-300).cwiseMin(1e300);
            } else {
                col.tail(n - cfg_.order).setConstant(std::get<ConstantVariance>(evol_[j]).value());
            }
        }
    }

    const Dataset& data_;
    const DlmConfig& cfg_;
    Rng rng_;
    Matrix beta_;
    Vector alpha_;
    Vector zeta_;
    Vector obs_var_;
    Matrix evol_var_;
    std::optional<StochasticVolatility> sv_;
    std::optional<ConstantVariance> noise_;
    std::vector<std::variant<DynamicShrinkage, ConstantVariance>> evol_;
    std::optional<OutlierTerm> outlier_;
};

} // namespace sampler

/**
 * Runs n_burn discarded and n_save retained Gibbs sweeps.
 * Identical inputs (including the seed) give bitwise-identical draws.
 */
inline PosteriorDraws run_gibbs(const ValidatedInput& in, const ProgressFn& progress = {})
{
    const auto& data = in.data();
    const auto& cfg = in.config();
    const auto n = data.n();
    const auto p = data.p();
    const auto S = cfg.n_save;

    PosteriorDraws out;
    out.order = cfg.order;
    out.beta.assign(static_cast<std::size_t>(p), Matrix(n, S));
    out.sigma2_eps.resize(n, S);
    out.alpha.resize(data.l(), S);
    if (cfg.outlier_term) out.zeta = Matrix(n, S);
    if (cfg.shrinkage == Shrinkage::DynamicShrinkage) {
        out.log_evol_var.assign(static_cast<std::size_t>(p), Matrix(n - cfg.order, S));
    }

    sampler::SamplerState state(in);
    const int total = cfg.n_burn + cfg.n_save;
    for (int it = 0; it < total; ++it) {
        try {
            state.sweep();
        } catch (const NumericError& e) {
            throw NumericError("sweep " + std::to_string(it) + ": " + e.what());
        }
        if (progress) progress(it, total);
        const int k = it - cfg.n_burn;
        if (k < 0) continue;
        for (Eigen::Index j = 0; j < p; ++j) out.beta[static_cast<std::size_t>(j)].col(k) = state.beta().col(j);
        out.sigma2_eps.col(k) = state.obs_var();
        if (data.l() > 0) out.alpha.col(k) = state.alpha();
        if (out.zeta) out.zeta->col(k) = state.zeta();
        for (std::size_t j = 0; j < out.log_evol_var.size(); ++j) out.log_evol_var[j].col(k) = state.log_evol_var(j);
    }
    return out;
}

inline PosteriorDraws run_gibbs(const Dataset& data, const DlmConfig& cfg, const ProgressFn& progress = {})
{
    return run_gibbs(validate(data, cfg), progress);
}

} // namespace dcpt
