#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <dcpt/core/error.hpp>

namespace dcpt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Shrinkage
{
    RandomWalkConstantVariance,
    DynamicShrinkage,
};

inline const char* to_string(Shrinkage s)
{
    return s == Shrinkage::DynamicShrinkage ? "dynamic" : "random_walk";
}

inline Shrinkage shrinkage_from_string(const std::string& s)
{
    if (s == "dynamic" || s == "DynamicShrinkage") return Shrinkage::DynamicShrinkage;
    if (s == "random_walk" || s == "RandomWalkConstantVariance") {
        return Shrinkage::RandomWalkConstantVariance;
    }
    throw ValidationError("unknown shrinkage '" + s + "' (expected dynamic or random_walk)");
}

/**
 * Observed series and regressors.
 *
 * Row t of X holds x_t (one column per predictor series); row t of Zc holds
 * the static covariates z_t. Change in mean uses a single all-ones column.
 */
class Dataset
{
public:
    Dataset() = default;

    Dataset(Vector y, Matrix x, Matrix zc = {}, std::vector<std::string> labels = {})
        : y_(std::move(y)), x_(std::move(x)), zc_(std::move(zc)), labels_(std::move(labels))
    {
        const auto n = y_.size();
        if (zc_.size() == 0) zc_.resize(n, 0);
        if (x_.rows() != n) {
            throw ValidationError("dimension mismatch: X has " + std::to_string(x_.rows()) +
                                  " rows, y has " + std::to_string(n));
        }
        if (zc_.rows() != n) {
            throw ValidationError("dimension mismatch: covariates have " +
                                  std::to_string(zc_.rows()) + " rows, y has " + std::to_string(n));
        }
        if (x_.cols() < 1) throw ValidationError("at least one predictor column is required");
        if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != n) {
            throw ValidationError("dimension mismatch: " + std::to_string(labels_.size()) +
                                  " time labels for " + std::to_string(n) + " observations");
        }
        for (Eigen::Index t = 0; t < n; ++t) {
            bool ok = std::isfinite(y_[t]);
            for (Eigen::Index j = 0; ok && j < x_.cols(); ++j) ok = std::isfinite(x_(t, j));
            for (Eigen::Index k = 0; ok && k < zc_.cols(); ++k) ok = std::isfinite(zc_(t, k));
            if (!ok) throw ValidationError("missing value at t=" + std::to_string(t + 1));
        }
    }

    /// Change-in-mean dataset: one all-ones predictor column.
    static Dataset mean_change(Vector y, std::vector<std::string> labels = {})
    {
        const auto n = y.size();
        return Dataset(std::move(y), Matrix::Ones(n, 1), Matrix(n, 0), std::move(labels));
    }

    Eigen::Index n() const { return y_.size(); }
    Eigen::Index p() const { return x_.cols(); }
    Eigen::Index l() const { return zc_.cols(); }
    const Vector& y() const { return y_; }
    const Matrix& x() const { return x_; }
    const Matrix& zc() const { return zc_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Report label of 0-based index t (original label, or t+1).
    std::string label(Eigen::Index t) const
    {
        return labels_.empty() ? std::to_string(t + 1) : labels_[static_cast<std::size_t>(t)];
    }

private:
    Vector y_;
    Matrix x_;
    Matrix zc_;
    std::vector<std::string> labels_;
};

/// Priors of the SV(1) observation-noise block.
struct SvPriors
{
    double mu_mean = 0.0;
    double mu_var = 100.0;
    double phi_a = 5.0;     // phi ~ beta(phi_a, phi_b) on (0, 1)
    double phi_b = 1.5;
    double sigma2_shape = 0.5;  // sigma2_eta ~ Gamma(shape, rate)
    double sigma2_rate = 0.5;
};

/// Dynamic shrinkage process on log evolution variances.
struct DspConfig
{
    std::array<double, 4> z_params{0.5, 0.5, 0.0, 1.0};
    /// Prior mean of the AR level u; NaN means log(1/n).
    double ar_mean_prior_mean = std::numeric_limits<double>::quiet_NaN();
    double ar_mean_prior_var = 10.0;
    /// (phi + 1) / 2 ~ beta(a, b).
    double ar_persistence_a = 10.0;
    double ar_persistence_b = 2.0;
};

struct DlmConfig
{
    int order = 1;
    Shrinkage shrinkage = Shrinkage::DynamicShrinkage;
    bool sv_noise = true;
    bool outlier_term = false;
    int n_burn = 5000;
    int n_save = 5000;
    std::uint64_t seed = 1;
    SvPriors sv_priors;
    double alpha_prior_var = 1.0e6;
    /// Prior variance of the first `order` states of every predictor series.
    double initial_state_var = 1.0e6;
    /// Offset c in log(r^2 + c) for the log-chi-square mixture samplers.
    double log_offset = 1.0e-6;
    /// Scale of the half-Cauchy prior on the outlier global scale; <= 0 means 1/n.
    double outlier_global_scale = 0.0;
    DspConfig dsp;

    void check() const
    {
        if (order != 1 && order != 2) throw ValidationError("difference order must be 1 or 2");
        if (n_save < 100) throw ValidationError("n_save must be at least 100");
        if (n_burn < 0) throw ValidationError("n_burn must be non-negative");
        const auto positive = [](double v, const char* what) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ValidationError(std::string(what) + " must be positive and finite");
            }
        };
        positive(sv_priors.mu_var, "sv_priors.mu_var");
        positive(sv_priors.phi_a, "sv_priors.phi_a");
        positive(sv_priors.phi_b, "sv_priors.phi_b");
        positive(sv_priors.sigma2_shape, "sv_priors.sigma2_shape");
        positive(sv_priors.sigma2_rate, "sv_priors.sigma2_rate");
        positive(alpha_prior_var, "alpha_prior_var");
        positive(initial_state_var, "initial_state_var");
        positive(log_offset, "log_offset");
        positive(dsp.ar_mean_prior_var, "dsp.ar_mean_prior_var");
        positive(dsp.ar_persistence_a, "dsp.ar_persistence_a");
        positive(dsp.ar_persistence_b, "dsp.ar_persistence_b");
        if (dsp.z_params != std::array<double, 4>{0.5, 0.5, 0.0, 1.0}) {
            throw ValidationError("only Z(0.5, 0.5, 0, 1) innovations are supported");
        }
    }
};

/**
 * Retained MCMC output.
 *
 * Every matrix stores one draw per column. `beta[j]` is the n x S path of
 * predictor series j; `log_evol_var[j]` is the (n - order) x S log variance
 * of its order-th differences (dynamic shrinkage only).
 */
struct PosteriorDraws
{
    int order = 1;
    std::vector<Matrix> beta;
    Matrix sigma2_eps;
    Matrix alpha;
    std::optional<Matrix> zeta;
    std::vector<Matrix> log_evol_var;
    int thin = 1;

    Eigen::Index n() const { return sigma2_eps.rows(); }
    Eigen::Index p() const { return static_cast<Eigen::Index>(beta.size()); }
    Eigen::Index l() const { return alpha.rows(); }
    Eigen::Index draws() const { return sigma2_eps.cols(); }

    /// Posterior mean path of every series as an n x p matrix.
    Matrix beta_mean() const
    {
        Matrix m(n(), p());
        for (Eigen::Index j = 0; j < p(); ++j) m.col(j) = beta[j].rowwise().mean();
        return m;
    }

    Vector alpha_mean() const
    {
        return l() > 0 ? Vector(alpha.rowwise().mean()) : Vector(0);
    }

    /// Draw i of every series as an n x p matrix.
    Matrix beta_draw(Eigen::Index i) const
    {
        Matrix m(n(), p());
        for (Eigen::Index j = 0; j < p(); ++j) m.col(j) = beta[j].col(i);
        return m;
    }

    void check() const
    {
        if (order != 1 && order != 2) throw ValidationError("draws: order must be 1 or 2");
        if (beta.empty()) throw ValidationError("draws: no predictor series");
        const auto S = draws();
        if (S < 1) throw ValidationError("draws: empty");
        for (const auto& b : beta) {
            if (b.rows() != n() || b.cols() != S) throw ValidationError("draws: beta dimension mismatch");
        }
        if (alpha.cols() != S && alpha.rows() > 0) throw ValidationError("draws: alpha dimension mismatch");
        if (zeta && (zeta->rows() != n() || zeta->cols() != S)) {
            throw ValidationError("draws: zeta dimension mismatch");
        }
        for (const auto& h : log_evol_var) {
            if (h.rows() != n() - order || h.cols() != S) {
                throw ValidationError("draws: shrinkage dimension mismatch");
            }
        }
        if (!log_evol_var.empty() && static_cast<Eigen::Index>(log_evol_var.size()) != p()) {
            throw ValidationError("draws: shrinkage series count mismatch");
        }
        if (!(sigma2_eps.array() > 0.0).all() || !sigma2_eps.allFinite()) {
            throw ValidationError("draws: noise variances must be positive and finite");
        }
    }
};

/// Partition of predictor indices {0..p-1} into groups sharing changepoints.
class GroupSpec
{
public:
    GroupSpec() = default;

    GroupSpec(std::vector<std::vector<int>> groups, int p) : groups_(std::move(groups)), owner_(p, -1)
    {
        if (p < 1) throw ValidationError("groups: p must be positive");
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            if (groups_[g].empty()) throw ValidationError("groups: empty group");
            for (int j : groups_[g]) {
                if (j < 0 || j >= p) throw ValidationError("groups: predictor index out of range");
                if (owner_[j] >= 0) throw ValidationError("groups: groups overlap");
                owner_[j] = static_cast<int>(g);
            }
        }
        for (int j = 0; j < p; ++j) {
            if (owner_[j] < 0) throw ValidationError("groups: predictor " + std::to_string(j + 1) + " not covered");
        }
    }

    static GroupSpec singletons(int p)
    {
        std::vector<std::vector<int>> g;
        for (int j = 0; j < p; ++j) g.push_back({j});
        return GroupSpec(std::move(g), p);
    }

    static GroupSpec all_in_one(int p)
    {
        std::vector<int> g(p);
        for (int j = 0; j < p; ++j) g[j] = j;
        return GroupSpec({g}, p);
    }

    int size() const { return static_cast<int>(groups_.size()); }
    int p() const { return static_cast<int>(owner_.size()); }
    const std::vector<int>& members(int g) const { return groups_[g]; }
    int group_of(int j) const { return owner_[j]; }
    const std::vector<std::vector<int>>& groups() const { return groups_; }

private:
    std::vector<std::vector<int>> groups_;
    std::vector<int> owner_;
};

/// A nonzero group difference: 0-based time index t (t >= order) and group g.
struct ActiveDifference
{
    int t = 0;
    int group = 0;
    friend bool operator==(const ActiveDifference&, const ActiveDifference&) = default;
    friend auto operator<=>(const ActiveDifference&, const ActiveDifference&) = default;
};

struct SolutionPath
{
    int order = 1;
    Vector lambdas;                       // decreasing; may end with 0
    std::vector<Matrix> fits;             // per lambda, n x p
    std::vector<Vector> alpha_fits;       // per lambda, length l (covariate solve only)
    std::vector<Vector> coefficients;     // per lambda, stacked increments then covariates
    std::vector<std::vector<ActiveDifference>> active_sets;
    std::vector<double> objectives;
    Vector weights;                       // w_t
    Matrix psi;                           // n x p posterior mean order-th differences
    Matrix group_psi;                     // n x G floored normalizers
    double psi_floor = 0.0;
    GroupSpec groups;

    std::size_t size() const { return static_cast<std::size_t>(lambdas.size()); }
};

/// Per-draw projection of the posterior onto one changepoint configuration.
struct ProjectedSummary
{
    /// 0-based changepoint indices per predictor series (all >= order).
    std::vector<std::vector<int>> eta;
    std::vector<Matrix> projected;   // per series, n x S
    Vector r2_samples;               // length S
    std::array<double, 3> r2_quantiles{0.0, 0.0, 0.0};
    Matrix draw_means;               // p x S time means of each draw
};

struct CountSummary
{
    int count = 0;
    double lambda = 0.0;
    std::size_t path_index = 0;
    std::vector<ActiveDifference> active;
    double r2_lower = 0.0;
    double r2_median = 0.0;
    double r2_upper = 0.0;
    double r2_mean = 0.0;
};

struct MetricBlock
{
    double rand = 0.0;
    double adjusted_rand = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ChangepointReport
{
    int order = 1;
    double threshold = 0.9;
    double ci_level = 0.9;
    std::vector<int> selected_times;             // 1-based union over groups
    std::vector<ActiveDifference> selected_active;
    int selected_count = 0;
    double selected_lambda = 0.0;
    bool threshold_reached = true;
    std::vector<CountSummary> table;
    Matrix projected_mean;                        // n x p
    Matrix projected_lower;
    Matrix projected_upper;
    Matrix posterior_mean;                        // n x p DLM posterior mean
    Matrix posterior_lower;
    Matrix posterior_upper;
    std::optional<MetricBlock> metrics;
};

} // namespace dcpt
