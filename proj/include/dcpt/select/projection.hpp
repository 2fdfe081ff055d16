#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/solver/difference.hpp>

namespace dcpt {

/// Type-7 (linear interpolation between order statistics) sample quantile.
inline double quantile(std::vector<double> v, double prob)
{
    if (v.empty()) throw ValidationError("quantile of empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ValidationError("quantile probability outside [0, 1]");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double quantile(const Vector& v, double prob)
{
    return quantile(std::vector<double>(v.data(), v.data() + v.size()), prob);
}

/// Orthogonal projector onto span of columns {0..D-1} and eta of Z.
class Projector
{
public:
    Projector(const DifferenceOperator& op, std::vector<int> eta) : eta_(std::move(eta))
    {
        std::sort(eta_.begin(), eta_.end());
        eta_.erase(std::unique(eta_.begin(), eta_.end()), eta_.end());
        for (int t : eta_) {
            if (t < op.order || t >= op.n) {
                throw ValidationError("changepoint index " + std::to_string(t + 1) + " outside the admissible range");
            }
        }
        const auto k = static_cast<Eigen::Index>(op.order + eta_.size());
        Matrix z(op.n, k);
        for (int c = 0; c < op.order; ++c) z.col(c) = op.inverse.col(c);
        for (std::size_t a = 0; a < eta_.size(); ++a) z.col(op.order + static_cast<Eigen::Index>(a)) = op.inverse.col(eta_[a]);
        const Eigen::HouseholderQR<Matrix> qr(z);
        q_ = qr.householderQ() * Matrix::Identity(op.n, k);
    }

    /// Projects every column of b.
    Matrix apply(const Matrix& b) const { return q_ * (q_.transpose() * b); }
    const std::vector<int>& eta() const { return eta_; }

private:
    std::vector<int> eta_;
    Matrix q_;
};

/// Z_eta (Z_eta'Z_eta)^-1 Z_eta' applied to each series of one trend draw (n x p).
inline Matrix project_draw(const Matrix& beta_draw, const std::vector<std::vector<int>>& eta, int order)
{
    if (static_cast<Eigen::Index>(eta.size()) != beta_draw.cols()) throw ValidationError("eta must list one set per series");
    const auto op = build_inverse_difference(order, beta_draw.rows());
    Matrix out(beta_draw.rows(), beta_draw.cols());
    for (Eigen::Index j = 0; j < beta_draw.cols(); ++j) {
        out.col(j) = Projector(op, eta[j]).apply(beta_draw.col(j));
    }
    return out;
}

/// Per-series changepoint indices implied by an active group set.
inline std::vector<std::vector<int>> eta_from_active(const std::vector<ActiveDifference>& active, const GroupSpec& groups)
{
    std::vector<std::vector<int>> eta(static_cast<std::size_t>(groups.p()));
    for (const auto& a : active) {
        for (int j : groups.members(a.group)) eta[j].push_back(a.t);
    }
    for (auto& e : eta) std::sort(e.begin(), e.end());
    return eta;
}

/**
 * Weighted variation explained by each projected draw:
 * 1 - sum_t w_t (x_t'(b - b_eta))^2 / sum_t w_t (x_t'(b - mean_t b))^2,
 * with the time-mean taken per series. A zero denominator gives 1.
 */
inline Vector r2_distribution(const PosteriorDraws& draws, const std::vector<Matrix>& projected, const Dataset& data,
                              const Vector& weights)
{
    const auto n = draws.n();
    const auto S = draws.draws();
    const auto& x = data.x();
    Matrix fit = Matrix::Zero(n, S);
    Matrix proj = Matrix::Zero(n, S);
    Matrix centered = Matrix::Zero(n, S);
    for (Eigen::Index j = 0; j < draws.p(); ++j) {
        const auto& b = draws.beta[static_cast<std::size_t>(j)];
        const auto xj = x.col(j).asDiagonal();
        fit += xj * b;
        proj += xj * projected[static_cast<std::size_t>(j)];
        const Eigen::RowVectorXd mu = b.colwise().mean();
        centered += xj * (b.rowwise() - mu);
    }
    Vector r2(S);
    for (Eigen::Index i = 0; i < S; ++i) {
        const double num = (weights.array() * (fit.col(i) - proj.col(i)).array().square()).sum();
        const double den = (weights.array() * centered.col(i).array().square()).sum();
        r2[i] = den > 0.0 ? 1.0 - num / den : 1.0;
    }
    return r2;
}

/// Projected draws and R^2 samples for one configuration.
inline ProjectedSummary summarize_projection(const PosteriorDraws& draws, const Dataset& data, const Vector& weights,
                                             const std::vector<std::vector<int>>& eta, int order, double ci_level = 0.9)
{
    const auto op = build_inverse_difference(order, draws.n());
    ProjectedSummary s;
    s.eta = eta;
    s.draw_means.resize(draws.p(), draws.draws());
    for (Eigen::Index j = 0; j < draws.p(); ++j) {
        const auto& b = draws.beta[static_cast<std::size_t>(j)];
        s.projected.push_back(Projector(op, eta[static_cast<std::size_t>(j)]).apply(b));
        s.draw_means.row(j) = b.colwise().mean();
    }
    s.r2_samples = r2_distribution(draws, s.projected, data, weights);
    const double tail = 0.5 * (1.0 - ci_level);
    s.r2_quantiles = {quantile(s.r2_samples, tail), quantile(s.r2_samples, 0.5), quantile(s.r2_samples, 1.0 - tail)};
    return s;
}

struct SelectOptions
{
    double threshold = 0.9;
    double ci_level = 0.9;
    /// Counts evaluated past the selected one, for the R^2 table.
    int extra_counts = 5;
};

namespace detail {

inline void pointwise_bands(const std::vector<Matrix>& series, double ci_level, Matrix& mean, Matrix& lower, Matrix& upper)
{
    const auto p = static_cast<Eigen::Index>(series.size());
    const auto n = series.front().rows();
    mean.resize(n, p);
    lower.resize(n, p);
    upper.resize(n, p);
    const double tail = 0.5 * (1.0 - ci_level);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& m = series[static_cast<std::size_t>(j)];
        mean.col(j) = m.rowwise().mean();
        for (Eigen::Index t = 0; t < n; ++t) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index i = 0; i < m.cols(); ++i) row[static_cast<std::size_t>(i)] = m(t, i);
            lower(t, j) = quantile(row, tail);
            upper(t, j) = quantile(std::move(row), 1.0 - tail);
        }
    }
}

} // namespace detail

/**
 * Picks the smallest changepoint count on the path whose upper credible
 * R^2 quantile exceeds the threshold. Counts are visited in increasing
 * order, each represented by its largest-lambda solution; if none
 * qualifies the largest count is returned and threshold_reached is false.
 */
inline ChangepointReport select_changepoints(const SolutionPath& path, const PosteriorDraws& draws, const Dataset& data,
                                             const SelectOptions& opt = {})
{
    if (path.size() == 0) throw ValidationError("empty solution path");
    if (!(opt.ci_level > 0.0 && opt.ci_level < 1.0)) throw ValidationError("ci_level must lie in (0, 1)");

    std::map<int, std::size_t> first_at;
    for (std::size_t k = 0; k < path.size(); ++k) {
        first_at.try_emplace(static_cast<int>(path.active_sets[k].size()), k);
    }

    ChangepointReport rep;
    rep.order = path.order;
    rep.threshold = opt.threshold;
    rep.ci_level = opt.ci_level;
    rep.threshold_reached = false;

    std::optional<ProjectedSummary> chosen;
    std::size_t chosen_row = 0;
    int after = 0;
    for (const auto& [count, k] : first_at) {
        auto s = summarize_projection(draws, data, path.weights, eta_from_active(path.active_sets[k], path.groups),
                                      path.order, opt.ci_level);
        CountSummary row;
        row.count = count;
        row.lambda = path.lambdas[static_cast<Eigen::Index>(k)];
        row.path_index = k;
        row.active = path.active_sets[k];
        row.r2_lower = s.r2_quantiles[0];
        row.r2_median = s.r2_quantiles[1];
        row.r2_upper = s.r2_quantiles[2];
        row.r2_mean = s.r2_samples.mean();
        rep.table.push_back(row);

        if (rep.threshold_reached) {
            if (++after >= opt.extra_counts) break;
            continue;
        }
        if (row.r2_upper > opt.threshold) {
            rep.threshold_reached = true;
            chosen = std::move(s);
            chosen_row = rep.table.size() - 1;
            if (opt.extra_counts <= 0) break;
        } else if (count == first_at.rbegin()->first) {
            chosen = std::move(s);
            chosen_row = rep.table.size() - 1;
        }
    }

    const auto& row = rep.table[chosen_row];
    rep.selected_count = row.count;
    rep.selected_lambda = row.lambda;
    rep.selected_active = row.active;
    std::vector<int> times;
    for (const auto& a : row.active) times.push_back(a.t + 1);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    rep.selected_times = times;

    detail::pointwise_bands(chosen->projected, opt.ci_level, rep.projected_mean, rep.projected_lower, rep.projected_upper);
    detail::pointwise_bands(draws.beta, opt.ci_level, rep.posterior_mean, rep.posterior_lower, rep.posterior_upper);
    return rep;
}

} // namespace dcpt
