#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::sim {

/// Noise scale from the median absolute deviation of first differences.
inline double mad_scale(const Vector& y)
{
    const auto n = y.size();
    if (n < 2) return 1.0;
    std::vector<double> d(static_cast<std::size_t>(n - 1));
    for (Eigen::Index t = 1; t < n; ++t) d[static_cast<std::size_t>(t - 1)] = y[t] - y[t - 1];
    const auto median = [](std::vector<double> v) {
        const auto m = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
        double hi = v[m];
        if (v.size() % 2 == 1) return hi;
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
        return 0.5 * (lo + hi);
    };
    const double med = median(d);
    std::vector<double> dev(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) dev[k] = std::fabs(d[k] - med);
    double s = 1.4826 * median(dev) / std::sqrt(2.0);
    if (!(s > 0.0)) {
        const Eigen::Map<const Vector> dv(d.data(), static_cast<Eigen::Index>(d.size()));
        const double var = (dv.array() - dv.mean()).square().sum() / std::max<double>(1.0, static_cast<double>(d.size()) - 1.0);
        s = std::sqrt(var / 2.0);
    }
    return s > 0.0 ? s : 1.0;
}

/// Segment cost sum (y - mean)^2 / sigma^2 from prefix sums, segment (a, b].
class MeanCost
{
public:
    MeanCost(const Vector& y, double scale) : s1_(y.size() + 1), s2_(y.size() + 1)
    {
        s1_[0] = s2_[0] = 0.0;
        for (Eigen::Index t = 0; t < y.size(); ++t) {
            const double v = y[t] / scale;
            s1_[t + 1] = s1_[t] + v;
            s2_[t + 1] = s2_[t] + v * v;
        }
    }

    double operator()(Eigen::Index a, Eigen::Index b) const
    {
        const double m = static_cast<double>(b - a);
        const double s = s1_[b] - s1_[a];
        return std::max(0.0, s2_[b] - s2_[a] - s * s / m);
    }

private:
    Vector s1_;
    Vector s2_;
};

struct PeltOptions
{
    /// Defaults to 2 log n.
    double penalty = -1.0;
    int min_seg = 2;
    /// Defaults to the MAD scale of first differences.
    double scale = -1.0;
};

namespace detail {

inline std::vector<int> backtrack(const std::vector<Eigen::Index>& last, Eigen::Index n)
{
    std::vector<int> cps;
    for (auto t = n; t > 0; t = last[static_cast<std::size_t>(t)]) {
        if (last[static_cast<std::size_t>(t)] > 0) cps.push_back(static_cast<int>(last[static_cast<std::size_t>(t)]) + 1);
    }
    std::reverse(cps.begin(), cps.end());
    return cps;
}

inline void resolve(const Vector& y, PeltOptions& o)
{
    if (y.size() < 1) throw ValidationError("empty series");
    if (!y.allFinite()) throw ValidationError("series contains non-finite values");
    if (o.min_seg < 1) throw ValidationError("min_seg must be at least 1");
    if (o.penalty < 0.0) o.penalty = 2.0 * std::log(static_cast<double>(y.size()));
    if (!(o.scale > 0.0)) o.scale = mad_scale(y);
}

} // namespace detail

/**
 * Penalized optimal partition with Gaussian mean-change cost and PELT
 * pruning. Returns 1-based changepoints (first index of each new segment).
 */
inline std::vector<int> pelt_detect(const Vector& y, PeltOptions opt = {})
{
    detail::resolve(y, opt);
    const auto n = y.size();
    const auto ms = opt.min_seg;
    const MeanCost cost(y, opt.scale);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(static_cast<std::size_t>(n + 1), inf);
    std::vector<Eigen::Index> last(static_cast<std::size_t>(n + 1), 0);
    f[0] = -opt.penalty;

    // candidates and the time after which each may be dropped
    std::vector<Eigen::Index> cand;
    std::vector<Eigen::Index> drop_after(static_cast<std::size_t>(n + 1), -1);
    for (Eigen::Index t = ms; t <= n; ++t) {
        const auto fresh = t - ms;
        if (fresh == 0 || std::isfinite(f[static_cast<std::size_t>(fresh)])) cand.push_back(fresh);
        double best = inf;
        Eigen::Index arg = 0;
        for (auto tau : cand) {
            const double v = f[static_cast<std::size_t>(tau)] + cost(tau, t) + opt.penalty;
            if (v < best) {
                best = v;
                arg = tau;
            }
        }
        f[static_cast<std::size_t>(t)] = best;
        last[static_cast<std::size_t>(t)] = arg;

        const double slack = 1e-9 * (1.0 + std::fabs(best));
        std::vector<Eigen::Index> keep;
        keep.reserve(cand.size());
        for (auto tau : cand) {
            auto& da = drop_after[static_cast<std::size_t>(tau)];
            if (da < 0 && f[static_cast<std::size_t>(tau)] + cost(tau, t) > best + slack) da = t + ms;
            if (da >= 0 && t >= da) continue;
            keep.push_back(tau);
        }
        cand.swap(keep);
    }
    return detail::backtrack(last, n);
}

/// Unpruned O(n^2) optimal partitioning; same cost, penalty and tie rule.
inline std::vector<int> optimal_partition(const Vector& y, PeltOptions opt = {})
{
    detail::resolve(y, opt);
    const auto n = y.size();
    const auto ms = opt.min_seg;
    const MeanCost cost(y, opt.scale);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(static_cast<std::size_t>(n + 1), inf);
    std::vector<Eigen::Index> last(static_cast<std::size_t>(n + 1), 0);
    f[0] = -opt.penalty;
    for (Eigen::Index t = ms; t <= n; ++t) {
        double best = inf;
        Eigen::Index arg = 0;
        for (Eigen::Index tau = 0; tau <= t - ms; ++tau) {
            if (!std::isfinite(f[static_cast<std::size_t>(tau)])) continue;
            const double v = f[static_cast<std::size_t>(tau)] + cost(tau, t) + opt.penalty;
            if (v < best) {
                best = v;
                arg = tau;
            }
        }
        f[static_cast<std::size_t>(t)] = best;
        last[static_cast<std::size_t>(t)] = arg;
    }
    return detail::backtrack(last, n);
}

} // namespace dcpt::sim
