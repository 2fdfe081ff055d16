#pragma once
#include <algorithm>
#include <cstdlib>
#include <map>
#include <utility>
#include <vector>

#include <dcpt/core/error.hpp>

namespace dcpt {

/**
 * Segment label of each time 1..n (returned 0-based by position) induced by
 * a changepoint set; a changepoint at t starts a new segment at t.
 */
inline std::vector<int> segment_labels(std::vector<int> cps, int n)
{
    if (n < 1) throw ValidationError("series length must be positive");
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    for (int c : cps) {
        if (c < 2 || c > n) throw ValidationError("changepoint " + std::to_string(c) + " outside 2.." + std::to_string(n));
    }
    std::vector<int> lab(static_cast<std::size_t>(n));
    std::size_t k = 0;
    for (int t = 1; t <= n; ++t) {
        while (k < cps.size() && cps[k] <= t) ++k;
        lab[static_cast<std::size_t>(t - 1)] = static_cast<int>(k);
    }
    return lab;
}

namespace detail {

inline double choose2(double m) { return 0.5 * m * (m - 1.0); }

struct PairCounts
{
    double total = 0.0;  // C(n, 2)
    double both = 0.0;   // pairs together in both
    double left = 0.0;   // pairs together in the first partition
    double right = 0.0;  // pairs together in the second partition
};

inline PairCounts pair_counts(const std::vector<int>& a, const std::vector<int>& b)
{
    std::map<std::pair<int, int>, double> cell;
    std::map<int, double> ra;
    std::map<int, double> rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cell[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    PairCounts pc;
    pc.total = choose2(static_cast<double>(a.size()));
    for (const auto& [k, v] : cell) pc.both += choose2(v);
    for (const auto& [k, v] : ra) pc.left += choose2(v);
    for (const auto& [k, v] : rb) pc.right += choose2(v);
    return pc;
}

} // namespace detail

/// Fraction of index pairs on which the two segmentations agree.
inline double rand_index(const std::vector<int>& true_cps, const std::vector<int>& pred_cps, int n)
{
    if (n < 2) return 1.0;
    const auto pc = detail::pair_counts(segment_labels(true_cps, n), segment_labels(pred_cps, n));
    const double agree = pc.total + 2.0 * pc.both - pc.left - pc.right;
    return agree / pc.total;
}

/// Chance-corrected Rand index. When the expected and maximal index coincide,
/// identical partitions score 1 and all others 0.
inline double adjusted_rand(const std::vector<int>& true_cps, const std::vector<int>& pred_cps, int n)
{
    const auto la = segment_labels(true_cps, n);
    const auto lb = segment_labels(pred_cps, n);
    if (n < 2) return 1.0;
    const auto pc = detail::pair_counts(la, lb);
    const double expected = pc.left * pc.right / pc.total;
    const double max_index = 0.5 * (pc.left + pc.right);
    if (max_index == expected) return la == lb ? 1.0 : 0.0;
    return (pc.both - expected) / (max_index - expected);
}

struct MatchScore
{
    int true_positives = 0;
    int n_true = 0;
    int n_pred = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision / recall / F1 from counts, with 0/0 conventions for empty sets.
inline MatchScore score_counts(int tp, int n_true, int n_pred)
{
    MatchScore s{tp, n_true, n_pred, 0.0, 0.0, 0.0};
    if (n_true == 0 && n_pred == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    if (n_pred > 0) s.precision = static_cast<double>(tp) / n_pred;
    if (n_true > 0) s.recall = static_cast<double>(tp) / n_true;
    if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

/// Size of a maximum one-to-one matching with |true - pred| <= tolerance.
inline int max_matching(const std::vector<int>& truth, const std::vector<int>& pred, int tolerance)
{
    std::vector<int> owner(pred.size(), -1);
    std::vector<char> seen;
    const auto augment = [&](auto&& self, std::size_t i) -> bool {
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (seen[j] || std::abs(truth[i] - pred[j]) > tolerance) continue;
            seen[j] = 1;
            if (owner[j] < 0 || self(self, static_cast<std::size_t>(owner[j]))) {
                owner[j] = static_cast<int>(i);
                return true;
            }
        }
        return false;
    };
    int m = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        seen.assign(pred.size(), 0);
        if (augment(augment, i)) ++m;
    }
    return m;
}

/// Greedy matching: pairs in increasing distance, leftmost truth first on ties.
inline int greedy_matching(const std::vector<int>& truth, const std::vector<int>& pred, int tolerance)
{
    struct Cand
    {
        int d, ti, pi;
    };
    std::vector<Cand> c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = 0; j < pred.size(); ++j) {
            const int d = std::abs(truth[i] - pred[j]);
            if (d <= tolerance) c.push_back({d, static_cast<int>(i), static_cast<int>(j)});
        }
    }
    std::sort(c.begin(), c.end(), [&](const Cand& a, const Cand& b) {
        if (a.d != b.d) return a.d < b.d;
        if (truth[a.ti] != truth[b.ti]) return truth[a.ti] < truth[b.ti];
        return pred[a.pi] < pred[b.pi];
    });
    std::vector<char> ut(truth.size(), 0);
    std::vector<char> up(pred.size(), 0);
    int m = 0;
    for (const auto& x : c) {
        if (ut[x.ti] || up[x.pi]) continue;
        ut[x.ti] = up[x.pi] = 1;
        ++m;
    }
    return m;
}

/// Detection quality under optimal one-to-one matching within +-tolerance.
inline MatchScore match_and_score(std::vector<int> true_cps, std::vector<int> pred_cps, int tolerance = 5)
{
    for (auto* v : {&true_cps, &pred_cps}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    const int tp = max_matching(true_cps, pred_cps, tolerance);
    return score_counts(tp, static_cast<int>(true_cps.size()), static_cast<int>(pred_cps.size()));
}

} // namespace dcpt
