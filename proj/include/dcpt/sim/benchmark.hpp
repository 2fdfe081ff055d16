#pragma once
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <dcpt/metrics/metrics.hpp>
#include <dcpt/pipeline.hpp>
#include <dcpt/sampler/gibbs.hpp>
#include <dcpt/sim/generators.hpp>
#include <dcpt/sim/pelt.hpp>

namespace dcpt::sim {

enum class Method
{
    DcDs,
    DcRw,
    Pelt,
};

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::DcDs: return "DC-DS";
    case Method::DcRw: return "DC-RW";
    case Method::Pelt: return "PELT";
    }
    return "?";
}

inline Method method_from_string(const std::string& s)
{
    if (s == "DC-DS" || s == "dc-ds") return Method::DcDs;
    if (s == "DC-RW" || s == "dc-rw") return Method::DcRw;
    if (s == "PELT" || s == "pelt") return Method::Pelt;
    throw ValidationError("unknown method '" + s + "' (expected DC-DS, DC-RW or PELT)");
}

struct BenchOptions
{
    Design design = Design::MeanGaussian;
    std::vector<double> magnitudes;  // empty: design default grid
    int reps = 30;
    std::vector<Method> methods{Method::DcDs, Method::DcRw, Method::Pelt};
    std::uint64_t seed = 1;
    /// Sampler settings shared by the decoupled methods (seed is overridden per replicate).
    DlmConfig sampler;
    int tolerance = 5;
    int threads = 0;  // 0: hardware concurrency
};

struct ReplicateResult
{
    double magnitude = 0.0;
    Method method = Method::DcDs;
    int rep = 0;
    std::uint64_t data_seed = 0;
    bool ok = false;
    std::string error;
    std::vector<int> truth;
    std::vector<int> predicted;
    double rand = 0.0;
    double adjusted_rand = 0.0;
    MatchScore score;
};

struct BenchRow
{
    std::string design;
    double magnitude = 0.0;
    std::string method;
    int reps = 0;
    int failures = 0;
    double rand_mean = 0.0;
    double rand_se = 0.0;
    double ari_mean = 0.0;
    double ari_se = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int true_positives = 0;
    int n_true = 0;
    int n_pred = 0;
};

struct BenchResult
{
    std::vector<BenchRow> rows;
    std::vector<ReplicateResult> replicates;
};

/// Data seed of replicate r; shared across magnitudes and methods.
inline std::uint64_t replicate_seed(std::uint64_t base, int rep)
{
    return mix_seed(mix_seed(base) + static_cast<std::uint64_t>(rep));
}

/// Sampler and loss settings used for a design under a decoupled method.
inline DlmConfig method_config(Design d, Method m, const DlmConfig& base, std::uint64_t seed)
{
    DlmConfig c = base;
    c.shrinkage = m == Method::DcRw ? Shrinkage::RandomWalkConstantVariance : Shrinkage::DynamicShrinkage;
    c.outlier_term = is_mean_design(d);
    c.seed = seed;
    return c;
}

/// Changepoints (1-based) found by one method on one simulated dataset.
inline std::vector<int> run_method(Design d, Method m, const Simulated& s, const DlmConfig& base, std::uint64_t seed)
{
    if (m == Method::Pelt) {
        if (s.data.p() != 1 || !(s.data.x().array() == 1.0).all() || s.data.l() > 0) {
            throw ValidationError("PELT applies to mean-change designs only");
        }
        return pelt_detect(s.data.y());
    }
    const auto cfg = method_config(d, m, base, seed);
    const auto draws = run_gibbs(s.data, cfg);
    DetectOptions opt;
    opt.order = cfg.order;
    opt.groups = GroupSpec::all_in_one(static_cast<int>(s.data.p()));
    return detect(draws, s.data, opt).report.selected_times;
}

namespace detail {

inline double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Runs fn(k) for k in [0, count) on a pool of worker threads.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn)
{
    unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    hw = static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) fn(k);
    };
    if (hw <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < hw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace detail

/// Pooled precision/recall/F1 and mean +- SE of Rand indices per (magnitude, method).
inline std::vector<BenchRow> summarize(Design d, const std::vector<ReplicateResult>& reps)
{
    std::vector<BenchRow> rows;
    std::vector<std::pair<double, Method>> keys;
    for (const auto& r : reps) {
        if (std::find(keys.begin(), keys.end(), std::make_pair(r.magnitude, r.method)) == keys.end()) {
            keys.emplace_back(r.magnitude, r.method);
        }
    }
    for (const auto& [mag, m] : keys) {
        BenchRow row;
        row.design = to_string(d);
        row.magnitude = mag;
        row.method = to_string(m);
        std::vector<double> ri;
        std::vector<double> ari;
        for (const auto& r : reps) {
            if (r.magnitude != mag || r.method != m) continue;
            ++row.reps;
            if (!r.ok) {
                ++row.failures;
                continue;
            }
            ri.push_back(r.rand);
            ari.push_back(r.adjusted_rand);
            row.true_positives += r.score.true_positives;
            row.n_true += r.score.n_true;
            row.n_pred += r.score.n_pred;
        }
        row.rand_mean = detail::mean_of(ri);
        row.rand_se = detail::se_of(ri);
        row.ari_mean = detail::mean_of(ari);
        row.ari_se = detail::se_of(ari);
        const auto pooled = score_counts(row.true_positives, row.n_true, row.n_pred);
        row.precision = pooled.precision;
        row.recall = pooled.recall;
        row.f1 = pooled.f1;
        rows.push_back(row);
    }
    return rows;
}

/**
 * Simulates reps datasets per magnitude and scores every method on them.
 * Failed replicates are recorded and excluded from the averages.
 * Results depend only on the options, not on the thread count.
 */
inline BenchResult run_benchmark(const BenchOptions& opt, const std::function<void(const ReplicateResult&)>& on_done = {})
{
    if (opt.reps < 1) throw ValidationError("reps must be positive");
    if (opt.methods.empty()) throw ValidationError("no methods selected");
    opt.sampler.check();
    const auto mags = opt.magnitudes.empty() ? default_magnitudes(opt.design) : opt.magnitudes;
    std::vector<Method> methods;
    for (auto m : opt.methods) {
        if (m == Method::Pelt && !is_mean_design(opt.design)) continue;
        methods.push_back(m);
    }

    std::vector<ReplicateResult> out;
    for (double mag : mags) {
        for (int r = 0; r < opt.reps; ++r) {
            for (auto m : methods) {
                ReplicateResult rr;
                rr.magnitude = mag;
                rr.method = m;
                rr.rep = r;
                rr.data_seed = replicate_seed(opt.seed, r);
                out.push_back(rr);
            }
        }
    }
    std::mutex mu;
    detail::parallel_for(out.size(), opt.threads, [&](std::size_t k) {
        auto& rr = out[k];
        const auto s = simulate(opt.design, rr.magnitude, rr.data_seed);
        rr.truth = s.truth;
        const int n = static_cast<int>(s.data.n());
        try {
            rr.predicted = run_method(opt.design, rr.method, s, opt.sampler, mix_seed(rr.data_seed));
            rr.rand = rand_index(rr.truth, rr.predicted, n);
            rr.adjusted_rand = adjusted_rand(rr.truth, rr.predicted, n);
            rr.score = match_and_score(rr.truth, rr.predicted, opt.tolerance);
            rr.ok = true;
        } catch (const std::exception& e) {
            rr.error = e.what();
        }
        if (on_done) {
            const std::lock_guard lock(mu);
            on_done(rr);
        }
    });
    return {summarize(opt.design, out), out};
}

} // namespace dcpt::sim
