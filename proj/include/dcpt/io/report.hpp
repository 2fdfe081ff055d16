#pragma once
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include <dcpt/core/types.hpp>
#include <dcpt/io/csv.hpp>
#include <dcpt/sim/benchmark.hpp>

namespace dcpt::io {

using json = nlohmann::json;

/// Provenance fields embedded in every emitted file.
struct Stamp
{
    std::uint64_t seed = 0;
    std::string config_hash;

    std::string line() const
    {
        return std::string("dcpt version=") + tool_version + " seed=" + std::to_string(seed) + " config_hash=" + config_hash;
    }

    void add_to(json& j) const
    {
        j["tool_version"] = tool_version;
        j["seed"] = seed;
        j["config_hash"] = config_hash;
    }
};

inline json report_to_json(const ChangepointReport& r, const SolutionPath& path, const Dataset& data, const Stamp& stamp)
{
    json j;
    stamp.add_to(j);
    j["order"] = r.order;
    j["threshold"] = r.threshold;
    j["ci_level"] = r.ci_level;
    j["threshold_reached"] = r.threshold_reached;
    if (!r.threshold_reached) {
        j["warning"] = "no changepoint count reached the R2 threshold; returning the largest count on the path";
    }
    j["selected_count"] = r.selected_count;
    j["selected_lambda"] = r.selected_lambda;
    j["changepoint_index"] = r.selected_times;
    std::vector<std::string> labels;
    for (int t : r.selected_times) labels.push_back(data.label(t - 1));
    j["changepoints"] = labels;
    j["active"] = json::array();
    for (const auto& a : r.selected_active) {
        j["active"].push_back({{"index", a.t + 1}, {"label", data.label(a.t)}, {"group", a.group + 1},
                               {"members", [&] {
                                    std::vector<int> m;
                                    for (int v : path.groups.members(a.group)) m.push_back(v + 1);
                                    return m;
                                }()}});
    }
    j["r2_table"] = json::array();
    for (const auto& row : r.table) {
        std::vector<int> times;
        for (const auto& a : row.active) times.push_back(a.t + 1);
        j["r2_table"].push_back({{"count", row.count},
                                 {"lambda", row.lambda},
                                 {"path_index", row.path_index},
                                 {"r2_lower", row.r2_lower},
                                 {"r2_median", row.r2_median},
                                 {"r2_upper", row.r2_upper},
                                 {"r2_mean", row.r2_mean},
                                 {"changepoint_index", times}});
    }
    j["path"] = json::array();
    for (std::size_t k = 0; k < path.size(); ++k) {
        j["path"].push_back({{"lambda", path.lambdas[static_cast<Eigen::Index>(k)]},
                             {"count", path.active_sets[k].size()},
                             {"objective", path.objectives[k]}});
    }
    for (const auto& row : r.table) {
        const auto& a = path.alpha_fits[row.path_index];
        if (row.count == r.selected_count && a.size() > 0) {
            j["covariate_coefficients"] = std::vector<double>(a.data(), a.data() + a.size());
        }
    }
    if (r.metrics) {
        j["metrics"] = {{"rand", r.metrics->rand},
                        {"adjusted_rand", r.metrics->adjusted_rand},
                        {"precision", r.metrics->precision},
                        {"recall", r.metrics->recall},
                        {"f1", r.metrics->f1}};
    }
    return j;
}

/// Per-count R^2 quantiles.
inline void write_r2_table(std::ostream& out, const ChangepointReport& r, const Stamp& stamp)
{
    CsvWriter w(out);
    w.comment(stamp.line());
    w.row({"count", "lambda", "r2_lower", "r2_median", "r2_upper", "r2_mean", "selected"});
    for (const auto& row : r.table) {
        w.row({std::to_string(row.count), fmt(row.lambda), fmt(row.r2_lower), fmt(row.r2_median), fmt(row.r2_upper),
               fmt(row.r2_mean), row.count == r.selected_count ? "1" : "0"});
    }
}

/// Posterior and projected-posterior mean with pointwise bands, per series.
inline void write_fit_bands(std::ostream& out, const ChangepointReport& r, const Dataset& data, const Stamp& stamp)
{
    CsvWriter w(out);
    w.comment(stamp.line());
    w.row({"t", "series", "y", "posterior_mean", "posterior_lower", "posterior_upper", "projected_mean",
           "projected_lower", "projected_upper"});
    for (Eigen::Index j = 0; j < r.posterior_mean.cols(); ++j) {
        for (Eigen::Index t = 0; t < r.posterior_mean.rows(); ++t) {
            w.row({data.label(t), std::to_string(j + 1), fmt(data.y()[t]), fmt(r.posterior_mean(t, j)),
                   fmt(r.posterior_lower(t, j)), fmt(r.posterior_upper(t, j)), fmt(r.projected_mean(t, j)),
                   fmt(r.projected_lower(t, j)), fmt(r.projected_upper(t, j))});
        }
    }
}

/// One row per lambda on the solution path.
inline void write_path(std::ostream& out, const SolutionPath& path, const Stamp& stamp)
{
    CsvWriter w(out);
    w.comment(stamp.line());
    w.row({"index", "lambda", "count", "objective", "changepoint_index"});
    for (std::size_t k = 0; k < path.size(); ++k) {
        std::string times;
        for (const auto& a : path.active_sets[k]) times += (times.empty() ? "" : " ") + std::to_string(a.t + 1);
        w.row({std::to_string(k), fmt(path.lambdas[static_cast<Eigen::Index>(k)]), std::to_string(path.active_sets[k].size()),
               fmt(path.objectives[k]), times});
    }
}

/// Long-format benchmark table: one row per (design, magnitude, method, metric).
inline void write_bench_csv(std::ostream& out, const std::vector<sim::BenchRow>& rows, const Stamp& stamp)
{
    CsvWriter w(out);
    w.comment(stamp.line());
    w.row({"design", "magnitude", "method", "metric", "value", "se", "reps", "failures"});
    for (const auto& r : rows) {
        const auto emit = [&](const char* metric, double v, const std::string& se) {
            w.row({r.design, fmt(r.magnitude), r.method, metric, fmt(v), se, std::to_string(r.reps),
                   std::to_string(r.failures)});
        };
        emit("rand", r.rand_mean, fmt(r.rand_se));
        emit("adjusted_rand", r.ari_mean, fmt(r.ari_se));
        emit("precision", r.precision, "");
        emit("recall", r.recall, "");
        emit("f1", r.f1, "");
    }
}

inline json bench_to_json(const sim::BenchResult& res, const Stamp& stamp, const json& settings)
{
    json j;
    stamp.add_to(j);
    j["settings"] = settings;
    j["summary"] = json::array();
    for (const auto& r : res.rows) {
        j["summary"].push_back({{"design", r.design},
                                {"magnitude", r.magnitude},
                                {"method", r.method},
                                {"reps", r.reps},
                                {"failures", r.failures},
                                {"rand_mean", r.rand_mean},
                                {"rand_se", r.rand_se},
                                {"adjusted_rand_mean", r.ari_mean},
                                {"adjusted_rand_se", r.ari_se},
                                {"precision", r.precision},
                                {"recall", r.recall},
                                {"f1", r.f1},
                                {"true_positives", r.true_positives},
                                {"n_true", r.n_true},
                                {"n_pred", r.n_pred}});
    }
    j["replicates"] = json::array();
    for (const auto& r : res.replicates) {
        json e = {{"magnitude", r.magnitude}, {"method", sim::to_string(r.method)}, {"rep", r.rep},
                  {"data_seed", r.data_seed}, {"ok", r.ok},                       {"truth", r.truth},
                  {"predicted", r.predicted}};
        if (r.ok) {
            e["rand"] = r.rand;
            e["adjusted_rand"] = r.adjusted_rand;
            e["f1"] = r.score.f1;
        } else {
            e["error"] = r.error;
        }
        j["replicates"].push_back(e);
    }
    return j;
}

} // namespace dcpt::io
