#pragma once
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <dcpt/dcpt.hpp>
#include <dcpt/io/artifact.hpp>
#include <dcpt/io/config.hpp>
#include <dcpt/io/csv.hpp>
#include <dcpt/io/report.hpp>

namespace dcpt::io {

/// "singletons", "all", or 1-based groups such as "1,2;3".
inline GroupSpec parse_groups(const std::string& s, int p)
{
    if (s.empty() || s == "singletons" || s == "separate") return GroupSpec::singletons(p);
    if (s == "all" || s == "joint") return GroupSpec::all_in_one(p);
    std::vector<std::vector<int>> groups;
    std::stringstream gs(s);
    std::string g;
    while (std::getline(gs, g, ';')) {
        std::vector<int> members;
        std::stringstream ms(g);
        std::string m;
        while (std::getline(ms, m, ',')) {
            const auto v = detail::parse_double(detail::trim(m));
            if (!v || *v != std::floor(*v)) throw ValidationError("groups: cannot parse '" + m + "'");
            members.push_back(static_cast<int>(*v) - 1);
        }
        groups.push_back(std::move(members));
    }
    return GroupSpec(std::move(groups), p);
}

/// Comma or space separated integers.
inline std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::string tok;
    for (char ch : s + ",") {
        if (ch == ',' || ch == ' ' || ch == ';') {
            const auto t = detail::trim(tok);
            tok.clear();
            if (t.empty()) continue;
            const auto v = detail::parse_double(t);
            if (!v || *v != std::floor(*v)) throw ValidationError("cannot parse changepoint '" + t + "'");
            out.push_back(static_cast<int>(*v));
        } else {
            tok += ch;
        }
    }
    return out;
}

inline std::ofstream open_out(const std::string& path)
{
    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    return out;
}

struct SimulateArgs
{
    std::string design = "mean-gaussian";
    double magnitude = 1.0;
    std::uint64_t seed = 1;
    std::string out;
    std::string truth_out;
};

inline sim::Simulated cmd_simulate(const SimulateArgs& a)
{
    const auto d = sim::design_from_string(a.design);
    if (!(a.magnitude >= 0.0)) throw ValidationError("magnitude must be non-negative");
    auto s = sim::simulate(d, a.magnitude, a.seed);
    std::string truth;
    for (int t : s.truth) truth += (truth.empty() ? "" : " ") + std::to_string(t);
    const json settings = {{"design", a.design}, {"magnitude", a.magnitude}};
    const Stamp stamp{a.seed, config_hash(settings)};
    const std::string line = stamp.line() + " design=" + a.design + " magnitude=" + fmt(a.magnitude) + " truth=" + truth;
    if (a.out.empty() || a.out == "-") {
        write_dataset(std::cout, s.data, line);
    } else {
        auto out = open_out(a.out);
        write_dataset(out, s.data, line);
    }
    if (!a.truth_out.empty()) {
        json j;
        stamp.add_to(j);
        j["design"] = a.design;
        j["magnitude"] = a.magnitude;
        j["changepoints"] = s.truth;
        auto out = open_out(a.truth_out);
        out << j.dump(2) << "\n";
    }
    return s;
}

struct FitArgs
{
    std::string csv;
    std::string config;
    /// Overrides applied after the config file (same keys).
    json overrides = json::object();
    std::string out = "posterior.cbor";
    bool quiet = true;
};

inline PosteriorArtifact cmd_fit(const FitArgs& a)
{
    auto data = read_dataset_file(a.csv);
    DlmConfig cfg = a.config.empty() ? DlmConfig{} : read_config_file(a.config);
    cfg = config_from_json(a.overrides, cfg);
    const auto in = validate(data, cfg);
    ProgressFn progress;
    if (!a.quiet) {
        progress = [](int it, int total) {
            if ((it + 1) % 1000 == 0 || it + 1 == total) std::cerr << "sweep " << it + 1 << "/" << total << "\n";
        };
    }
    PosteriorArtifact art;
    art.data = data;
    art.config = cfg;
    art.draws = thin_draws(run_gibbs(in, progress));
    save_artifact(art, a.out);
    return art;
}

struct DetectArgs
{
    std::string artifact;
    int order = 0;  // 0: the model's order
    std::string groups = "singletons";
    double threshold = 0.9;
    double ci_level = 0.9;
    int extra_counts = 5;
    std::optional<std::vector<int>> truth;
    int tolerance = 5;
    std::string out_prefix = "detect";
};

struct DetectOutput
{
    Detection detection;
    json report;
};

inline DetectOutput cmd_detect(const DetectArgs& a)
{
    const auto art = load_artifact(a.artifact);
    DetectOptions opt;
    opt.order = a.order > 0 ? a.order : art.config.order;
    opt.groups = parse_groups(a.groups, static_cast<int>(art.data.p()));
    opt.select.threshold = a.threshold;
    opt.select.ci_level = a.ci_level;
    opt.select.extra_counts = a.extra_counts;
    if (opt.order * 2 + 2 > art.data.n()) throw ValidationError("series too short for the requested order");

    DetectOutput out;
    out.detection = detect(art.draws, art.data, opt);
    auto& rep = out.detection.report;
    if (a.truth) {
        const int n = static_cast<int>(art.data.n());
        const auto sc = match_and_score(*a.truth, rep.selected_times, a.tolerance);
        rep.metrics = MetricBlock{rand_index(*a.truth, rep.selected_times, n),
                                  adjusted_rand(*a.truth, rep.selected_times, n), sc.precision, sc.recall, sc.f1};
    }
    const auto cfg = config_to_json(art.config);
    const Stamp stamp{art.config.seed, config_hash(cfg)};
    out.report = report_to_json(rep, out.detection.path, art.data, stamp);
    auto groups = out.detection.path.groups.groups();
    for (auto& g : groups) {
        for (auto& j : g) ++j;
    }
    out.report["groups"] = groups;
    {
        auto f = open_out(a.out_prefix + "_report.json");
        f << out.report.dump(2) << "\n";
    }
    {
        auto f = open_out(a.out_prefix + "_r2.csv");
        write_r2_table(f, rep, stamp);
    }
    {
        auto f = open_out(a.out_prefix + "_fit.csv");
        write_fit_bands(f, rep, art.data, stamp);
    }
    {
        auto f = open_out(a.out_prefix + "_path.csv");
        write_path(f, out.detection.path, stamp);
    }
    return out;
}

struct BenchArgs
{
    std::string design = "mean-gaussian";
    std::vector<double> magnitudes;
    int reps = 30;
    std::vector<std::string> methods{"DC-DS", "DC-RW", "PELT"};
    std::uint64_t seed = 1;
    int n_burn = 5000;
    int n_save = 5000;
    int threads = 0;
    int tolerance = 5;
    std::string out_prefix = "bench";
    bool quiet = true;
};

inline sim::BenchResult cmd_bench(const BenchArgs& a)
{
    sim::BenchOptions o;
    o.design = sim::design_from_string(a.design);
    o.magnitudes = a.magnitudes;
    o.reps = a.reps;
    o.methods.clear();
    for (const auto& m : a.methods) o.methods.push_back(sim::method_from_string(m));
    o.seed = a.seed;
    o.sampler.n_burn = a.n_burn;
    o.sampler.n_save = a.n_save;
    o.threads = a.threads;
    o.tolerance = a.tolerance;
    std::function<void(const sim::ReplicateResult&)> progress;
    if (!a.quiet) {
        progress = [](const sim::ReplicateResult& r) {
            std::cerr << sim::to_string(r.method) << " magnitude " << r.magnitude << " rep " << r.rep
                      << (r.ok ? "" : " failed: " + r.error) << "\n";
        };
    }
    const auto res = sim::run_benchmark(o, progress);
    json settings = {{"design", a.design}, {"reps", a.reps}, {"methods", a.methods}, {"n_burn", a.n_burn},
                     {"n_save", a.n_save}, {"tolerance", a.tolerance}};
    settings["magnitudes"] = a.magnitudes.empty() ? sim::default_magnitudes(o.design) : a.magnitudes;
    const Stamp stamp{a.seed, config_hash(settings)};
    {
        auto f = open_out(a.out_prefix + ".csv");
        write_bench_csv(f, res.rows, stamp);
    }
    {
        auto f = open_out(a.out_prefix + ".json");
        f << bench_to_json(res, stamp, settings).dump(2) << "\n";
    }
    return res;
}

struct ScoreArgs
{
    std::vector<int> truth;
    std::vector<int> predicted;
    int n = 0;
    int tolerance = 5;
};

inline json cmd_score(const ScoreArgs& a)
{
    if (a.n < 1) throw ValidationError("series length n must be positive");
    const auto sc = match_and_score(a.truth, a.predicted, a.tolerance);
    json j;
    j["tool_version"] = tool_version;
    j["n"] = a.n;
    j["tolerance"] = a.tolerance;
    j["truth"] = a.truth;
    j["predicted"] = a.predicted;
    j["rand"] = rand_index(a.truth, a.predicted, a.n);
    j["adjusted_rand"] = adjusted_rand(a.truth, a.predicted, a.n);
    j["precision"] = sc.precision;
    j["recall"] = sc.recall;
    j["f1"] = sc.f1;
    j["true_positives"] = sc.true_positives;
    return j;
}

} // namespace dcpt::io
