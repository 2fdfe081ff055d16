#include <iostream>

#include <CLI11.hpp>

#include <dcpt/io/commands.hpp>

using dcpt::io::json;

int main(int argc, char** argv)
{
    CLI::App app{"Decoupled changepoint detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dcpt::io::tool_version);

    dcpt::io::SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Generate a simulated dataset");
    sim->add_option("--design", sa.design, "Design name")->capture_default_str();
    sim->add_option("--magnitude", sa.magnitude, "Change magnitude")->capture_default_str();
    sim->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
    sim->add_option("-o,--out", sa.out, "Output CSV (default stdout)");
    sim->add_option("--truth", sa.truth_out, "Write the true changepoints to this JSON file");

    dcpt::io::FitArgs fa;
    std::optional<int> f_order;
    std::optional<std::string> f_shrinkage;
    std::optional<bool> f_sv;
    std::optional<bool> f_outlier;
    std::optional<int> f_burn;
    std::optional<int> f_save;
    std::optional<std::uint64_t> f_seed;
    auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler and store the posterior");
    fit->add_option("csv", fa.csv, "Input CSV")->required();
    fit->add_option("-c,--config", fa.config, "JSON config file");
    fit->add_option("-o,--out", fa.out, "Posterior artifact (.cbor, or .json)")->capture_default_str();
    fit->add_option("--order", f_order, "Difference order D (1 or 2)");
    fit->add_option("--shrinkage", f_shrinkage, "dynamic or random_walk");
    fit->add_option("--sv-noise", f_sv, "Stochastic volatility noise (true/false)");
    fit->add_option("--outlier-term", f_outlier, "Additive outlier component (true/false)");
    fit->add_option("--burn", f_burn, "Burn-in sweeps");
    fit->add_option("--save", f_save, "Retained sweeps");
    fit->add_option("--seed", f_seed, "Random seed");
    fit->add_flag("!--quiet", fa.quiet, "Report progress on stderr");

    dcpt::io::DetectArgs da;
    std::string d_truth;
    auto* det = app.add_subcommand("detect", "Select changepoints from a stored posterior");
    det->add_option("artifact", da.artifact, "Posterior artifact")->required();
    det->add_option("--order", da.order, "Difference order of the loss (default: model order)");
    det->add_option("--groups", da.groups, "singletons, all, or 1-based groups like 1,2;3")->capture_default_str();
    det->add_option("--threshold", da.threshold, "R2 threshold")->capture_default_str();
    det->add_option("--ci-level", da.ci_level, "Credible level of the R2 interval")->capture_default_str();
    det->add_option("--extra-counts", da.extra_counts, "Counts tabulated past the selection")->capture_default_str();
    det->add_option("--truth", d_truth, "True changepoints (1-based, comma separated) for scoring");
    det->add_option("--tolerance", da.tolerance, "Matching tolerance")->capture_default_str();
    det->add_option("-o,--out-prefix", da.out_prefix, "Prefix of the output files")->capture_default_str();

    dcpt::io::BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run a simulation benchmark");
    bench->add_option("--design", ba.design, "Design name")->capture_default_str();
    bench->add_option("--magnitude", ba.magnitudes, "Magnitudes (default: design grid)");
    bench->add_option("--reps", ba.reps, "Replicates per magnitude")->capture_default_str();
    bench->add_option("--methods", ba.methods, "DC-DS, DC-RW, PELT")->delimiter(',');
    bench->add_option("--seed", ba.seed, "Base seed")->capture_default_str();
    bench->add_option("--burn", ba.n_burn, "Burn-in sweeps")->capture_default_str();
    bench->add_option("--save", ba.n_save, "Retained sweeps")->capture_default_str();
    bench->add_option("--threads", ba.threads, "Worker threads (0: all cores)")->capture_default_str();
    bench->add_option("--tolerance", ba.tolerance, "Matching tolerance")->capture_default_str();
    bench->add_option("-o,--out-prefix", ba.out_prefix, "Prefix of the output files")->capture_default_str();
    bench->add_flag("!--quiet", ba.quiet, "Report progress on stderr");
    bool full = false;
    bench->add_flag("--full", full, "Use 100 replicates");

    dcpt::io::ScoreArgs sc;
    std::string s_truth;
    std::string s_pred;
    auto* score = app.add_subcommand("score", "Compare two changepoint lists");
    score->add_option("--truth", s_truth, "True changepoints (1-based)")->required();
    score->add_option("--pred", s_pred, "Predicted changepoints (1-based)")->required();
    score->add_option("-n,--length", sc.n, "Series length")->required();
    score->add_option("--tolerance", sc.tolerance, "Matching tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            dcpt::io::cmd_simulate(sa);
        } else if (*fit) {
            if (f_order) fa.overrides["order"] = *f_order;
            if (f_shrinkage) fa.overrides["shrinkage"] = *f_shrinkage;
            if (f_sv) fa.overrides["sv_noise"] = *f_sv;
            if (f_outlier) fa.overrides["outlier_term"] = *f_outlier;
            if (f_burn) fa.overrides["n_burn"] = *f_burn;
            if (f_save) fa.overrides["n_save"] = *f_save;
            if (f_seed) fa.overrides["seed"] = *f_seed;
            const auto art = dcpt::io::cmd_fit(fa);
            std::cout << "wrote " << fa.out << " (" << art.draws.draws() << " draws, thin " << art.draws.thin << ")\n";
        } else if (*det) {
            if (!d_truth.empty()) da.truth = dcpt::io::parse_int_list(d_truth);
            const auto out = dcpt::io::cmd_detect(da);
            std::cout << out.report.dump(2) << "\n";
        } else if (*bench) {
            if (full) ba.reps = 100;
            const auto res = dcpt::io::cmd_bench(ba);
            for (const auto& r : res.rows) {
                std::cout << r.design << " " << r.magnitude << " " << r.method << " F1=" << r.f1 << " rand=" << r.rand_mean
                          << " ari=" << r.ari_mean << " failures=" << r.failures << "\n";
            }
        } else if (*score) {
            sc.truth = dcpt::io::parse_int_list(s_truth);
            sc.predicted = dcpt::io::parse_int_list(s_pred);
            std::cout << dcpt::io::cmd_score(sc).dump(2) << "\n";
        }
    } catch (const dcpt::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dcpt::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
