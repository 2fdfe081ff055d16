#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <dcpt/io/commands.hpp>

using namespace dcpt;
using namespace dcpt::io;
namespace fs = std::filesystem;

namespace {

Dataset parse(const std::string& text)
{
    std::istringstream in(text);
    return read_dataset(in, "test.csv");
}

std::string error_of(const std::string& text)
{
    try {
        parse(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class TempDir : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("dcpt_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

int run_cli(const std::string& args, const std::string& log)
{
    const std::string cmd = std::string(DCPT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PosteriorDraws tiny_draws(Eigen::Index n, Eigen::Index S, Eigen::Index l)
{
    PosteriorDraws d;
    d.order = 1;
    d.beta = {Matrix::Random(n, S), Matrix::Random(n, S)};
    d.sigma2_eps = Matrix::Random(n, S).array().abs() + 0.1;
    d.alpha = Matrix::Random(l, S);
    d.zeta = Matrix::Random(n, S);
    d.log_evol_var = {Matrix::Random(n - 1, S), Matrix::Random(n - 1, S)};
    return d;
}

} // namespace

TEST(Csv, MinimalTimeAndValue)
{
    const auto d = parse("t,y\n2001,1.5\n2002,2\n2003,-0.25\n");
    EXPECT_EQ(d.n(), 3);
    EXPECT_EQ(d.p(), 1);
    EXPECT_EQ(d.l(), 0);
    EXPECT_TRUE((d.x().array() == 1.0).all());
    EXPECT_EQ(d.label(1), "2002");
    EXPECT_DOUBLE_EQ(d.y()[2], -0.25);
}

TEST(Csv, PredictorsAndCovariates)
{
    const auto d = parse("# comment\ny,x1,x2,x3,z1,z2\n1,0.1,0.2,0.3,1,0\n2,0.4,0.5,0.6,0,1\n");
    EXPECT_EQ(d.p(), 3);
    EXPECT_EQ(d.l(), 2);
    EXPECT_DOUBLE_EQ(d.x()(1, 2), 0.6);
    EXPECT_DOUBLE_EQ(d.zc()(1, 1), 1.0);
    EXPECT_EQ(d.label(0), "1");
}

TEST(Csv, ErrorsNameTheLine)
{
    EXPECT_NE(error_of("t,y\n1,2\n2,abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("t,y\n1,2\n2\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("t,y\n1,2\n2,NA\n").find("line 3"), std::string::npos);
    EXPECT_FALSE(error_of("t,x1\n1,2\n").empty());
    EXPECT_FALSE(error_of("y,x2\n1,2\n").empty());
    EXPECT_FALSE(error_of("y,y\n1,2\n").empty());
    EXPECT_FALSE(error_of("").empty());
}

TEST(Csv, RoundTripThroughWriter)
{
    const auto s = sim::gen_regression_with_covariates(1.0, 3, 20);
    std::ostringstream out;
    write_dataset(out, s.data, "stamp");
    const auto back = parse(out.str());
    EXPECT_TRUE((back.y().array() == s.data.y().array()).all());
    EXPECT_TRUE((back.x().array() == s.data.x().array()).all());
    EXPECT_TRUE((back.zc().array() == s.data.zc().array()).all());
}

TEST(Config, RoundTripAndOverrides)
{
    DlmConfig c;
    c.order = 2;
    c.shrinkage = Shrinkage::RandomWalkConstantVariance;
    c.sv_priors.phi_a = 3.0;
    c.dsp.ar_mean_prior_mean = -4.0;
    c.seed = 99;
    const auto back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
    const auto over = config_from_json(json{{"n_save", 200}, {"D", 1}}, c);
    EXPECT_EQ(over.n_save, 200);
    EXPECT_EQ(over.order, 1);
    EXPECT_EQ(over.seed, 99u);
    EXPECT_TRUE(std::isnan(config_from_json(json{{"dsp", {{"ar_mean_prior_mean", nullptr}}}}).dsp.ar_mean_prior_mean));
}

TEST(Config, RejectsUnknownAndInvalid)
{
    EXPECT_THROW(config_from_json(json{{"n_svae", 100}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"sv_priors", {{"bogus", 1}}}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"shrinkage", "lasso"}}), ValidationError);
    EXPECT_EQ(config_hash(config_to_json(DlmConfig{})), config_hash(config_to_json(DlmConfig{})));
    DlmConfig other;
    other.seed = 2;
    EXPECT_NE(config_hash(config_to_json(DlmConfig{})), config_hash(config_to_json(other)));
}

TEST_F(TempDir, ArtifactRoundTripBinaryAndJson)
{
    PosteriorArtifact a;
    a.data = sim::gen_regression_with_covariates(1.0, 4, 15).data;
    a.data = Dataset(a.data.y(), Matrix::Random(15, 2), a.data.zc());
    a.config.seed = 17;
    a.draws = tiny_draws(15, 6, 2);
    for (const auto* name : {"post.cbor", "post.json"}) {
        save_artifact(a, path(name));
        const auto b = load_artifact(path(name));
        EXPECT_EQ(b.config.seed, 17u);
        EXPECT_TRUE((b.data.y().array() == a.data.y().array()).all()) << name;
        EXPECT_TRUE((b.data.zc().array() == a.data.zc().array()).all());
        EXPECT_TRUE((b.draws.beta[1].array() == a.draws.beta[1].array()).all()) << name;
        EXPECT_TRUE((b.draws.sigma2_eps.array() == a.draws.sigma2_eps.array()).all());
        EXPECT_TRUE((b.draws.alpha.array() == a.draws.alpha.array()).all());
        ASSERT_TRUE(b.draws.zeta.has_value());
        EXPECT_TRUE((b.draws.zeta->array() == a.draws.zeta->array()).all());
        EXPECT_TRUE((b.draws.log_evol_var[0].array() == a.draws.log_evol_var[0].array()).all());
    }
}

TEST_F(TempDir, ArtifactVersionChecked)
{
    PosteriorArtifact a;
    a.data = Dataset::mean_change(Vector::LinSpaced(10, 0, 1));
    a.draws = tiny_draws(10, 3, 0);
    a.draws.beta.pop_back();
    a.draws.log_evol_var.pop_back();
    auto j = artifact_to_json(a, false);
    j["format_version"] = 99;
    EXPECT_THROW(artifact_from_json(j), ValidationError);
    j["format_version"] = artifact_format_version;
    j["format"] = "other";
    EXPECT_THROW(artifact_from_json(j), ValidationError);
    EXPECT_THROW(load_artifact(path("missing.cbor")), ValidationError);
}

TEST(Artifact, ThinsLongChains)
{
    auto d = tiny_draws(8, 12000, 1);
    const auto t = thin_draws(d);
    EXPECT_EQ(t.thin, 3);
    EXPECT_EQ(t.draws(), 4000);
    EXPECT_TRUE((t.beta[0].col(1).array() == d.beta[0].col(3).array()).all());
    EXPECT_EQ(thin_draws(tiny_draws(8, 5000, 0)).thin, 1);
}

TEST(Commands, ParseGroupsAndLists)
{
    EXPECT_EQ(parse_groups("singletons", 3).size(), 3);
    EXPECT_EQ(parse_groups("all", 3).size(), 1);
    const auto g = parse_groups("1,3;2", 3);
    EXPECT_EQ(g.members(0), (std::vector<int>{0, 2}));
    EXPECT_THROW(parse_groups("1;2", 3), ValidationError);
    EXPECT_THROW(parse_groups("1,x", 2), ValidationError);
    EXPECT_EQ(parse_int_list("101, 201"), (std::vector<int>{101, 201}));
    EXPECT_TRUE(parse_int_list("").empty());
    EXPECT_THROW(parse_int_list("1,a"), ValidationError);
}

TEST(Commands, ScoreReport)
{
    const auto j = cmd_score({{100}, {98, 103}, 200, 5});
    EXPECT_DOUBLE_EQ(j["precision"].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(j["recall"].get<double>(), 1.0);
    EXPECT_NEAR(j["f1"].get<double>(), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(cmd_score({{}, {}, 0, 5}), ValidationError);
}

TEST_F(TempDir, CliSimulateIsDeterministic)
{
    const auto log = path("log.txt");
    ASSERT_EQ(run_cli("simulate --design mean-gaussian --magnitude 1 --seed 7 -o " + path("a.csv"), log), 0);
    ASSERT_EQ(run_cli("simulate --design mean-gaussian --magnitude 1 --seed 7 -o " + path("b.csv"), log), 0);
    const auto a = slurp(path("a.csv"));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(path("b.csv")));
    EXPECT_NE(a.find("seed=7"), std::string::npos);
    EXPECT_NE(a.find("version"), std::string::npos);
}

TEST_F(TempDir, CliExitCodes)
{
    const auto log = path("log.txt");
    EXPECT_EQ(run_cli("simulate --design nope", log), 2);
    EXPECT_EQ(run_cli("frobnicate", log), 2);
    EXPECT_EQ(run_cli("fit " + path("missing.csv"), log), 2);
    {
        std::ofstream(path("bad.csv")) << "t,y\n1,2\n2,oops\n";
    }
    EXPECT_EQ(run_cli("fit " + path("bad.csv"), log), 2);
    EXPECT_NE(slurp(log).find("line 3"), std::string::npos);
    {
        std::ofstream(path("cfg.json")) << "{\"n_save\": 200, \"unknown_key\": 1}";
    }
    EXPECT_EQ(run_cli("simulate -o " + path("d.csv"), log), 0);
    EXPECT_EQ(run_cli("fit " + path("d.csv") + " -c " + path("cfg.json"), log), 2);
    EXPECT_EQ(run_cli("score --truth 100 --pred 98,103 -n 200", log), 0);
    EXPECT_NE(slurp(log).find("\"f1\""), std::string::npos);
    EXPECT_EQ(run_cli("score --truth 100 --pred 300 -n 200", log), 2);
}

TEST_F(TempDir, CliNumericFailureExitsThree)
{
    const auto log = path("log.txt");
    // a constant series with every variance pinned makes the state precision singular
    {
        std::ofstream f(path("flat.csv"));
        f << "y\n";
        for (int t = 0; t < 20; ++t) f << "1e308\n";
    }
    EXPECT_EQ(run_cli("fit " + path("flat.csv") + " --burn 10 --save 100 -o " + path("p.cbor"), log), 3);
}

TEST_F(TempDir, CliFitDetectPipeline)
{
    const auto log = path("log.txt");
    ASSERT_EQ(run_cli("simulate --design mean-two --magnitude 2 --seed 3 -o " + path("d.csv"), log), 0);
    ASSERT_EQ(run_cli("fit " + path("d.csv") + " --burn 1000 --save 1000 --seed 5 --outlier-term true -o " +
                          path("p.cbor"),
                      log),
              0)
        << slurp(log);
    ASSERT_EQ(run_cli("fit " + path("d.csv") + " --burn 1000 --save 1000 --seed 5 --outlier-term true -o " +
                          path("q.cbor"),
                      log),
              0);
    EXPECT_EQ(slurp(path("p.cbor")), slurp(path("q.cbor")));
    ASSERT_EQ(run_cli("detect " + path("p.cbor") + " --truth 101,201 -o " + path("det"), log), 0) << slurp(log);
    const auto rep = json::parse(slurp(path("det_report.json")));
    EXPECT_EQ(rep["changepoints"], json::array({"101", "201"}));
    EXPECT_EQ(rep["groups"], json::parse("[[1]]"));
    EXPECT_DOUBLE_EQ(rep["metrics"]["f1"].get<double>(), 1.0);
    for (const auto* suffix : {"_r2.csv", "_fit.csv", "_path.csv"}) {
        const auto text = slurp(path(std::string("det") + suffix));
        EXPECT_NE(text.find("config_hash"), std::string::npos) << suffix;
    }
    ASSERT_EQ(run_cli("detect " + path("p.cbor") + " --threshold 1.01 -o " + path("det2"), log), 0);
    const auto rep2 = json::parse(slurp(path("det2_report.json")));
    EXPECT_FALSE(rep2["threshold_reached"].get<bool>());
    EXPECT_TRUE(rep2.contains("warning"));
    EXPECT_EQ(run_cli("detect " + path("p.cbor") + " --groups 1,2", log), 2);
}

TEST_F(TempDir, CliBenchWritesTables)
{
    const auto log = path("log.txt");
    ASSERT_EQ(run_cli("bench --design mean-t2 --magnitude 2 --reps 2 --burn 200 --save 200 --threads 1 -o " +
                          path("b"),
                      log),
              0)
        << slurp(log);
    const auto csv = slurp(path("b.csv"));
    EXPECT_NE(csv.find("DC-DS"), std::string::npos);
    EXPECT_NE(csv.find("PELT"), std::string::npos);
    const auto j = json::parse(slurp(path("b.json")));
    EXPECT_TRUE(j.contains("summary"));
    ASSERT_EQ(run_cli("bench --design reg-cov --magnitude 0.5 --reps 1 --methods DC-DS --burn 200 --save 200 -o " +
                          path("c"),
                      log),
              0)
        << slurp(log);
    EXPECT_NE(slurp(path("c.csv")).find("f1"), std::string::npos);
}
