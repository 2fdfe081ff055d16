#include <cmath>

#include <gtest/gtest.h>

#include <dcpt/sim/benchmark.hpp>

using namespace dcpt;
using namespace dcpt::sim;

namespace {

double kurtosis(const Vector& v)
{
    const double m = v.mean();
    const double m2 = (v.array() - m).square().mean();
    const double m4 = (v.array() - m).pow(4).mean();
    return m4 / (m2 * m2) - 3.0;
}

double lag1_autocorr(const Vector& v)
{
    const Vector c = v.array() - v.mean();
    return c.head(c.size() - 1).dot(c.tail(c.size() - 1)) / c.squaredNorm();
}

Vector ols(const Matrix& a, const Vector& b) { return a.colPivHouseholderQr().solve(b); }

} // namespace

TEST(Generators, MeanChangeShiftsLevel)
{
    const auto s = gen_mean_change(1.0, Noise::Gaussian, 7);
    ASSERT_EQ(s.data.n(), 200);
    EXPECT_EQ(s.truth, (std::vector<int>{101}));
    const double diff = s.data.y().tail(100).mean() - s.data.y().head(100).mean();
    EXPECT_NEAR(diff, 1.0, 0.3);
    EXPECT_DOUBLE_EQ(s.beta(99, 0), 0.0);
    EXPECT_DOUBLE_EQ(s.beta(100, 0), 1.0);
}

TEST(Generators, HeavyTailsAndVolatilityClustering)
{
    Rng rng(401);
    const Vector t2 = draw_noise(10000, Noise::T2, 0.5, rng);
    const Vector g = draw_noise(10000, Noise::Gaussian, 0.5, rng);
    EXPECT_GT(kurtosis(t2), 10.0 * std::max(1.0, std::fabs(kurtosis(g))));

    const Vector sv = draw_noise(10000, Noise::Sv, 0.5, rng);
    const Vector lsv = (sv.array().square() + 1e-12).log().matrix();
    const Vector lg = (g.array().square() + 1e-12).log().matrix();
    EXPECT_GT(lag1_autocorr(lsv), 0.05);
    EXPECT_LT(std::fabs(lag1_autocorr(lg)), 0.05);
    EXPECT_GT(lag1_autocorr(lsv), lag1_autocorr(lg) + 0.05);
}

TEST(Generators, RegressionSegmentsRecoverCoefficients)
{
    const auto s = gen_regression(2.0, Noise::Gaussian, 8);
    EXPECT_EQ(s.truth, (std::vector<int>{76, 226}));
    ASSERT_EQ(s.data.p(), 3);
    const Vector mid = ols(s.data.x().middleRows(75, 150), s.data.y().segment(75, 150));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(mid[j], 2.0, 0.3);
    const Vector head = ols(s.data.x().topRows(75), s.data.y().head(75));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(head[j], 0.0, 0.4);
    EXPECT_TRUE(gen_regression(0.0, Noise::Gaussian, 8).truth.empty());
}

TEST(Generators, RegressionSvVarianceVaries)
{
    int unequal = 0;
    for (int r = 0; r < 20; ++r) {
        const auto s = gen_regression(1.0, Noise::Sv, mix_seed(r));
        const Vector resid = s.data.y() - (s.data.x().array() * s.beta.array()).rowwise().sum().matrix();
        const double a = resid.head(150).squaredNorm();
        const double b = resid.tail(150).squaredNorm();
        const double ratio = a / b;
        if (ratio < 0.8 || ratio > 1.25) ++unequal;
    }
    EXPECT_GE(unequal, 11);
}

TEST(Generators, CovariateDesign)
{
    const auto s = gen_regression_with_covariates(2.0, 9);
    EXPECT_EQ(s.truth, (std::vector<int>{151}));
    ASSERT_EQ(s.data.l(), 2);
    for (Eigen::Index t = 0; t < 300; ++t) {
        for (int k = 0; k < 2; ++k) ASSERT_TRUE(s.data.zc()(t, k) == 0.0 || s.data.zc()(t, k) == 1.0);
    }
    Matrix a(300, 3);
    a.col(0) = s.data.x().col(0).cwiseProduct(s.beta.col(0));
    a.rightCols(2) = s.data.zc();
    const Vector coef = ols(a, s.data.y());
    EXPECT_NEAR(coef[0], 1.0, 0.15);
    EXPECT_NEAR(coef[1], 0.3, 0.2);
    EXPECT_NEAR(coef[2], 0.1, 0.2);
    const Vector after = ols(s.data.x().bottomRows(150), s.data.y().tail(150) - s.data.zc().bottomRows(150) * Vector{{0.3, 0.1}});
    EXPECT_NEAR(after[0], 2.0, 0.3);
}

TEST(Generators, TwoMeanChangesDesign)
{
    const auto s = simulate(Design::MeanTwo, 2.0, 10);
    EXPECT_EQ(s.truth, (std::vector<int>{101, 201}));
    EXPECT_DOUBLE_EQ(s.beta(150, 0), 2.0);
    EXPECT_DOUBLE_EQ(s.beta(250, 0), 4.0);
}

TEST(Generators, SeedDeterministic)
{
    for (int d = 0; d < 7; ++d) {
        const auto design = static_cast<Design>(d);
        const auto a = simulate(design, 1.0, 77);
        const auto b = simulate(design, 1.0, 77);
        EXPECT_TRUE((a.data.y().array() == b.data.y().array()).all()) << to_string(design);
        EXPECT_TRUE((a.data.x().array() == b.data.x().array()).all());
        EXPECT_EQ(a.truth, b.truth);
        EXPECT_FALSE((a.data.y().array() == simulate(design, 1.0, 78).data.y().array()).all());
    }
}

TEST(Generators, DesignNames)
{
    for (const auto& n : design_names()) EXPECT_EQ(to_string(design_from_string(n)), n);
    EXPECT_THROW(design_from_string("nope"), ValidationError);
    EXPECT_THROW(gen_mean_change(-1.0, Noise::Gaussian, 1), ValidationError);
}

TEST(Pelt, NoiselessStep)
{
    Vector y(200);
    y.head(100).setZero();
    y.tail(100).setConstant(5.0);
    EXPECT_EQ(pelt_detect(y), (std::vector<int>{101}));
    EXPECT_EQ(optimal_partition(y), (std::vector<int>{101}));
}

TEST(Pelt, ConstantSeries)
{
    EXPECT_TRUE(pelt_detect(Vector::Constant(150, 3.0)).empty());
    EXPECT_TRUE(pelt_detect(Vector::Zero(1)).empty());
}

TEST(Pelt, EqualsDynamicProgramOnRandomSeries)
{
    Rng rng(402);
    for (int rep = 0; rep < 200; ++rep) {
        const auto n = 5 + static_cast<Eigen::Index>(rng.uniform() * 196);
        Vector y(n);
        double level = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (rng.uniform() < 0.03) level += rng.normal(0.0, 3.0);
            y[t] = level + (rep % 3 == 0 ? rng.student_t(2.0) : rng.normal());
        }
        PeltOptions opt;
        opt.min_seg = 1 + rep % 4;
        if (rep % 5 == 0) opt.penalty = 0.5 + 5.0 * rng.uniform();
        ASSERT_EQ(pelt_detect(y, opt), optimal_partition(y, opt)) << "rep " << rep;
    }
}

TEST(Pelt, ShiftInvariant)
{
    Rng rng(403);
    for (int rep = 0; rep < 50; ++rep) {
        const auto s = gen_mean_change(1.5, Noise::Gaussian, mix_seed(rep));
        const Vector shifted = s.data.y().array() + 1000.0;
        EXPECT_EQ(pelt_detect(s.data.y()), pelt_detect(shifted));
    }
}

TEST(Pelt, MadScaleIgnoresSteps)
{
    Rng rng(404);
    Vector y(1000);
    for (Eigen::Index t = 0; t < 1000; ++t) y[t] = rng.normal(0.0, 2.0) + (t >= 500 ? 50.0 : 0.0);
    EXPECT_NEAR(mad_scale(y), 2.0, 0.2);
    EXPECT_DOUBLE_EQ(mad_scale(Vector::Constant(10, 1.0)), 1.0);
}

TEST(Pelt, SmallMagnitudeRarelyDetected)
{
    int tp = 0;
    int n_true = 0;
    int n_pred = 0;
    for (int r = 0; r < 30; ++r) {
        const auto s = gen_mean_change(0.25, Noise::Gaussian, replicate_seed(1, r));
        const auto sc = match_and_score(s.truth, pelt_detect(s.data.y()));
        tp += sc.true_positives;
        n_true += sc.n_true;
        n_pred += sc.n_pred;
    }
    EXPECT_LE(score_counts(tp, n_true, n_pred).f1, 0.1);
}

TEST(Benchmark, SmokeRunIsThreadIndependent)
{
    BenchOptions opt;
    opt.design = Design::MeanGaussian;
    opt.magnitudes = {3.0};
    opt.reps = 3;
    opt.sampler.n_burn = 200;
    opt.sampler.n_save = 200;
    opt.threads = 1;
    const auto a = run_benchmark(opt);
    opt.threads = 3;
    const auto b = run_benchmark(opt);
    ASSERT_EQ(a.rows.size(), 3u);
    ASSERT_EQ(a.replicates.size(), b.replicates.size());
    for (std::size_t k = 0; k < a.replicates.size(); ++k) {
        EXPECT_TRUE(a.replicates[k].ok) << a.replicates[k].error;
        EXPECT_EQ(a.replicates[k].predicted, b.replicates[k].predicted);
    }
    for (const auto& row : a.rows) {
        EXPECT_EQ(row.reps, 3);
        EXPECT_EQ(row.failures, 0);
        EXPECT_GE(row.rand_mean, 0.0);
        EXPECT_LE(row.rand_mean, 1.0);
    }
}

TEST(Benchmark, PeltSkippedForRegression)
{
    BenchOptions opt;
    opt.design = Design::RegCov;
    opt.magnitudes = {2.0};
    opt.reps = 1;
    opt.methods = {Method::Pelt};
    opt.sampler.n_burn = 100;
    opt.sampler.n_save = 100;
    const auto r = run_benchmark(opt);
    EXPECT_TRUE(r.rows.empty());
}

TEST(Benchmark, FailuresRecordedNotThrown)
{
    std::vector<ReplicateResult> reps(2);
    reps[0].ok = true;
    reps[0].score = score_counts(1, 1, 1);
    reps[0].rand = 1.0;
    reps[0].adjusted_rand = 1.0;
    reps[1].ok = false;
    reps[1].error = "boom";
    const auto rows = summarize(Design::MeanGaussian, reps);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].failures, 1);
    EXPECT_EQ(rows[0].reps, 2);
    EXPECT_DOUBLE_EQ(rows[0].f1, 1.0);
}

TEST(Benchmark, StandardErrorShrinksWithReplicates)
{
    Rng rng(405);
    std::vector<double> se_small;
    std::vector<double> se_large;
    for (int k = 0; k < 50; ++k) {
        std::vector<double> a(20);
        std::vector<double> b(80);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        se_small.push_back(sim::detail::se_of(a));
        se_large.push_back(sim::detail::se_of(b));
    }
    EXPECT_NEAR(sim::detail::mean_of(se_small) / sim::detail::mean_of(se_large), 2.0, 0.25);
}

TEST(Benchmark, MethodNames)
{
    for (auto m : {Method::DcDs, Method::DcRw, Method::Pelt}) EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_THROW(method_from_string("SGL"), ValidationError);
    const auto c = method_config(Design::MeanT2, Method::DcRw, DlmConfig{}, 5);
    EXPECT_EQ(c.shrinkage, Shrinkage::RandomWalkConstantVariance);
    EXPECT_TRUE(c.outlier_term);
    EXPECT_FALSE(method_config(Design::RegMulti, Method::DcDs, DlmConfig{}, 5).outlier_term);
}
