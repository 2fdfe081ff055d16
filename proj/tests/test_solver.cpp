#include <cmath>

#include <gtest/gtest.h>

#include <dcpt/core/rng.hpp>
#include <dcpt/solver/path.hpp>

#include "oracles.hpp"

using namespace dcpt;

namespace {

struct Problem
{
    Dataset data;
    Matrix beta_bar;
    Vector alpha_bar;
    Vector weights;
    PsiNormalizers psi;
    GroupSpec groups;
};

/// Random noisy piecewise trend with explicit weights and normalizers.
Problem make_problem(Eigen::Index n, Eigen::Index p, Eigen::Index l, int order, const GroupSpec& groups, Rng& rng,
                     bool ones = false)
{
    Matrix x(n, p);
    Matrix zc(n, l);
    Matrix beta(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double level = rng.normal();
        double slope = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (t == n / 2) {
                if (order == 1) level += 2.0;
                else slope += 0.5;
            }
            level += slope;
            beta(t, j) = level + rng.normal(0.0, 0.3);
            x(t, j) = ones ? 1.0 : rng.normal();
        }
    }
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index k = 0; k < l; ++k) zc(t, k) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    Vector alpha(l);
    for (Eigen::Index k = 0; k < l; ++k) alpha[k] = rng.normal();
    Vector w(n);
    for (Eigen::Index t = 0; t < n; ++t) w[t] = 0.5 + rng.uniform();
    const Vector y = Vector::Zero(n);
    Problem pr{Dataset(y, x, zc), beta, alpha, w, {}, groups};
    pr.psi.per_series = difference_apply(beta, order);
    pr.psi.per_series.topRows(order).setZero();
    pr.psi.floor = 1e-8;
    pr.psi.grouped = Matrix::Zero(n, groups.size());
    for (Eigen::Index t = order; t < n; ++t) {
        for (int g = 0; g < groups.size(); ++g) pr.psi.grouped(t, g) = 0.05 + rng.uniform();
    }
    return pr;
}

DecoupledProblem build(const Problem& pr, int order)
{
    return DecoupledProblem(pr.data, pr.beta_bar, pr.alpha_bar, pr.weights, pr.psi, pr.groups, order,
                            pr.data.l() > 0);
}

oracle::SingleFit best_single_changepoint(const Problem& pr, int order, double lambda, double* lambda_max = nullptr)
{
    return oracle::best_single_changepoint(
        pr.data.x().col(0), pr.beta_bar.col(0), pr.weights, order,
        [&](Eigen::Index t) { return 1.0 / pr.psi.grouped(t, 0); }, lambda, lambda_max);
}

} // namespace

TEST(SinglePath, MatchesExhaustiveTwoSegmentFit)
{
    Rng rng(101);
    int checked = 0;
    for (int order : {1, 2}) {
        for (Eigen::Index n : {8, 10, 12}) {
            for (int rep = 0; rep < 4; ++rep) {
                const auto pr = make_problem(n, 1, 0, order, GroupSpec::singletons(1), rng, rep % 2 == 0);
                const auto prob = build(pr, order);
                double lm = 0.0;
                best_single_changepoint(pr, order, 0.0, &lm);
                EXPECT_NEAR(prob.lambda_max(), lm, 1e-9 * std::max(1.0, lm));
                PathOptions opt;
                Vector theta = prob.unpenalized_fit();
                for (int k = 1; k <= 60; ++k) {
                    const double lambda = lm * std::pow(0.97, k);
                    theta = prob.solve(lambda, theta, opt);
                    const auto act = prob.active_set(theta);
                    if (act.size() != 1) continue;
                    const auto oracle = best_single_changepoint(pr, order, lambda);
                    EXPECT_EQ(act[0].t, oracle.t);
                    EXPECT_NEAR(prob.objective(theta, lambda), oracle.objective, 1e-6 * std::max(1.0, oracle.objective));
                    EXPECT_NEAR(theta[act[0].t], oracle.theta, 1e-6 * std::max(1.0, std::fabs(oracle.theta)));
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(SinglePath, EntryAtLargestNormalizedCorrelation)
{
    Rng rng(102);
    for (int order : {1, 2}) {
        const auto pr = make_problem(12, 1, 0, order, GroupSpec::singletons(1), rng, true);
        const auto prob = build(pr, order);
        double lm = 0.0;
        const auto entry = best_single_changepoint(pr, order, 0.999999 * prob.lambda_max(), &lm);
        const auto theta = prob.solve(0.999999 * lm, prob.unpenalized_fit(), PathOptions{});
        const auto act = prob.active_set(theta);
        ASSERT_EQ(act.size(), 1u);
        EXPECT_EQ(act[0].t, entry.t);
    }
}

TEST(Path, EmptyAboveLambdaMax)
{
    Rng rng(103);
    const auto pr = make_problem(30, 2, 0, 1, GroupSpec::singletons(2), rng);
    const auto prob = build(pr, 1);
    const double lm = prob.lambda_max();
    for (double f : {1.0, 1.5, 10.0}) {
        const auto theta = prob.solve(f * lm, prob.unpenalized_fit(), PathOptions{});
        EXPECT_TRUE(prob.active_set(theta).empty());
    }
    EXPECT_FALSE(prob.active_set(prob.solve(0.9 * lm, prob.unpenalized_fit(), PathOptions{})).empty());
}

namespace {

struct PathCase
{
    int order;
    Eigen::Index p;
    Eigen::Index l;
    bool grouped;
};

} // namespace

TEST(Path, KktHoldsAlongEveryPath)
{
    Rng rng(104);
    const std::vector<PathCase> cases{{1, 1, 0, false}, {2, 1, 0, false}, {1, 2, 0, false}, {1, 3, 0, true},
                                      {2, 2, 0, true},  {1, 1, 2, false}, {2, 2, 1, true}};
    for (const auto& c : cases) {
        const auto groups = c.grouped ? GroupSpec::all_in_one(static_cast<int>(c.p))
                                      : GroupSpec::singletons(static_cast<int>(c.p));
        const auto pr = make_problem(40, c.p, c.l, c.order, groups, rng);
        const auto prob = build(pr, c.order);
        PathOptions opt;
        opt.n_lambda = 40;
        const auto path = detail::trace_path(prob, pr.weights, pr.psi, groups, opt);
        ASSERT_EQ(path.size(), 41u);
        const double tol = 1e-6 * std::max(1.0, prob.response().norm());
        for (std::size_t k = 0; k < path.size(); ++k) {
            const double lambda = path.lambdas[static_cast<Eigen::Index>(k)];
            const Vector& theta = path.coefficients[k];
            EXPECT_LE(prob.kkt_violation(theta, lambda), tol) << "order " << c.order << " p " << c.p << " k " << k;
            EXPECT_EQ(prob.active_set(theta), path.active_sets[k]);
        }
        EXPECT_TRUE(path.active_sets.front().empty());
        EXPECT_LT((path.fits.back() - pr.beta_bar).cwiseAbs().maxCoeff(), 1e-9);
        for (std::size_t k = 1; k < path.size(); ++k) {
            EXPECT_LE(path.objectives[k], path.objectives[k - 1] * (1.0 + 1e-9) + 1e-12);
        }
    }
}

TEST(Path, WarmAndColdStartsAgree)
{
    Rng rng(105);
    const auto groups = GroupSpec::singletons(2);
    const auto pr = make_problem(30, 2, 0, 1, groups, rng);
    const auto prob = build(pr, 1);
    PathOptions warm;
    warm.n_lambda = 25;
    PathOptions cold = warm;
    cold.warm_start = false;
    const auto a = detail::trace_path(prob, pr.weights, pr.psi, groups, warm);
    const auto b = detail::trace_path(prob, pr.weights, pr.psi, groups, cold);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_NEAR(a.objectives[k], b.objectives[k], 1e-8 * std::max(1.0, a.objectives[k]));
        EXPECT_EQ(a.active_sets[k], b.active_sets[k]);
    }
}

TEST(Path, CoordinateDescentObjectiveNeverIncreases)
{
    Rng rng(106);
    const auto pr = make_problem(50, 2, 1, 1, GroupSpec::all_in_one(2), rng);
    const auto prob = build(pr, 1);
    PathOptions opt;
    opt.polish = false;
    opt.tolerance = 1e-12;
    for (double f : {0.5, 0.1, 0.01}) {
        std::vector<double> trace;
        const auto theta = prob.solve(f * prob.lambda_max(), prob.unpenalized_fit(), opt, nullptr, &trace);
        ASSERT_GE(trace.size(), 2u);
        for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-9 * std::fabs(trace[i - 1]));
        EXPECT_NEAR(trace.back(), prob.objective(theta, f * prob.lambda_max()), 1e-8 * std::max(1.0, trace.back()));
    }
}

TEST(Path, LargeLambdaWithCovariatesIsWeightedLeastSquares)
{
    Rng rng(107);
    const auto pr = make_problem(40, 1, 2, 1, GroupSpec::singletons(1), rng);
    const auto prob = build(pr, 1);
    const auto theta = prob.solve(2.0 * prob.lambda_max(), prob.unpenalized_fit(), PathOptions{});
    ASSERT_TRUE(prob.active_set(theta).empty());
    // constant trend plus covariates, weighted least squares on the combined target
    const Eigen::Index n = 40;
    Matrix a(n, 3);
    a.col(0) = pr.data.x().col(0);
    a.rightCols(2) = pr.data.zc();
    const Vector target = pr.data.x().col(0).cwiseProduct(pr.beta_bar.col(0)) + pr.data.zc() * pr.alpha_bar;
    const Vector sol = (pr.weights.asDiagonal() * a).colPivHouseholderQr().solve(Vector(pr.weights.cwiseProduct(target)));
    const Matrix trend = prob.trend(theta);
    EXPECT_LT((trend.col(0).array() - sol[0]).abs().maxCoeff(), 1e-8);
    EXPECT_LT((prob.covariate_coefficients(theta) - sol.tail(2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Path, CustomGridAndMaxActive)
{
    Rng rng(108);
    const auto groups = GroupSpec::singletons(1);
    const auto pr = make_problem(30, 1, 0, 1, groups, rng);
    const auto prob = build(pr, 1);
    PathOptions opt;
    opt.lambdas = Vector::LinSpaced(5, prob.lambda_max(), 0.0);
    const auto path = detail::trace_path(prob, pr.weights, pr.psi, groups, opt);
    EXPECT_EQ(path.size(), 5u);
    opt.lambdas = Vector::LinSpaced(5, 0.0, 1.0);
    EXPECT_THROW(detail::trace_path(prob, pr.weights, pr.psi, groups, opt), ValidationError);
    opt.lambdas.reset();
    opt.max_active = 2;
    const auto capped = detail::trace_path(prob, pr.weights, pr.psi, groups, opt);
    EXPECT_GT(capped.active_sets.back().size(), 2u);
    for (std::size_t k = 0; k + 1 < capped.size(); ++k) EXPECT_LE(capped.active_sets[k].size(), 2u);
}

TEST(Path, RejectsInvalidInputs)
{
    Rng rng(109);
    auto pr = make_problem(20, 1, 0, 1, GroupSpec::singletons(1), rng);
    pr.weights[3] = 0.0;
    EXPECT_THROW(build(pr, 1), ValidationError);
    pr.weights[3] = 1.0;
    pr.groups = GroupSpec::singletons(2);
    EXPECT_THROW(build(pr, 1), ValidationError);
}

TEST(Weights, InverseRootMeanVariance)
{
    PosteriorDraws d;
    d.beta = {Matrix::Zero(3, 2)};
    d.sigma2_eps.resize(3, 2);
    d.sigma2_eps << 1.0, 3.0, 4.0, 4.0, 0.25, 0.75;
    const auto w = compute_weights(d);
    EXPECT_NEAR(w.w[0], 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(w.w[1], 0.5, 1e-15);
    EXPECT_NEAR(w.w[2], 1.0 / std::sqrt(0.5), 1e-15);
}

TEST(Weights, PsiGroupMeanWithFloor)
{
    PosteriorDraws d;
    d.order = 1;
    Matrix b(4, 2);
    b << 0, 0, 1, -2, 1, -2, 1, 2;
    d.beta = {b.col(0), b.col(1)};
    d.sigma2_eps = Matrix::Ones(4, 1);
    const auto psi = compute_psi(d, 1, GroupSpec::all_in_one(2));
    EXPECT_DOUBLE_EQ(psi.per_series(1, 1), -2.0);
    EXPECT_DOUBLE_EQ(psi.grouped(1, 0), 1.5);
    EXPECT_DOUBLE_EQ(psi.grouped(2, 0), 4e-8);
    EXPECT_DOUBLE_EQ(psi.grouped(3, 0), 2.0);
}

TEST(Path, FitPathFromPosteriorEndsAtPosteriorMean)
{
    Rng rng(110);
    PosteriorDraws d;
    const Eigen::Index n = 25;
    Matrix b(n, 4);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (int s = 0; s < 4; ++s) b(t, s) = (t >= 12 ? 1.5 : 0.0) + rng.normal(0.0, 0.2);
    }
    d.beta = {b};
    d.sigma2_eps = Matrix::Ones(n, 4);
    const auto data = Dataset::mean_change(Vector::Zero(n));
    const auto path = fit_path(d, data, 1, GroupSpec::singletons(1), compute_weights(d));
    EXPECT_EQ(path.size(), 101u);
    EXPECT_DOUBLE_EQ(path.lambdas[100], 0.0);
    EXPECT_LT((path.fits.back() - d.beta_mean()).cwiseAbs().maxCoeff(), 1e-9);
    const auto same = solve_with_covariates(d, data, 1, GroupSpec::singletons(1), compute_weights(d));
    EXPECT_EQ(same.active_sets, path.active_sets);
}
