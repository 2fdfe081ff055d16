#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <dcpt/core/difference.hpp>
#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/solver/difference.hpp>
#include <dcpt/solver/weights.hpp>

namespace dcpt {

struct PathOptions
{
    int n_lambda = 100;
    double lambda_min_ratio = 1e-4;
    /// Append lambda = 0 (the saturated fit) as the final grid point.
    bool include_zero = true;
    /// Custom decreasing grid; overrides n_lambda / lambda_min_ratio / include_zero.
    std::optional<Vector> lambdas;
    /// Relative objective change that ends a coordinate-descent run.
    double tolerance = 1e-8;
    int max_sweeps = 10000;
    /// Newton refinement of the active block set after coordinate descent.
    bool polish = true;
    bool warm_start = true;
    /// Stop the path after the first lambda whose active count exceeds this.
    std::optional<int> max_active;
};

/**
 * Weighted adaptive group-L1 problem in the increment parameterization
 * beta_j = Z theta_j:
 *
 *   minimize  || W (target - sum_j diag(x_j) Z theta_j - Zc a) ||^2
 *             + lambda * sum_{t >= D} sum_g ||theta_{g,t}||_2 / psi_{g,t}
 *
 * where W = diag(w), target = X beta_bar (+ Zc alpha_bar when covariates are
 * included), and the first D increments of every series and all covariate
 * coefficients are unpenalized. Coefficients are stacked series-major
 * (j * n + t), followed by the covariates.
 */
class DecoupledProblem
{
public:
    struct Block
    {
        std::vector<Eigen::Index> idx;
        double pen = 0.0;       // 1/psi for penalized blocks
        double lipschitz = 0.0; // largest eigenvalue of the block Gram
        int t = -1;
        int group = -1;
        bool penalized = false;
    };

    DecoupledProblem(const Dataset& data, const Matrix& beta_bar, const Vector& alpha_bar,
                     const Vector& weights, const PsiNormalizers& psi, const GroupSpec& groups,
                     int order, bool with_covariates)
        : data_(&data), order_(order), n_(data.n()), p_(data.p()),
          l_(with_covariates ? data.l() : 0), groups_(groups), op_(build_inverse_difference(order, data.n()))
    {
        if (beta_bar.rows() != n_ || beta_bar.cols() != p_) throw ValidationError("beta_bar dimension mismatch");
        if (weights.size() != n_) throw ValidationError("weights dimension mismatch");
        if (groups.p() != p_) throw ValidationError("groups do not match predictors");
        if (l_ > 0 && alpha_bar.size() != l_) throw ValidationError("alpha_bar dimension mismatch");
        if (!(weights.array() > 0.0).all()) throw ValidationError("weights must be positive");

        const auto& x = data.x();
        target_ = (x.array() * beta_bar.array()).rowwise().sum().matrix();
        if (l_ > 0) target_ += data.zc() * alpha_bar;
        beta_bar_ = beta_bar;
        alpha_bar_ = l_ > 0 ? alpha_bar : Vector(0);
        weights_ = weights;

        const auto P = n_ * p_ + l_;
        design_.resize(n_, P);
        for (Eigen::Index j = 0; j < p_; ++j) {
            const Vector s = weights.cwiseProduct(x.col(j));
            design_.middleCols(j * n_, n_) = s.asDiagonal() * op_.inverse;
        }
        if (l_ > 0) design_.rightCols(l_) = weights.asDiagonal() * data.zc();
        response_ = weights.cwiseProduct(target_);

        gram_ = design_.transpose() * design_;
        corr_ = design_.transpose() * response_;
        rss0_ = response_.squaredNorm();

        for (Eigen::Index j = 0; j < p_; ++j) {
            for (int t = 0; t < order; ++t) add_block({j * n_ + t}, 0.0, t, -1, false);
        }
        for (Eigen::Index k = 0; k < l_; ++k) add_block({n_ * p_ + k}, 0.0, -1, -1, false);
        for (int t = order; t < n_; ++t) {
            for (int g = 0; g < groups.size(); ++g) {
                std::vector<Eigen::Index> idx;
                for (int j : groups.members(g)) idx.push_back(j * n_ + t);
                add_block(std::move(idx), 1.0 / psi.grouped(t, g), t, g, true);
            }
        }
    }

    Eigen::Index n() const { return n_; }
    Eigen::Index p() const { return p_; }
    Eigen::Index l() const { return l_; }
    Eigen::Index size() const { return gram_.rows(); }
    int order() const { return order_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Matrix& design() const { return design_; }
    const Vector& response() const { return response_; }
    const Vector& target() const { return target_; }
    const DifferenceOperator& difference_operator() const { return op_; }

    double penalty(const Vector& theta, double lambda) const
    {
        if (lambda == 0.0) return 0.0;
        double s = 0.0;
        for (const auto& b : blocks_) {
            if (b.penalized) s += b.pen * block_norm(theta, b);
        }
        return lambda * s;
    }

    /// Weighted loss plus penalty, evaluated from the residual directly.
    double objective(const Vector& theta, double lambda) const
    {
        return (response_ - design_ * theta).squaredNorm() + penalty(theta, lambda);
    }

    /// Largest violation of the optimality conditions at theta.
    double kkt_violation(const Vector& theta, double lambda) const
    {
        const Vector q = corr_ - gram_ * theta;
        double worst = 0.0;
        for (const auto& b : blocks_) {
            const double nrm = block_norm(theta, b);
            double v;
            if (!b.penalized) {
                v = 0.0;
                for (auto i : b.idx) v = std::max(v, std::fabs(2.0 * q[i]));
            } else if (nrm == 0.0) {
                double gq = 0.0;
                for (auto i : b.idx) gq += 4.0 * q[i] * q[i];
                v = std::max(0.0, std::sqrt(gq) - lambda * b.pen);
            } else {
                double r2 = 0.0;
                for (auto i : b.idx) {
                    const double r = -2.0 * q[i] + lambda * b.pen * theta[i] / nrm;
                    r2 += r * r;
                }
                v = std::sqrt(r2);
            }
            worst = std::max(worst, v);
        }
        return worst;
    }

    /// Minimizer of the loss over the unpenalized coefficients alone.
    Vector unpenalized_fit() const
    {
        std::vector<Eigen::Index> u;
        for (const auto& b : blocks_) {
            if (!b.penalized) u.insert(u.end(), b.idx.begin(), b.idx.end());
        }
        Vector theta = Vector::Zero(size());
        const auto k = static_cast<Eigen::Index>(u.size());
        Matrix g(k, k);
        Vector c(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            c[a] = corr_[u[a]];
            for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram_(u[a], u[b]);
        }
        const Vector sol = g.completeOrthogonalDecomposition().solve(c);
        for (Eigen::Index a = 0; a < k; ++a) theta[u[a]] = sol[a];
        return theta;
    }

    /// Smallest lambda with an empty penalized active set.
    double lambda_max() const
    {
        const Vector theta = unpenalized_fit();
        const Vector q = corr_ - gram_ * theta;
        double lm = 0.0;
        for (const auto& b : blocks_) {
            if (!b.penalized) continue;
            double s = 0.0;
            for (auto i : b.idx) s += q[i] * q[i];
            lm = std::max(lm, 2.0 * std::sqrt(s) / b.pen);
        }
        return lm;
    }

    /// Coefficients of the saturated (zero-loss) fit beta_tilde = beta_bar.
    Vector saturated_fit() const { return coefficients(beta_bar_, alpha_bar_); }

    /**
     * Block coordinate descent at one lambda, with Newton refinement of the
     * active blocks and a KKT scan of the inactive ones between rounds.
     * `trace`, when given, receives the objective after every pass.
     */
    Vector solve(double lambda, Vector theta, const PathOptions& opt, int* sweeps_out = nullptr,
                 std::vector<double>* trace = nullptr) const
    {
        Vector q = corr_ - gram_ * theta;
        int sweeps = 0;
        std::vector<std::size_t> working;
        const auto rebuild_working = [&] {
            working.clear();
            for (std::size_t k = 0; k < blocks_.size(); ++k) {
                if (!blocks_[k].penalized || block_norm(theta, blocks_[k]) > 0.0) working.push_back(k);
            }
        };
        const auto smooth = [&] { return rss0_ - theta.dot(corr_ + q); };
        const auto record = [&] {
            if (trace) trace->push_back(smooth() + penalty(theta, lambda));
        };

        for (;;) {
            rebuild_working();
            double prev = smooth() + penalty(theta, lambda);
            for (int inner = 0;; ++inner) {
                for (auto k : working) update_block(blocks_[k], lambda, theta, q);
                ++sweeps;
                record();
                const double cur = smooth() + penalty(theta, lambda);
                if (std::fabs(prev - cur) <= opt.tolerance * std::max(1.0, std::fabs(cur))) break;
                prev = cur;
                if (sweeps >= opt.max_sweeps) break;
                if (inner >= 50 && opt.polish) break;
            }
            if (opt.polish) {
                rebuild_working();
                if (newton_polish(working, lambda, theta)) {
                    q = corr_ - gram_ * theta;
                    record();
                }
            }

            int violators = 0;
            for (const auto& b : blocks_) {
                if (!b.penalized || block_norm(theta, b) > 0.0) continue;
                double gq = 0.0;
                for (auto i : b.idx) gq += q[i] * q[i];
                if (2.0 * std::sqrt(gq) > lambda * b.pen * (1.0 + 1e-12)) {
                    update_block(b, lambda, theta, q);
                    ++violators;
                }
            }
            if (violators > 0) {
                ++sweeps;
                record();
            }
            const bool active_ok = kkt_violation(theta, lambda) <= kkt_tolerance();
            if (violators == 0 && (active_ok || !opt.polish)) break;
            if (sweeps >= opt.max_sweeps) {
                if (sweeps_out) *sweeps_out = sweeps;
                throw NumericError("path solver did not converge within " + std::to_string(opt.max_sweeps) + " sweeps");
            }
        }
        if (sweeps_out) *sweeps_out = sweeps;
        return theta;
    }

    /// Optimality tolerance used to stop the solver.
    double kkt_tolerance() const { return 1e-9 * std::max(1.0, std::sqrt(rss0_)); }

    /// Per-series trend n x p from coefficients.
    Matrix trend(const Vector& theta) const
    {
        Matrix b(n_, p_);
        for (Eigen::Index j = 0; j < p_; ++j) b.col(j) = op_.inverse * theta.segment(j * n_, n_);
        return b;
    }

    /// Inverse of trend(): stacked increments of an n x p trend plus covariates.
    Vector coefficients(const Matrix& trend, const Vector& alpha = Vector(0)) const
    {
        Vector theta(size());
        const Matrix inc = difference_apply(trend, order_);
        for (Eigen::Index j = 0; j < p_; ++j) theta.segment(j * n_, n_) = inc.col(j);
        if (l_ > 0) theta.tail(l_) = alpha;
        return theta;
    }

    Vector covariate_coefficients(const Vector& theta) const
    {
        return l_ > 0 ? Vector(theta.tail(l_)) : Vector(0);
    }

    std::vector<ActiveDifference> active_set(const Vector& theta) const
    {
        std::vector<ActiveDifference> a;
        for (const auto& b : blocks_) {
            if (b.penalized && block_norm(theta, b) > 0.0) a.push_back({b.t, b.group});
        }
        std::sort(a.begin(), a.end());
        return a;
    }

private:
    void add_block(std::vector<Eigen::Index> idx, double pen, int t, int g, bool penalized)
    {
        Block b;
        const auto m = static_cast<Eigen::Index>(idx.size());
        Matrix gb(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index c = 0; c < m; ++c) gb(a, c) = gram_(idx[a], idx[c]);
        }
        b.lipschitz = m == 1 ? gb(0, 0) : Eigen::SelfAdjointEigenSolver<Matrix>(gb, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        b.idx = std::move(idx);
        b.pen = pen;
        b.t = t;
        b.group = g;
        b.penalized = penalized;
        blocks_.push_back(std::move(b));
    }

    static double block_norm(const Vector& theta, const Block& b)
    {
        if (b.idx.size() == 1) return std::fabs(theta[b.idx[0]]);
        double s = 0.0;
        for (auto i : b.idx) s += theta[i] * theta[i];
        return std::sqrt(s);
    }

    // Proximal step on the block's majorizer; exact for singleton blocks.
    void update_block(const Block& b, double lambda, Vector& theta, Vector& q) const
    {
        if (!(b.lipschitz > 0.0)) return;
        const auto m = b.idx.size();
        double u[64];
        double nrm2 = 0.0;
        const bool small = m <= 64;
        std::vector<double> big;
        double* up = u;
        if (!small) {
            big.resize(m);
            up = big.data();
        }
        for (std::size_t a = 0; a < m; ++a) {
            const auto i = b.idx[a];
            up[a] = theta[i] + q[i] / b.lipschitz;
            nrm2 += up[a] * up[a];
        }
        double shrink = 1.0;
        if (b.penalized) {
            const double nrm = std::sqrt(nrm2);
            const double thr = lambda * b.pen / (2.0 * b.lipschitz);
            shrink = nrm <= thr * (1.0 + 1e-12) ? 0.0 : 1.0 - thr / nrm;
        }
        for (std::size_t a = 0; a < m; ++a) {
            const auto i = b.idx[a];
            const double next = shrink * up[a];
            const double delta = next - theta[i];
            if (delta != 0.0) {
                q.noalias() -= gram_.col(i) * delta;
                theta[i] = next;
            }
        }
    }

    // Damped Newton on the smooth restriction of the objective to the blocks
    // in `working`. A block whose path crosses zero is set to zero and
    // dropped, so the active set can shrink. Returns true if theta changed.
    bool newton_polish(const std::vector<std::size_t>& working, double lambda, Vector& theta) const
    {
        std::vector<const Block*> live;
        for (auto k : working) live.push_back(&blocks_[k]);
        Vector full = theta;
        const auto objective_of = [&](const Vector& v) { return objective(v, lambda); };
        const double f_start = objective_of(full);
        double fx = f_start;
        bool moved = false;
        for (int it = 0; it < 100 && !live.empty(); ++it) {
            std::vector<Eigen::Index> idx;
            std::vector<std::pair<Eigen::Index, Eigen::Index>> spans(live.size(), {0, 0});
            for (std::size_t s = 0; s < live.size(); ++s) {
                spans[s] = {static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(live[s]->idx.size())};
                idx.insert(idx.end(), live[s]->idx.begin(), live[s]->idx.end());
            }
            const auto k = static_cast<Eigen::Index>(idx.size());
            const Vector q = corr_ - gram_ * full;
            Vector grad(k);
            Matrix h(k, k);
            Vector x(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                grad[a] = -2.0 * q[idx[a]];
                x[a] = full[idx[a]];
                for (Eigen::Index c = 0; c < k; ++c) h(a, c) = 2.0 * gram_(idx[a], idx[c]);
            }
            for (std::size_t s = 0; s < live.size(); ++s) {
                if (!live[s]->penalized) continue;
                const auto [off, len] = spans[s];
                const Vector v = x.segment(off, len);
                const double nrm = v.norm();
                if (!(nrm > 0.0)) return commit(moved, fx, f_start, full, theta);
                const double mu = lambda * live[s]->pen;
                grad.segment(off, len) += mu * v / nrm;
                if (len > 1) {
                    const Vector u = v / nrm;
                    h.block(off, off, len, len) += (mu / nrm) * (Matrix::Identity(len, len) - u * u.transpose());
                }
            }
            // Newton direction; on a singular Hessian (collinear active
            // columns) the objective is linear along the null space, so move
            // there until a block reaches zero.
            Vector d;
            bool null_move = false;
            const Eigen::LDLT<Matrix> ldlt(h);
            if (ldlt.info() == Eigen::Success) d = -ldlt.solve(grad);
            if (d.size() != k || !d.allFinite() || !(-grad.dot(d) > 0.0) ||
                (h * d + grad).norm() > 1e-8 * std::max(1.0, grad.norm())) {
                const Eigen::SelfAdjointEigenSolver<Matrix> es(h);
                const Vector& ev = es.eigenvalues();
                const Matrix& u = es.eigenvectors();
                const double cut = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
                Vector range = Vector::Zero(k);
                Vector null = Vector::Zero(k);
                for (Eigen::Index e = 0; e < k; ++e) {
                    const double proj = u.col(e).dot(grad);
                    if (ev[e] > cut) range -= (proj / ev[e]) * u.col(e);
                    else null -= proj * u.col(e);
                }
                null_move = null.norm() > 1e-12 * std::max(1.0, grad.norm());
                d = null_move ? null : range;
            }
            const double dec = -grad.dot(d);
            if (!(dec > 0.0)) break;

            // first penalized block to reach (or pass closest to) zero along d
            double s_hit = null_move ? std::numeric_limits<double>::infinity() : 1.0;
            std::size_t hit = live.size();
            for (std::size_t s = 0; s < live.size(); ++s) {
                if (!live[s]->penalized) continue;
                const auto [off, len] = spans[s];
                const Vector v = x.segment(off, len);
                const Vector dv = d.segment(off, len);
                if (!(v.dot(dv) < 0.0)) continue;
                const double sc = -v.dot(dv) / dv.squaredNorm();
                if (sc < s_hit) {
                    s_hit = sc;
                    hit = s;
                }
            }
            if (null_move && hit == live.size()) break;

            double step = s_hit;
            const auto trial_at = [&](double st, bool zero_hit) {
                Vector t = full;
                for (Eigen::Index a = 0; a < k; ++a) t[idx[a]] = x[a] + st * d[a];
                if (zero_hit) {
                    for (auto i : live[hit]->idx) t[i] = 0.0;
                }
                return t;
            };
            Vector trial = trial_at(step, hit < live.size());
            double ft = objective_of(trial);
            const bool zeroing = hit < live.size();
            if (zeroing && ft <= fx + 1e-12 * std::max(1.0, std::fabs(fx))) {
                full = trial;
                moved = true;
                fx = ft;
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(hit));
                continue;
            }
            if (null_move) break;
            if (zeroing) {
                trial = trial_at(step, false);
                ft = objective_of(trial);
            }
            // below roundoff of the objective the full step is taken unchecked
            const bool tiny = step == 1.0 && dec <= 1e-11 * std::max(1.0, std::fabs(fx));
            while (!tiny && ft > fx - 1e-4 * step * dec && step > 1e-10) {
                step *= 0.5;
                trial = trial_at(step, false);
                ft = objective_of(trial);
            }
            if (!tiny && !(ft <= fx)) break;
            full = trial;
            moved = true;
            const bool done = tiny || fx - ft <= 1e-15 * std::max(1.0, std::fabs(ft));
            fx = std::min(fx, ft);
            if (done && !zeroing) break;
        }
        return commit(moved, fx, f_start, full, theta);
    }

    static bool commit(bool moved, double fx, double f_start, const Vector& full, Vector& theta)
    {
        if (!moved || !(fx <= f_start + 1e-12 * std::max(1.0, std::fabs(f_start)))) return false;
        theta = full;
        return true;
    }

    const Dataset* data_;
    int order_;
    Eigen::Index n_;
    Eigen::Index p_;
    Eigen::Index l_;
    GroupSpec groups_;
    DifferenceOperator op_;
    Vector target_;
    Matrix beta_bar_;
    Vector alpha_bar_;
    Vector weights_;
    Matrix design_;
    Vector response_;
    Matrix gram_;
    Vector corr_;
    double rss0_ = 0.0;
    std::vector<Block> blocks_;
};

namespace detail {

inline SolutionPath trace_path(const DecoupledProblem& prob, const Vector& weights, const PsiNormalizers& psi,
                               const GroupSpec& groups, const PathOptions& opt)
{
    SolutionPath path;
    path.order = prob.order();
    path.weights = weights;
    path.psi = psi.per_series;
    path.group_psi = psi.grouped;
    path.psi_floor = psi.floor;
    path.groups = groups;

    Vector grid;
    if (opt.lambdas) {
        grid = *opt.lambdas;
    } else {
        double lm = prob.lambda_max();
        if (!(lm > 0.0)) lm = 1.0;
        const int m = std::max(2, opt.n_lambda);
        grid.resize(m + (opt.include_zero ? 1 : 0));
        for (int k = 0; k < m; ++k) {
            grid[k] = lm * std::pow(opt.lambda_min_ratio, static_cast<double>(k) / (m - 1));
        }
        grid[0] = lm;
        if (opt.include_zero) grid[m] = 0.0;
    }
    for (Eigen::Index k = 1; k < grid.size(); ++k) {
        if (grid[k] > grid[k - 1]) throw ValidationError("lambda grid must be decreasing");
    }

    Vector theta = prob.unpenalized_fit();
    std::vector<double> lambdas;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double lambda = grid[k];
        if (lambda == 0.0) {
            theta = prob.saturated_fit();
        } else {
            const Vector start = opt.warm_start ? theta : prob.unpenalized_fit();
            try {
                theta = prob.solve(lambda, start, opt);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (lambda index " + std::to_string(k) + ")");
            }
        }
        lambdas.push_back(lambda);
        path.fits.push_back(prob.trend(theta));
        path.coefficients.push_back(theta);
        path.alpha_fits.push_back(prob.covariate_coefficients(theta));
        path.active_sets.push_back(prob.active_set(theta));
        path.objectives.push_back(prob.objective(theta, lambda));
        if (opt.max_active && static_cast<int>(path.active_sets.back().size()) > *opt.max_active) break;
    }
    path.lambdas = Eigen::Map<const Vector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
    return path;
}

} // namespace detail

/**
 * Solution path of the decoupled loss without covariates:
 * target X beta_bar, design X acting on the trend increments.
 */
inline SolutionPath fit_path(const PosteriorDraws& draws, const Dataset& data, int order, const GroupSpec& groups,
                             const WeightVector& weights, const PathOptions& opt = {})
{
    const auto psi = compute_psi(draws, order, groups);
    const DecoupledProblem prob(data, draws.beta_mean(), Vector(0), weights.w, psi, groups, order, false);
    return detail::trace_path(prob, weights.w, psi, groups, opt);
}

/**
 * Solution path with static covariates: target X beta_bar + Zc alpha_bar,
 * design [X, Zc], covariate coefficients unpenalized. Reported active sets
 * cover trend differences only. Identical to fit_path when l = 0.
 */
inline SolutionPath solve_with_covariates(const PosteriorDraws& draws, const Dataset& data, int order,
                                          const GroupSpec& groups, const WeightVector& weights,
                                          const PathOptions& opt = {})
{
    if (data.l() == 0) return fit_path(draws, data, order, groups, weights, opt);
    const auto psi = compute_psi(draws, order, groups);
    const DecoupledProblem prob(data, draws.beta_mean(), draws.alpha_mean(), weights.w, psi, groups, order, true);
    return detail::trace_path(prob, weights.w, psi, groups, opt);
}

} // namespace dcpt
