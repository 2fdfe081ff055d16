#pragma once
#include <dcpt/core/banded.hpp>
#include <dcpt/core/difference.hpp>
#include <dcpt/core/rng.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::sampler {

/**
 * Gaussian conditional of the coefficient paths given all variances:
 *
 *   target_t = x_t' beta_t + e_t,          e_t ~ N(0, obs_var_t)
 *   (Delta^D beta_j)_t = omega_{t,j},      omega_{t,j} ~ N(0, evol_var(t, j))
 *
 * where rows t < D of `evol_var` are the variances of the initial states.
 * The stacked state vector orders coefficients time-major (index t*p + j),
 * which makes the posterior precision banded with bandwidth D*p.
 */
struct StateSystem
{
    const Matrix& x;
    const Vector& target;
    const Vector& obs_var;
    const Matrix& evol_var;
    int order;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }

    BandMatrix precision() const
    {
        const auto n = this->n();
        const auto p = this->p();
        BandMatrix q(n * p, order * p);
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index j = 0; j < p; ++j) {
                for (Eigen::Index k = 0; k <= j; ++k) {
                    q.add(t * p + j, t * p + k, x(t, j) * x(t, k) / obs_var[t]);
                }
            }
        }
        const auto c = difference_coefficients(order);
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const double prec = 1.0 / evol_var(r, j);
                if (r < order) {
                    q.add(r * p + j, r * p + j, prec);
                    continue;
                }
                for (int a = 0; a <= order; ++a) {
                    for (int b = 0; b <= a; ++b) {
                        const auto ta = r - order + a;
                        const auto tb = r - order + b;
                        q.add(ta * p + j, tb * p + j, c[a] * c[b] * prec);
                    }
                }
            }
        }
        return q;
    }

    Vector rhs() const
    {
        const auto p = this->p();
        Vector b(n() * p);
        for (Eigen::Index t = 0; t < n(); ++t) {
            for (Eigen::Index j = 0; j < p; ++j) b[t * p + j] = x(t, j) * target[t] / obs_var[t];
        }
        return b;
    }

    Matrix unstack(const Vector& v) const
    {
        Matrix out(n(), p());
        for (Eigen::Index t = 0; t < n(); ++t) {
            for (Eigen::Index j = 0; j < p(); ++j) out(t, j) = v[t * p() + j];
        }
        return out;
    }
};

/// Conditional mean E[beta | everything else] as an n x p matrix.
inline Matrix state_conditional_mean(const StateSystem& sys)
{
    const BandCholesky chol(sys.precision());
    return sys.unstack(chol.solve(sys.rhs()));
}

/**
 * One exact joint draw of all coefficient paths from their Gaussian full
 * conditional (precision-form equivalent of forward filtering, backward
 * sampling).
 */
inline Matrix draw_states(const StateSystem& sys, Rng& rng)
{
    const auto q = sys.precision();
    const BandCholesky chol(q);
    Vector z(q.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    Vector draw = chol.sample(sys.rhs(), z);
    if (!draw.allFinite()) throw NumericError("state draw is not finite");
    return sys.unstack(draw);
}

} // namespace dcpt::sampler
