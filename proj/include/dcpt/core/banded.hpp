#pragma once
#include <algorithm>
#include <cmath>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt {

/**
 * Symmetric positive-definite band matrix in lower storage:
 * `band(k, i)` holds A(i, i - k) for k = 0..bandwidth.
 */
class BandMatrix
{
public:
    BandMatrix(Eigen::Index size, Eigen::Index bandwidth)
        : band_(Matrix::Zero(bandwidth + 1, size)), bw_(bandwidth)
    {}

    Eigen::Index size() const { return band_.cols(); }
    Eigen::Index bandwidth() const { return bw_; }

    /// Adds v to A(i, j) (and by symmetry A(j, i)); requires |i - j| <= bandwidth.
    void add(Eigen::Index i, Eigen::Index j, double v)
    {
        if (i < j) std::swap(i, j);
        band_(i - j, i) += v;
    }

    double operator()(Eigen::Index i, Eigen::Index j) const
    {
        if (i < j) std::swap(i, j);
        return i - j > bw_ ? 0.0 : band_(i - j, i);
    }

    const Matrix& storage() const { return band_; }

    Matrix to_dense() const
    {
        Matrix a = Matrix::Zero(size(), size());
        for (Eigen::Index i = 0; i < size(); ++i) {
            for (Eigen::Index k = 0; k <= bw_ && k <= i; ++k) {
                a(i, i - k) = band_(k, i);
                a(i - k, i) = band_(k, i);
            }
        }
        return a;
    }

private:
    Matrix band_;
    Eigen::Index bw_;
};

/// Cholesky factor A = L L' of a BandMatrix, with L stored in the same band layout.
class BandCholesky
{
public:
    explicit BandCholesky(const BandMatrix& a) : l_(a.storage()), bw_(a.bandwidth())
    {
        const auto n = l_.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto j0 = std::max<Eigen::Index>(0, i - bw_);
            for (Eigen::Index j = j0; j <= i; ++j) {
                double s = l_(i - j, i);
                for (Eigen::Index k = std::max(j0, j - bw_); k < j; ++k) {
                    s -= l_(i - k, i) * l_(j - k, j);
                }
                if (i == j) {
                    if (!(s > 0.0) || !std::isfinite(s)) {
                        throw NumericError("band matrix is not positive definite at row " +
                                           std::to_string(i));
                    }
                    l_(0, i) = std::sqrt(s);
                } else {
                    l_(i - j, i) = s / l_(0, j);
                }
            }
        }
    }

    /// Solves L u = b in place.
    void solve_lower(Vector& b) const
    {
        const auto n = l_.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = b[i];
            for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw_); k < i; ++k) s -= l_(i - k, i) * b[k];
            b[i] = s / l_(0, i);
        }
    }

    /// Solves L' x = b in place.
    void solve_upper(Vector& b) const
    {
        const auto n = l_.cols();
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = b[i];
            for (Eigen::Index k = i + 1; k <= std::min(n - 1, i + bw_); ++k) s -= l_(k - i, k) * b[k];
            b[i] = s / l_(0, i);
        }
    }

    Vector solve(Vector b) const
    {
        solve_lower(b);
        solve_upper(b);
        return b;
    }

    /**
     * Draw from N(A^{-1} b, A^{-1}) given standard normals z:
     * x = L'^{-1} (L^{-1} b + z).
     */
    Vector sample(Vector b, const Vector& z) const
    {
        solve_lower(b);
        b += z;
        solve_upper(b);
        return b;
    }

private:
    Matrix l_;
    Eigen::Index bw_;
};

} // namespace dcpt
