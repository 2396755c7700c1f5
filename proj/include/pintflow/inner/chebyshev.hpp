#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/sparse.hpp"

namespace pintflow {

enum class MassElement { Q1, Q2 };

/// Interval containing the eigenvalues of diag(M)^{-1} M for the scalar mass
/// matrix of the given element family on square cells. The constants are the
/// extreme eigenvalues of the element matrix D_e^{-1} M_e (tensor products of
/// the 1D values {1/2, 3/2} for Q1 and {1/2, 5/4} for Q2); they hold for any
/// principal submatrix, so also after boundary elimination.
std::pair<double, double> mass_spectral_bounds(MassElement element);

/// Fixed-count Jacobi-preconditioned Chebyshev semi-iteration for an SPD
/// matrix, started from zero. The map r -> x_k is linear.
class ChebyshevPlan {
public:
    ChebyshevPlan() = default;
    ChebyshevPlan(SparseMatrix<real> matrix, int iterations, double lambda_lo, double lambda_hi);
    ChebyshevPlan(SparseMatrix<real> matrix, int iterations, MassElement element);

    int iterations() const noexcept { return iterations_; }
    double lambda_lo() const noexcept { return lo_; }
    double lambda_hi() const noexcept { return hi_; }
    const SparseMatrix<real>& matrix() const noexcept { return A_; }

    /// x = approximate A^{-1} r. A diagonal matrix is inverted exactly.
    template <class T>
    void apply(std::span<const T> r, std::span<T> x) const;

private:
    SparseMatrix<real> A_;
    std::vector<double> inv_diag_;
    int iterations_ = 0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    bool diagonal_ = false;
};

template <class T>
void ChebyshevPlan::apply(std::span<const T> r, std::span<T> x) const {
    const std::size_t n = A_.rows();
    if (r.size() != n || x.size() != n) throw UsageError("ChebyshevPlan::apply: size mismatch");
    if (diagonal_) {
        for (std::size_t i = 0; i < n; ++i) x[i] = inv_diag_[i] * r[i];
        return;
    }
    const double theta = 0.5 * (hi_ + lo_);
    const double delta = 0.5 * (hi_ - lo_);
    const double sigma = theta / delta;
    double rho = 1.0 / sigma;

    std::vector<T> d(n), res(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = inv_diag_[i] * r[i] / theta;
        x[i] = d[i];
    }
    for (int it = 1; it < iterations_; ++it) {
        A_.multiply<T, T>(std::span<const T>(x.data(), n), std::span<T>(res));
        const double rho_new = 1.0 / (2.0 * sigma - rho);
        const double c1 = rho_new * rho;
        const double c2 = 2.0 * rho_new / delta;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = c1 * d[i] + c2 * inv_diag_[i] * (r[i] - res[i]);
            x[i] += d[i];
        }
        rho = rho_new;
    }
}

}  // namespace pintflow
