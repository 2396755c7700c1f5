#pragma once

#include <string>
#include <vector>

#include "pintflow/krylov/gmres.hpp"
#include "pintflow/linalg/dense.hpp"
#include "pintflow/mesh/fem.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
#include "pintflow/system/all_at_once.hpp"
#include "pintflow/time/circulant.hpp"

namespace pintflow {

/// Dense matrix of an operator, built column by column from unit vectors.
DenseMatrix dense_from_operator(const LinearOperator<real>& op, std::size_t n);
DenseComplexMatrix dense_from_operator(const LinearOperator<complex>& op, std::size_t n);

/// Dense all-at-once matrix (or P_C for a periodic operator), field-major order.
DenseMatrix dense_all_at_once(const AllAtOnceOperator& op);

/// Dense G_j in block order (v, lambda, p, mu).
DenseComplexMatrix dense_block_G(const DiscreteOperators& ops, complex d, double tau, double beta);

/// Block solver applying G_j^{-1} exactly through dense LU factorisations.
/// The returned solver owns its factorisations.
BlockSolver exact_block_solver(const DiscreteOperators& ops, const CirculantSpectrum& spectrum, double tau,
                               double beta);

/// Extreme magnitudes of the block-preconditioned spectra.
struct BlockBounds {
    double a_hat = 0.0, b_hat = 0.0;  // min/max |lambda(P_hat_j^{-1} Z_j)| over all blocks
    double c = 0.0, d = 0.0;          // min(1, .) / max(1, .) of lambda(S_hat_j^{-1} B W_j^{-1} B^T)
};

BlockBounds measure_block_bounds(const DiscreteOperators& ops, const CirculantSpectrum& spectrum, double tau,
                                 double beta);

/// Sorted eigenvalues (real part descending) of the four preconditioned
/// all-at-once operators.
struct PreconditionedSpectra {
    std::vector<complex> PC_A;        // P_C^{-1} A
    std::vector<complex> Phat_A;      // P_hat_C^{-1} A
    std::vector<complex> Ptilde_PC;   // P_tilde_C^{-1} P_C
    std::vector<complex> Ptilde_A;    // P_tilde_C^{-1} A
};

/// Eigenvalue counts of the preconditioned all-at-once systems against their
/// lower bounds, with the block interval bounds measured densely.
struct SpectralSummary {
    int n_t = 0;
    double beta = 0.0;
    std::size_t n_v = 0, n_p = 0, N = 0;
    BlockBounds bounds;

    double unit_tol = 1e-6;
    double interval_tol = 1e-6;
    double product_tol = 1e-8;

    std::size_t unit_count = 0, unit_bound = 0;      // |mu - 1| < unit_tol for P_C^{-1} A, bound N - 2 n_v
    std::size_t phat_count = 0, phat_bound = 0;      // |mu| in [a_hat, b_hat] for P_hat_C^{-1} A, bound N - 4 n_v
    std::size_t ptilde_count = 0, ptilde_bound = 0;  // |mu| in [a_hat c, b_hat d] for P_tilde_C^{-1} A
    double product_min = 0.0, product_max = 0.0;     // extreme |mu| of P_tilde_C^{-1} P_C
    bool product_inside = false;                     // inside [a_hat c, b_hat d] up to product_tol

    double unit_fraction = 0.0;
    double unit_fraction_threshold = 0.0;  // 1 - 1/(n_t - 1) - 2 n_v / N

    bool unit_ok() const { return unit_count >= unit_bound; }
    bool phat_ok() const { return phat_count >= phat_bound; }
    bool ptilde_ok() const { return ptilde_count >= ptilde_bound; }
    bool fraction_ok() const { return unit_fraction > unit_fraction_threshold; }
};

/// Builds the four preconditioned operators densely (Stokes, no wind) and
/// evaluates the counts. Refuses N above kDenseEigenLimit.
SpectralSummary verify_eigenvalue_counts(const DiscreteOperators& ops, const TimeGrid& grid, double beta,
                                      PreconditionedSpectra* spectra = nullptr);

/// CSV with columns operator,index,real,imag,abs.
void write_spectra_csv(const std::string& path, const PreconditionedSpectra& spectra);

}  // namespace pintflow
