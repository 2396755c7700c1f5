#pragma once

#include <span>

#include <Eigen/Dense>

#include "pintflow/inner/multigrid.hpp"
#include "pintflow/krylov/gmres.hpp"
#include "pintflow/mesh/fem.hpp"

namespace pintflow {

/// Offsets of the four fields inside one time block ordered (v, lambda, p, mu).
struct BlockOffsets {
    std::size_t nv = 0, np = 0;
    std::size_t v() const { return 0; }
    std::size_t lambda() const { return nv; }
    std::size_t p() const { return 2 * nv; }
    std::size_t mu() const { return 2 * nv + np; }
    std::size_t size() const { return 2 * (nv + np); }
};

/// y = G_j x for the Fourier-transformed block
///   [ tau M        conj(d) M + tau L^T   0          tau B^T ]
///   [ d M + tau L  -(tau/beta) M         tau B^T    0       ]
///   [ 0            tau B                 0          0       ]
///   [ tau B        0                     0          0       ]
void apply_block_G(const DiscreteOperators& ops, complex d, double tau, double beta, std::span<const complex> x,
                   std::span<complex> y);

/// The pinned pressure unknowns represent the Q1 space modulo constants, with
/// the value at Q1 node 0 fixed to zero. A solve with a full-space matrix is
/// carried into that representation as r -> (-sum r, r), solve, x -> x_kept - x_0.
/// For the Neumann Laplacian this reproduces the pinned solve exactly; for the
/// pressure mass it removes the constant mode that pinning alone keeps.
LinearOperator<complex> pinned_quotient_solver(LinearOperator<complex> full_solve, std::size_t n_p);

/// Dense matrix of the same map around A_full^{-1} (verification).
Eigen::MatrixXd pinned_quotient_inverse(const Eigen::MatrixXd& A_full);

/// Inner solver settings shared by the Stokes and Oseen block preconditioners.
struct InnerSettings {
    MultigridConfig mg{};
    int chebyshev_iters = 10;
    double inner_tol = 1e-2;   // relative tolerance of the per-block GMRES
    int inner_max_iters = 200;
    int inner_restart = 50;
    int uzawa_iters = 6;
    double uzawa_mu = 0.75;

    void validate() const {
        mg.validate();
        if (chebyshev_iters < 1) throw ConfigError("chebyshev iterations must be >= 1");
        if (!(inner_tol > 0.0 && inner_tol < 1.0)) throw ConfigError("inner tolerance must lie in (0, 1)");
        if (inner_max_iters < 1 || inner_restart < 1) throw ConfigError("inner iteration limits must be >= 1");
        if (uzawa_iters < 1) throw ConfigError("uzawa iterations must be >= 1");
        if (!(uzawa_mu > 0.0 && uzawa_mu < 2.0)) throw ConfigError("uzawa mu must lie in (0, 2)");
    }
};

/// Outcome of one block solve inside a preconditioner application.
struct BlockSolveStats {
    int iterations = 0;
    bool converged = true;
};

}  // namespace pintflow
