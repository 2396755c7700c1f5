#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pintflow/inner/chebyshev.hpp"
#include "pintflow/inner/multigrid.hpp"
#include "pintflow/krylov/gmres.hpp"
#include "pintflow/mesh/levels.hpp"
#include "pintflow/precond/block_system.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
#include "pintflow/time/circulant.hpp"

namespace pintflow {

/// Approximate solves used inside the Oseen block preconditioner.
struct OseenInnerSolvers {
    LinearOperator<complex> Q_solve;   // Q_j = (d + tau/sqrt(beta)) M + tau L, size n_v
    LinearOperator<complex> QH_solve;  // Q_j^H
    LinearOperator<complex> M_solve;   // velocity mass
    LinearOperator<complex> Kp_solve;  // pinned pressure Laplacian
    LinearOperator<complex> Mp_solve;  // pressure mass
};

/// Everything needed to precondition one Fourier block G_j of the Oseen
/// system. Vectors are in block order (v, lambda, p, mu).
class OseenBlockContext {
public:
    OseenBlockContext(const DiscreteOperators& ops, complex d, double tau, double beta, OseenInnerSolvers solvers,
                      int uzawa_iters = 6, double uzawa_mu = 0.75);

    complex d() const noexcept { return d_; }
    double tau() const noexcept { return tau_; }
    double beta() const noexcept { return beta_; }
    std::size_t size() const { return 2 * (ops_->n_v + ops_->n_p); }
    const DiscreteOperators& ops() const noexcept { return *ops_; }

    void apply_G(std::span<const complex> x, std::span<complex> y) const;

    /// Velocity-adjoint block [[tau M, K^H], [K, -(tau/beta) M]] with
    /// K = d M + tau L, applied to (x1, x2).
    void apply_G11(std::span<const complex> x1, std::span<const complex> x2, std::span<complex> y1,
                   std::span<complex> y2) const;

    /// S_hat^{-1} r = tau Q^{-H} M Q^{-1} r, the approximate inverse of the
    /// negated Schur complement of the velocity-adjoint block.
    void apply_S11_inv(std::span<const complex> r, std::span<complex> y) const;

    /// Fixed number of preconditioned Uzawa steps from zero on the
    /// velocity-adjoint block:
    ///   x1 += (1/tau) M^{-1} (b1 - tau M x1 - K^H x2)
    ///   x2 -= (1/mu) S_hat^{-1} (b2 - K x1 + (tau/beta) M x2)
    void apply_P11_uzawa(std::span<const complex> b1, std::span<const complex> b2, std::span<complex> x1,
                         std::span<complex> x2, int iters) const;
    void apply_P11_uzawa(std::span<const complex> b1, std::span<const complex> b2, std::span<complex> x1,
                         std::span<complex> x2) const {
        apply_P11_uzawa(b1, b2, x1, x2, uzawa_iters_);
    }

    /// Commutator approximation of the pressure Schur complement, applied as
    ///   u = (M_p^{-1} r4, M_p^{-1} r3) / tau,
    ///   z = [[tau M_p, conj(d) M_p + tau L_p^T], [d M_p + tau L_p, -(tau/beta) M_p]] u,
    ///   y = (K_p^{-1} z2, K_p^{-1} z1) / tau.
    void apply_schur_inv(std::span<const complex> r3, std::span<const complex> r4, std::span<complex> y3,
                         std::span<complex> y4) const;

    /// Block lower-triangular preconditioner: (y1, y2) from Uzawa, then
    /// (y3, y4) = -S^{-1}((r3, r4) - tau (B y2, B y1)).
    void apply_Puz_inv(std::span<const complex> r, std::span<complex> y) const;

    /// GMRES on G_j preconditioned by apply_Puz_inv to relative tolerance tol.
    BlockSolveStats solve_nonlinear(std::span<const complex> r, std::span<complex> y, double tol, int max_iters,
                                    int restart) const;

private:
    const DiscreteOperators* ops_;
    complex d_;
    double tau_, beta_;
    OseenInnerSolvers solvers_;
    int uzawa_iters_;
    double uzawa_mu_;
};

/// Plans shared by every block (independent of d_j).
struct SharedOseenPlans {
    std::shared_ptr<const MultigridPlan<real>> Kp_mg;
    std::shared_ptr<const ChebyshevPlan> Mp_cheb;
    std::shared_ptr<const ChebyshevPlan> M_cheb;
};

SharedOseenPlans build_shared_oseen_plans(const LevelOperators& levels, const InnerSettings& settings);

/// Production inner solvers: complex MG for Q_j and Q_j^H, MG for K_p,
/// Chebyshev for M and M_p.
OseenInnerSolvers multigrid_oseen_solvers(const LevelOperators& levels, complex d, double tau, double beta,
                                          const SharedOseenPlans& shared, const InnerSettings& settings);

/// Dense exact inner solvers (verification at desk scale only).
OseenInnerSolvers exact_oseen_solvers(const DiscreteOperators& ops, complex d, double tau, double beta);

std::vector<OseenBlockContext> build_oseen_contexts(const LevelOperators& levels, const TimeGrid& grid, double beta,
                                                    const InnerSettings& settings);

BlockSolver oseen_block_solver(const std::vector<OseenBlockContext>& contexts, const InnerSettings& settings);

}  // namespace pintflow
