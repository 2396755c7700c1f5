#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pintflow/inner/chebyshev.hpp"
#include "pintflow/inner/multigrid.hpp"
#include "pintflow/linalg/dense.hpp"
#include "pintflow/krylov/gmres.hpp"
#include "pintflow/mesh/levels.hpp"
#include "pintflow/precond/block_system.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
#include "pintflow/time/circulant.hpp"

namespace pintflow {

struct BlockConstants {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Real constants of the transformation G_j = T_l Z_j T_r:
///   c2 = 1 / sqrt(1/beta + d_c^2 / tau^2),  c1 = d_r / sqrt(tau^2/beta + d_c^2),
/// with d_r, d_c the real and imaginary parts of d_j.
BlockConstants block_constants(complex d, double tau, double beta);

/// Approximate solves used inside the Stokes block preconditioner.
struct StokesInnerSolvers {
    LinearOperator<complex> W_solve;   // W_j = (1 + c1) M + c2 L, size n_v
    LinearOperator<complex> Kp_solve;  // pinned pressure Laplacian
    LinearOperator<complex> Mp_solve;  // pressure mass
};

/// Everything needed to precondition one Fourier block of the Stokes system.
/// Vectors are in block order (v, lambda, p, mu).
class StokesBlockContext {
public:
    StokesBlockContext(const DiscreteOperators& ops, complex d, double tau, double beta, StokesInnerSolvers solvers);

    complex d() const noexcept { return d_; }
    double tau() const noexcept { return tau_; }
    double beta() const noexcept { return beta_; }
    const BlockConstants& constants() const noexcept { return c_; }
    std::size_t size() const { return 2 * (ops_->n_v + ops_->n_p); }
    const DiscreteOperators& ops() const noexcept { return *ops_; }

    void apply_Tl(std::span<const complex> x, std::span<complex> y) const;
    void apply_Tr(std::span<const complex> x, std::span<complex> y) const;
    void apply_Tl_inv(std::span<const complex> r, std::span<complex> y) const;
    void apply_Tr_inv(std::span<const complex> r, std::span<complex> y) const;

    /// Z_j = [[M, X, 0, B^T], [X, -M, B^T, 0], [0, B, 0, 0], [B, 0, 0, 0]],
    /// X = c1 M + c2 L. Real symmetric.
    template <class X>
    void apply_Z(std::span<const X> x, std::span<X> y) const;

    void apply_G(std::span<const complex> x, std::span<complex> y) const;

    /// Block-diagonal approximation of P_hat^{-1}:
    /// diag(W^{-1}, W^{-1}, S^{-1}, S^{-1}) with
    /// S^{-1} = (1 + c1) K_p^{-1} + nu c2 M_p^{-1}, with the mass solve taken on
    /// the quotient space (see pinned_quotient_solver).
    void apply_Ptilde_inv(std::span<const complex> r, std::span<complex> y) const;

    /// Linear block step: y = T_r^{-1} P_tilde^{-1} T_l^{-1} r.
    BlockSolveStats solve_linear(std::span<const complex> r, std::span<complex> y) const;

    /// Nonlinear block step: GMRES on Z_j preconditioned by P_tilde to the
    /// relative tolerance tol, wrapped by the T transforms.
    BlockSolveStats solve_nonlinear(std::span<const complex> r, std::span<complex> y, double tol, int max_iters,
                                    int restart) const;

private:
    const DiscreteOperators* ops_;
    complex d_;
    double tau_, beta_;
    BlockConstants c_;
    StokesInnerSolvers solvers_;
};

template <class X>
void StokesBlockContext::apply_Z(std::span<const X> x, std::span<X> y) const {
    const DiscreteOperators& o = *ops_;
    const BlockOffsets b{o.n_v, o.n_p};
    if (x.size() != b.size() || y.size() != b.size()) throw UsageError("apply_Z: size mismatch");
    const auto x1 = x.subspan(b.v(), o.n_v), x2 = x.subspan(b.lambda(), o.n_v);
    const auto x3 = x.subspan(b.p(), o.n_p), x4 = x.subspan(b.mu(), o.n_p);
    auto y1 = y.subspan(b.v(), o.n_v), y2 = y.subspan(b.lambda(), o.n_v);
    auto y3 = y.subspan(b.p(), o.n_p), y4 = y.subspan(b.mu(), o.n_p);
    std::vector<X> Mx1(o.n_v), Mx2(o.n_v), Lx1(o.n_v), Lx2(o.n_v);
    o.M.multiply<X, X>(x1, Mx1);
    o.M.multiply<X, X>(x2, Mx2);
    o.L.multiply<X, X>(x1, Lx1);
    o.L.multiply<X, X>(x2, Lx2);
    o.Bt.multiply<X, X>(x4, y1);
    o.Bt.multiply<X, X>(x3, y2);
    for (std::size_t i = 0; i < o.n_v; ++i) {
        y1[i] += Mx1[i] + c_.c1 * Mx2[i] + c_.c2 * Lx2[i];
        y2[i] += c_.c1 * Mx1[i] + c_.c2 * Lx1[i] - Mx2[i];
    }
    o.B.multiply<X, X>(x2, y3);
    o.B.multiply<X, X>(x1, y4);
}

/// Plans shared by all blocks (they do not depend on d_j).
struct SharedPressurePlans {
    std::shared_ptr<const MultigridPlan<real>> Kp_mg;
    std::shared_ptr<const ChebyshevPlan> Mp_cheb;
    std::shared_ptr<const ChebyshevPlan> M_cheb;  // velocity mass
};

SharedPressurePlans build_shared_plans(const LevelOperators& levels, const InnerSettings& settings);

/// Production inner solvers: MG for W_j and K_p, Chebyshev for M_p.
StokesInnerSolvers multigrid_stokes_solvers(const LevelOperators& levels, const BlockConstants& c,
                                            const SharedPressurePlans& shared, const InnerSettings& settings);

/// Dense exact inner solvers (verification at desk scale only).
StokesInnerSolvers exact_stokes_solvers(const DiscreteOperators& ops, const BlockConstants& c);

/// One context per Fourier block, built with MG inner solvers.
std::vector<StokesBlockContext> build_stokes_contexts(const LevelOperators& levels, const TimeGrid& grid, double beta,
                                                      const InnerSettings& settings);

enum class StokesVariant { linear, nonlinear };

/// Linear (single sweep) or nonlinear (inner GMRES) block solver over the contexts.
BlockSolver stokes_block_solver(const std::vector<StokesBlockContext>& contexts, StokesVariant variant,
                                const InnerSettings& settings);

/// Exact block-diagonal preconditioner of Z_j with blocks W_j, W_j,
/// B W_j^{-1} B^T, B W_j^{-1} B^T, built densely (desk scale only).
class PhatExact {
public:
    PhatExact(const DiscreteOperators& ops, const BlockConstants& c);
    void apply_inv(std::span<const complex> r, std::span<complex> y) const;
    /// Dense P_hat (for positivity and spectrum checks).
    Eigen::MatrixXd dense() const;

private:
    std::size_t nv_, np_;
    Eigen::MatrixXd W_, S_;
    Eigen::LLT<Eigen::MatrixXd> W_llt_, S_llt_;
};

}  // namespace pintflow
