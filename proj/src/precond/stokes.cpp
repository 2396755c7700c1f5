#include "pintflow/precond/stokes.hpp"

#include <cmath>

#include "pintflow/inner/dense_solver.hpp"

namespace pintflow {

namespace {
constexpr complex kI{0.0, 1.0};
}

BlockConstants block_constants(complex d, double tau, double beta) {
    if (!(tau > 0.0) || !(beta > 0.0)) throw ConfigError("block_constants: tau and beta must be positive");
    const double dr = d.real(), dc = d.imag();
    BlockConstants c;
    c.c2 = 1.0 / std::sqrt(1.0 / beta + dc * dc / (tau * tau));
    c.c1 = dr / std::sqrt(tau * tau / beta + dc * dc);
    if (!(c.c2 > 0.0)) throw ConfigError("block_constants: c2 must be positive");
    return c;
}

StokesBlockContext::StokesBlockContext(const DiscreteOperators& ops, complex d, double tau, double beta,
                                       StokesInnerSolvers solvers)
    : ops_(&ops), d_(d), tau_(tau), beta_(beta), c_(block_constants(d, tau, beta)), solvers_(std::move(solvers)) {}

void StokesBlockContext::apply_Tl(std::span<const complex> x, std::span<complex> y) const {
    const BlockOffsets b{ops_->n_v, ops_->n_p};
    const double s = std::sqrt(tau_), dc = d_.imag(), c2 = c_.c2;
    for (std::size_t i = 0; i < b.nv; ++i) {
        const complex x1 = x[b.v() + i], x2 = x[b.lambda() + i];
        y[b.v() + i] = s * x1;
        y[b.lambda() + i] = s * x2 / c2 + kI * (dc / s) * x1;
    }
    for (std::size_t i = 0; i < b.np; ++i) {
        const complex x3 = x[b.p() + i], x4 = x[b.mu() + i];
        y[b.p() + i] = s * c2 * x3;
        y[b.mu() + i] = s * x4 + kI * (dc * c2 / s) * x3;
    }
}

void StokesBlockContext::apply_Tl_inv(std::span<const complex> r, std::span<complex> y) const {
    const BlockOffsets b{ops_->n_v, ops_->n_p};
    const double s = std::sqrt(tau_), dc = d_.imag(), c2 = c_.c2;
    for (std::size_t i = 0; i < b.nv; ++i) {
        const complex y1 = r[b.v() + i] / s;
        y[b.v() + i] = y1;
        y[b.lambda() + i] = (r[b.lambda() + i] - kI * (dc / s) * y1) * c2 / s;
    }
    for (std::size_t i = 0; i < b.np; ++i) {
        const complex y3 = r[b.p() + i] / (s * c2);
        y[b.p() + i] = y3;
        y[b.mu() + i] = (r[b.mu() + i] - kI * (dc * c2 / s) * y3) / s;
    }
}

void StokesBlockContext::apply_Tr(std::span<const complex> x, std::span<complex> y) const {
    const BlockOffsets b{ops_->n_v, ops_->n_p};
    const double s = std::sqrt(tau_), dc = d_.imag(), c2 = c_.c2;
    for (std::size_t i = 0; i < b.nv; ++i) {
        const complex x1 = x[b.v() + i], x2 = x[b.lambda() + i];
        y[b.v() + i] = s * x1 - kI * (dc / s) * x2;
        y[b.lambda() + i] = s * x2 / c2;
    }
    for (std::size_t i = 0; i < b.np; ++i) {
        const complex x3 = x[b.p() + i], x4 = x[b.mu() + i];
        y[b.p() + i] = s * c2 * x3 - kI * (dc * c2 / s) * x4;
        y[b.mu() + i] = s * x4;
    }
}

void StokesBlockContext::apply_Tr_inv(std::span<const complex> r, std::span<complex> y) const {
    const BlockOffsets b{ops_->n_v, ops_->n_p};
    const double s = std::sqrt(tau_), dc = d_.imag(), c2 = c_.c2;
    for (std::size_t i = 0; i < b.nv; ++i) {
        const complex y2 = r[b.lambda() + i] * c2 / s;
        y[b.lambda() + i] = y2;
        y[b.v() + i] = (r[b.v() + i] + kI * (dc / s) * y2) / s;
    }
    for (std::size_t i = 0; i < b.np; ++i) {
        const complex y4 = r[b.mu() + i] / s;
        y[b.mu() + i] = y4;
        y[b.p() + i] = (r[b.p() + i] + kI * (dc * c2 / s) * y4) / (s * c2);
    }
}

void StokesBlockContext::apply_G(std::span<const complex> x, std::span<complex> y) const {
    apply_block_G(*ops_, d_, tau_, beta_, x, y);
}

void StokesBlockContext::apply_Ptilde_inv(std::span<const complex> r, std::span<complex> y) const {
    const DiscreteOperators& o = *ops_;
    const BlockOffsets b{o.n_v, o.n_p};
    solvers_.W_solve(r.subspan(b.v(), o.n_v), y.subspan(b.v(), o.n_v));
    solvers_.W_solve(r.subspan(b.lambda(), o.n_v), y.subspan(b.lambda(), o.n_v));
    std::vector<complex> tk(o.n_p), tm(o.n_p);
    for (std::size_t off : {b.p(), b.mu()}) {
        const auto rr = r.subspan(off, o.n_p);
        solvers_.Kp_solve(rr, tk);
        solvers_.Mp_solve(rr, tm);
        auto yy = y.subspan(off, o.n_p);
        for (std::size_t i = 0; i < o.n_p; ++i) yy[i] = (1.0 + c_.c1) * tk[i] + o.nu * c_.c2 * tm[i];
    }
}

BlockSolveStats StokesBlockContext::solve_linear(std::span<const complex> r, std::span<complex> y) const {
    std::vector<complex> s(size()), z(size());
    apply_Tl_inv(r, s);
    apply_Ptilde_inv(s, z);
    apply_Tr_inv(z, y);
    return {1, true};
}

BlockSolveStats StokesBlockContext::solve_nonlinear(std::span<const complex> r, std::span<complex> y, double tol,
                                                    int max_iters, int restart) const {
    std::vector<complex> s(size());
    apply_Tl_inv(r, s);
    const LinearOperator<complex> Z = [this](std::span<const complex> x, std::span<complex> out) {
        apply_Z<complex>(x, out);
    };
    const LinearOperator<complex> P = [this](std::span<const complex> x, std::span<complex> out) {
        apply_Ptilde_inv(x, out);
    };
    KrylovConfig cfg;
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    cfg.restart = restart;
    cfg.record_history = false;
    const SolveResult<complex> res = gmres<complex>(Z, P, s, cfg);
    apply_Tr_inv(res.x, y);
    return {res.iterations, res.converged};
}

SharedPressurePlans build_shared_plans(const LevelOperators& levels, const InnerSettings& settings) {
    settings.validate();
    const DiscreteOperators& f = levels.finest();
    SharedPressurePlans s;
    s.Kp_mg = std::make_shared<const MultigridPlan<real>>(pressure_laplacian_multigrid(levels, settings.mg));
    s.Mp_cheb = std::make_shared<const ChebyshevPlan>(f.M_p_full, settings.chebyshev_iters, MassElement::Q1);
    s.M_cheb = std::make_shared<const ChebyshevPlan>(f.M, settings.chebyshev_iters, MassElement::Q2);
    return s;
}

StokesInnerSolvers multigrid_stokes_solvers(const LevelOperators& levels, const BlockConstants& c,
                                            const SharedPressurePlans& shared, const InnerSettings& settings) {
    auto W = std::make_shared<const MultigridPlan<real>>(
        velocity_multigrid<real>(levels, 1.0 + c.c1, c.c2, settings.mg));
    StokesInnerSolvers s;
    s.W_solve = [W](std::span<const complex> r, std::span<complex> y) { apply_componentwise<real, complex>(*W, r, y); };
    s.Kp_solve = [K = shared.Kp_mg](std::span<const complex> r, std::span<complex> y) { K->apply<complex>(r, y); };
    s.Mp_solve = pinned_quotient_solver(
        [C = shared.Mp_cheb](std::span<const complex> r, std::span<complex> y) { C->apply<complex>(r, y); },
        levels.finest().n_p);
    return s;
}

StokesInnerSolvers exact_stokes_solvers(const DiscreteOperators& ops, const BlockConstants& c) {
    const SparseMatrix<real> W = linear_combination<real, real>({{1.0 + c.c1, &ops.M}, {c.c2, &ops.L}});
    return {dense_real_solver(W), dense_real_solver(ops.K_p),
            pinned_quotient_solver(dense_real_solver(ops.M_p_full), ops.n_p)};
}

std::vector<StokesBlockContext> build_stokes_contexts(const LevelOperators& levels, const TimeGrid& grid, double beta,
                                                      const InnerSettings& settings) {
    const CirculantSpectrum spec = circulant_spectrum(grid);
    const SharedPressurePlans shared = build_shared_plans(levels, settings);
    std::vector<StokesBlockContext> out;
    out.reserve(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const BlockConstants c = block_constants(spec.d[j], grid.tau(), beta);
        out.emplace_back(levels.finest(), spec.d[j], grid.tau(), beta,
                         multigrid_stokes_solvers(levels, c, shared, settings));
    }
    return out;
}

BlockSolver stokes_block_solver(const std::vector<StokesBlockContext>& contexts, StokesVariant variant,
                                const InnerSettings& settings) {
    if (variant == StokesVariant::linear) {
        return [&contexts](std::size_t j, std::span<const complex> r, std::span<complex> y) {
            return contexts[j].solve_linear(r, y);
        };
    }
    return [&contexts, settings](std::size_t j, std::span<const complex> r, std::span<complex> y) {
        return contexts[j].solve_nonlinear(r, y, settings.inner_tol, settings.inner_max_iters, settings.inner_restart);
    };
}

PhatExact::PhatExact(const DiscreteOperators& ops, const BlockConstants& c) : nv_(ops.n_v), np_(ops.n_p) {
    if (2 * (nv_ + np_) > kDenseEigenLimit) throw UsageError("PhatExact refused: block too large for dense assembly");
    W_ = to_dense(linear_combination<real, real>({{1.0 + c.c1, &ops.M}, {c.c2, &ops.L}}));
    W_llt_.compute(W_);
    if (W_llt_.info() != Eigen::Success) throw NumericalError("PhatExact: W_j is not positive definite");
    const Eigen::MatrixXd Bd = to_dense(ops.B);
    S_ = Bd * W_llt_.solve(Bd.transpose());
    S_ = 0.5 * (S_ + S_.transpose());
    S_llt_.compute(S_);
    if (S_llt_.info() != Eigen::Success) throw NumericalError("PhatExact: B W^{-1} B^T is not positive definite");
}

void PhatExact::apply_inv(std::span<const complex> r, std::span<complex> y) const {
    auto solve = [](const Eigen::LLT<Eigen::MatrixXd>& llt, std::span<const complex> in, std::span<complex> out) {
        const auto n = static_cast<Eigen::Index>(in.size());
        Eigen::MatrixXd rhs(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            rhs(i, 0) = in[static_cast<std::size_t>(i)].real();
            rhs(i, 1) = in[static_cast<std::size_t>(i)].imag();
        }
        const Eigen::MatrixXd sol = llt.solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = complex(sol(i, 0), sol(i, 1));
    };
    const BlockOffsets b{nv_, np_};
    solve(W_llt_, r.subspan(b.v(), nv_), y.subspan(b.v(), nv_));
    solve(W_llt_, r.subspan(b.lambda(), nv_), y.subspan(b.lambda(), nv_));
    solve(S_llt_, r.subspan(b.p(), np_), y.subspan(b.p(), np_));
    solve(S_llt_, r.subspan(b.mu(), np_), y.subspan(b.mu(), np_));
}

Eigen::MatrixXd PhatExact::dense() const {
    const auto nv = static_cast<Eigen::Index>(nv_), np = static_cast<Eigen::Index>(np_);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * (nv + np), 2 * (nv + np));
    P.block(0, 0, nv, nv) = W_;
    P.block(nv, nv, nv, nv) = W_;
    P.block(2 * nv, 2 * nv, np, np) = S_;
    P.block(2 * nv + np, 2 * nv + np, np, np) = S_;
    return P;
}

}  // namespace pintflow
