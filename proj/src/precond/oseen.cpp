#include "pintflow/precond/oseen.hpp"

#include <cmath>

#include "pintflow/inner/dense_solver.hpp"

namespace pintflow {

OseenBlockContext::OseenBlockContext(const DiscreteOperators& ops, complex d, double tau, double beta,
                                     OseenInnerSolvers solvers, int uzawa_iters, double uzawa_mu)
    : ops_(&ops), d_(d), tau_(tau), beta_(beta), solvers_(std::move(solvers)), uzawa_iters_(uzawa_iters),
      uzawa_mu_(uzawa_mu) {
    if (!(tau > 0.0) || !(beta > 0.0)) throw ConfigError("OseenBlockContext: tau and beta must be positive");
    if (uzawa_iters < 1) throw ConfigError("uzawa iterations must be >= 1");
    if (!(uzawa_mu > 0.0 && uzawa_mu < 2.0)) throw ConfigError("uzawa mu must lie in (0, 2)");
}

void OseenBlockContext::apply_G(std::span<const complex> x, std::span<complex> y) const {
    apply_block_G(*ops_, d_, tau_, beta_, x, y);
}

void OseenBlockContext::apply_G11(std::span<const complex> x1, std::span<const complex> x2, std::span<complex> y1,
                                  std::span<complex> y2) const {
    const DiscreteOperators& o = *ops_;
    std::vector<complex> Mx1(o.n_v), Mx2(o.n_v);
    o.M.multiply<complex, complex>(x1, Mx1);
    o.M.multiply<complex, complex>(x2, Mx2);
    o.Lt.multiply<complex, complex>(x2, y1);
    o.L.multiply<complex, complex>(x1, y2);
    for (std::size_t i = 0; i < o.n_v; ++i) {
        y1[i] = tau_ * (Mx1[i] + y1[i]) + std::conj(d_) * Mx2[i];
        y2[i] = tau_ * y2[i] + d_ * Mx1[i] - (tau_ / beta_) * Mx2[i];
    }
}

void OseenBlockContext::apply_S11_inv(std::span<const complex> r, std::span<complex> y) const {
    const std::size_t n = ops_->n_v;
    std::vector<complex> a(n), b(n);
    solvers_.Q_solve(r, a);
    ops_->M.multiply<complex, complex>(a, b);
    solvers_.QH_solve(b, y);
    for (auto& v : y) v *= tau_;
}

void OseenBlockContext::apply_P11_uzawa(std::span<const complex> b1, std::span<const complex> b2,
                                        std::span<complex> x1, std::span<complex> x2, int iters) const {
    const std::size_t n = ops_->n_v;
    std::fill(x1.begin(), x1.end(), complex{0});
    std::fill(x2.begin(), x2.end(), complex{0});
    std::vector<complex> g1(n), g2(n), res(n), corr(n);
    for (int it = 0; it < iters; ++it) {
        apply_G11(x1, x2, g1, g2);
        for (std::size_t i = 0; i < n; ++i) res[i] = b1[i] - g1[i];
        solvers_.M_solve(res, corr);
        for (std::size_t i = 0; i < n; ++i) x1[i] += corr[i] / tau_;

        apply_G11(x1, x2, g1, g2);
        for (std::size_t i = 0; i < n; ++i) res[i] = b2[i] - g2[i];
        apply_S11_inv(res, corr);
        for (std::size_t i = 0; i < n; ++i) x2[i] -= corr[i] / uzawa_mu_;
    }
}

void OseenBlockContext::apply_schur_inv(std::span<const complex> r3, std::span<const complex> r4,
                                        std::span<complex> y3, std::span<complex> y4) const {
    const DiscreteOperators& o = *ops_;
    const std::size_t n = o.n_p;
    std::vector<complex> u1(n), u2(n), Mu1(n), Mu2(n), z1(n), z2(n);
    solvers_.Mp_solve(r4, u1);
    solvers_.Mp_solve(r3, u2);
    for (std::size_t i = 0; i < n; ++i) {
        u1[i] /= tau_;
        u2[i] /= tau_;
    }
    o.M_p.multiply<complex, complex>(u1, Mu1);
    o.M_p.multiply<complex, complex>(u2, Mu2);
    o.L_pt.multiply<complex, complex>(u2, z1);
    o.L_p.multiply<complex, complex>(u1, z2);
    for (std::size_t i = 0; i < n; ++i) {
        z1[i] = tau_ * (Mu1[i] + z1[i]) + std::conj(d_) * Mu2[i];
        z2[i] = tau_ * z2[i] + d_ * Mu1[i] - (tau_ / beta_) * Mu2[i];
    }
    solvers_.Kp_solve(z2, y3);
    solvers_.Kp_solve(z1, y4);
    for (std::size_t i = 0; i < n; ++i) {
        y3[i] /= tau_;
        y4[i] /= tau_;
    }
}

void OseenBlockContext::apply_Puz_inv(std::span<const complex> r, std::span<complex> y) const {
    const DiscreteOperators& o = *ops_;
    const BlockOffsets b{o.n_v, o.n_p};
    if (r.size() != b.size() || y.size() != b.size()) throw UsageError("apply_Puz_inv: size mismatch");
    auto y1 = y.subspan(b.v(), o.n_v), y2 = y.subspan(b.lambda(), o.n_v);
    auto y3 = y.subspan(b.p(), o.n_p), y4 = y.subspan(b.mu(), o.n_p);
    apply_P11_uzawa(r.subspan(b.v(), o.n_v), r.subspan(b.lambda(), o.n_v), y1, y2);

    std::vector<complex> s3(o.n_p), s4(o.n_p);
    o.B.multiply<complex, complex>(y2, s3);
    o.B.multiply<complex, complex>(y1, s4);
    for (std::size_t i = 0; i < o.n_p; ++i) {
        s3[i] = r[b.p() + i] - tau_ * s3[i];
        s4[i] = r[b.mu() + i] - tau_ * s4[i];
    }
    apply_schur_inv(s3, s4, y3, y4);
    for (auto& v : y3) v = -v;
    for (auto& v : y4) v = -v;
}

BlockSolveStats OseenBlockContext::solve_nonlinear(std::span<const complex> r, std::span<complex> y, double tol,
                                                   int max_iters, int restart) const {
    const LinearOperator<complex> G = [this](std::span<const complex> x, std::span<complex> out) { apply_G(x, out); };
    const LinearOperator<complex> P = [this](std::span<const complex> x, std::span<complex> out) {
        apply_Puz_inv(x, out);
    };
    KrylovConfig cfg;
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    cfg.restart = restart;
    cfg.record_history = false;
    const SolveResult<complex> res = gmres<complex>(G, P, r, cfg);
    std::copy(res.x.begin(), res.x.end(), y.begin());
    return {res.iterations, res.converged};
}

SharedOseenPlans build_shared_oseen_plans(const LevelOperators& levels, const InnerSettings& settings) {
    settings.validate();
    const DiscreteOperators& f = levels.finest();
    SharedOseenPlans s;
    s.Kp_mg = std::make_shared<const MultigridPlan<real>>(pressure_laplacian_multigrid(levels, settings.mg));
    s.Mp_cheb = std::make_shared<const ChebyshevPlan>(f.M_p, settings.chebyshev_iters, MassElement::Q1);
    s.M_cheb = std::make_shared<const ChebyshevPlan>(f.M, settings.chebyshev_iters, MassElement::Q2);
    return s;
}

OseenInnerSolvers multigrid_oseen_solvers(const LevelOperators& levels, complex d, double tau, double beta,
                                          const SharedOseenPlans& shared, const InnerSettings& settings) {
    const complex alpha = d + tau / std::sqrt(beta);
    auto Q = std::make_shared<const MultigridPlan<complex>>(
        velocity_multigrid<complex>(levels, alpha, complex(tau), settings.mg));
    auto QH = std::make_shared<const MultigridPlan<complex>>(
        velocity_multigrid<complex>(levels, std::conj(alpha), complex(tau), settings.mg, true));
    OseenInnerSolvers s;
    s.Q_solve = [Q](std::span<const complex> r, std::span<complex> y) { apply_componentwise<complex, complex>(*Q, r, y); };
    s.QH_solve = [QH](std::span<const complex> r, std::span<complex> y) {
        apply_componentwise<complex, complex>(*QH, r, y);
    };
    s.M_solve = [C = shared.M_cheb](std::span<const complex> r, std::span<complex> y) { C->apply<complex>(r, y); };
    s.Kp_solve = [K = shared.Kp_mg](std::span<const complex> r, std::span<complex> y) { K->apply<complex>(r, y); };
    s.Mp_solve = [C = shared.Mp_cheb](std::span<const complex> r, std::span<complex> y) { C->apply<complex>(r, y); };
    return s;
}

OseenInnerSolvers exact_oseen_solvers(const DiscreteOperators& ops, complex d, double tau, double beta) {
    const complex alpha = d + tau / std::sqrt(beta);
    const SparseMatrix<complex> Q = linear_combination<complex, real>({{alpha, &ops.M}, {complex(tau), &ops.L}});
    const SparseMatrix<complex> QH =
        linear_combination<complex, real>({{std::conj(alpha), &ops.M}, {complex(tau), &ops.Lt}});
    return {dense_complex_solver(Q), dense_complex_solver(QH), dense_real_solver(ops.M), dense_real_solver(ops.K_p),
            dense_real_solver(ops.M_p)};
}

std::vector<OseenBlockContext> build_oseen_contexts(const LevelOperators& levels, const TimeGrid& grid, double beta,
                                                    const InnerSettings& settings) {
    const CirculantSpectrum spec = circulant_spectrum(grid);
    const SharedOseenPlans shared = build_shared_oseen_plans(levels, settings);
    std::vector<OseenBlockContext> out;
    out.reserve(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
        out.emplace_back(levels.finest(), spec.d[j], grid.tau(), beta,
                         multigrid_oseen_solvers(levels, spec.d[j], grid.tau(), beta, shared, settings),
                         settings.uzawa_iters, settings.uzawa_mu);
    }
    return out;
}

BlockSolver oseen_block_solver(const std::vector<OseenBlockContext>& contexts, const InnerSettings& settings) {
    return [&contexts, settings](std::size_t j, std::span<const complex> r, std::span<complex> y) {
        return contexts[j].solve_nonlinear(r, y, settings.inner_tol, settings.inner_max_iters, settings.inner_restart);
    };
}

}  // namespace pintflow
