#include <doctest.h>

#include <functional>

#include "pintflow/mesh/levels.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
#include "pintflow/precond/oseen.hpp"
#include "pintflow/precond/stokes.hpp"
#include "pintflow/system/all_at_once.hpp"
#include "pintflow/system/problem.hpp"
#include "support.hpp"

using namespace pintflow;

namespace {

using SpanMap = std::function<void(std::span<const complex>, std::span<complex>)>;

Eigen::MatrixXcd dense_map(std::size_t n, const SpanMap& f) {
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd D(N, N);
    std::vector<complex> e(n), y(n);
    for (Eigen::Index c = 0; c < N; ++c) {
        std::fill(e.begin(), e.end(), complex{0.0});
        e[static_cast<std::size_t>(c)] = 1.0;
        f(e, y);
        for (Eigen::Index r = 0; r < N; ++r) D(r, c) = y[static_cast<std::size_t>(r)];
    }
    return D;
}

/// Applies a map on two stacked halves of equal size.
SpanMap stacked(std::size_t half, std::function<void(std::span<const complex>, std::span<const complex>,
                                                      std::span<complex>, std::span<complex>)> f) {
    return [half, f](std::span<const complex> x, std::span<complex> y) {
        f(x.first(half), x.subspan(half), y.first(half), y.subspan(half));
    };
}

Eigen::MatrixXcd dense_c(const SparseMatrix<real>& A) { return to_dense(A).cast<complex>(); }

/// Velocity-adjoint block [[tau M, K^H], [K, -(tau/beta) M]] with K = d M + tau L.
Eigen::MatrixXcd dense_G11(const DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd M = dense_c(o.M), K = d * M + tau * dense_c(o.L);
    const auto n = static_cast<Eigen::Index>(o.n_v);
    Eigen::MatrixXcd G(2 * n, 2 * n);
    G << tau * M, K.adjoint(), K, -(tau / beta) * M;
    return G;
}

/// Negated Schur complement (1/tau) K M^{-1} K^H + (tau/beta) M of the velocity-adjoint block.
Eigen::MatrixXcd dense_S11(const DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd M = dense_c(o.M), K = d * M + tau * dense_c(o.L);
    return K * M.partialPivLu().solve(K.adjoint()) / tau + (tau / beta) * M;
}

/// Matching approximation (1/tau) Q M^{-1} Q^H with Q = K + (tau/sqrt(beta)) M.
Eigen::MatrixXcd dense_S11_hat(const DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd M = dense_c(o.M);
    const Eigen::MatrixXcd Q = (d + tau / std::sqrt(beta)) * M + tau * dense_c(o.L);
    return Q * M.partialPivLu().solve(Q.adjoint()) / tau;
}

/// Pressure Schur approximation inverse assembled from its three factors.
Eigen::MatrixXcd dense_schur_inv(const DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd Mp = dense_c(o.M_p), Kp = dense_c(o.K_p), Lp = dense_c(o.L_p);
    const auto n = static_cast<Eigen::Index>(o.n_p);
    const Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd AM(2 * n, 2 * n), AK(2 * n, 2 * n), mid(2 * n, 2 * n);
    AM << Z, tau * Mp, tau * Mp, Z;
    AK << Z, tau * Kp, tau * Kp, Z;
    mid << tau * Mp, std::conj(d) * Mp + tau * Lp.transpose(), d * Mp + tau * Lp, -(tau / beta) * Mp;
    return AK.inverse() * mid * AM.inverse();
}

/// B_21 G11^{-1} B_12 for the pressure rows of G_j, the quantity the pressure
/// Schur approximation stands for.
Eigen::MatrixXcd dense_pressure_schur(const DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd G = testing::block_G_oracle(o, d, tau, beta);
    const auto nv2 = static_cast<Eigen::Index>(2 * o.n_v), np2 = static_cast<Eigen::Index>(2 * o.n_p);
    const Eigen::MatrixXcd A = G.topLeftCorner(nv2, nv2);
    return G.bottomLeftCorner(np2, nv2) * A.partialPivLu().solve(G.topRightCorner(nv2, np2));
}

std::vector<complex> sample_d(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0), v(-1.0, 1.0);
    std::vector<complex> d{0.0, 2.0};
    for (int k = 0; k < 3; ++k) d.emplace_back(u(rng), v(rng));
    return d;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& X) {
    return Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(X, false).eigenvalues();
}

Eigen::VectorXcd as_eigen(const std::vector<complex>& v) {
    return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_SUITE("precond_oseen") {
    TEST_CASE("context validation") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        CHECK_THROWS_AS(OseenBlockContext(ops, 1.0, 0.1, 1e-3, {}, 0), ConfigError);
        CHECK_THROWS_AS(OseenBlockContext(ops, 1.0, 0.1, 1e-3, {}, 6, 2.0), ConfigError);
        CHECK_THROWS_AS(OseenBlockContext(ops, 1.0, 0.1, 1e-3, {}, 6, 0.0), ConfigError);
        CHECK_THROWS_AS(OseenBlockContext(ops, 1.0, 0.0, 1e-3, {}), ConfigError);
    }

    TEST_CASE("velocity-adjoint Schur approximation matches its dense form") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        const double tau = 10.0 / 15.0, beta = 1e-3;
        for (complex d : sample_d(3)) {
            const OseenBlockContext ctx(ops, d, tau, beta, exact_oseen_solvers(ops, d, tau, beta));
            const Eigen::MatrixXcd got =
                dense_map(ops.n_v, [&](auto r, auto y) { ctx.apply_S11_inv(r, y); });
            const Eigen::MatrixXcd expect = dense_S11_hat(ops, d, tau, beta).inverse();
            CHECK(testing::max_abs(Eigen::MatrixXcd(got - expect)) <= 1e-10 * testing::max_abs(expect));
        }
    }

    TEST_CASE("velocity-adjoint Schur approximation spectrum lies in [1/2, 1]") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        const double tau = 10.0 / 15.0;
        double lo = 1e300, hi = 0.0, im = 0.0;
        for (double beta : {1e-1, 1e-3, 1e-4})
            for (complex d : sample_d(5)) {
                const Eigen::MatrixXcd X =
                    dense_S11_hat(ops, d, tau, beta).partialPivLu().solve(dense_S11(ops, d, tau, beta));
                for (complex ev : eigenvalues(X)) {
                    lo = std::min(lo, ev.real());
                    hi = std::max(hi, ev.real());
                    im = std::max(im, std::abs(ev.imag()));
                }
            }
        MESSAGE("eig(S_hat^{-1} S) in [" << lo << ", " << hi << "], max |imag| " << im);
        CHECK(lo >= 0.5 - 1e-8);
        CHECK(hi <= 1.0 + 1e-8);
        CHECK(im <= 1e-8);
    }

    TEST_CASE("Uzawa with exact inner solves converges to the velocity-adjoint solve") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        const double tau = 10.0 / 15.0, beta = 1e-3;
        const std::size_t n = ops.n_v;
        for (complex d : sample_d(7)) {
            const OseenBlockContext ctx(ops, d, tau, beta, exact_oseen_solvers(ops, d, tau, beta));
            const auto b = testing::random_complex_vector(2 * n, 8);
            const Eigen::VectorXcd x = dense_G11(ops, d, tau, beta).partialPivLu().solve(as_eigen(b));
            const std::span<const complex> bs(b);
            std::vector<complex> x1(n), x2(n);

            ctx.apply_P11_uzawa(bs.first(n), bs.subspan(n), x1, x2, 50);
            Eigen::VectorXcd got(2 * n);
            got << as_eigen(x1), as_eigen(x2);
            CHECK((got - x).norm() <= 1e-6 * x.norm());

            ctx.apply_P11_uzawa(bs.first(n), bs.subspan(n), x1, x2, 6);
            got << as_eigen(x1), as_eigen(x2);
            CHECK((got - x).norm() <= 0.5 * x.norm());
        }
    }

    TEST_CASE("pressure Schur approximation matches its factored dense form") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        const double tau = 0.2, beta = 1e-3;
        for (complex d : sample_d(9)) {
            const OseenBlockContext ctx(ops, d, tau, beta, exact_oseen_solvers(ops, d, tau, beta));
            const Eigen::MatrixXcd got =
                dense_map(2 * ops.n_p, stacked(ops.n_p, [&](auto a, auto b, auto c, auto e) { ctx.apply_schur_inv(a, b, c, e); }));
            const Eigen::MatrixXcd expect = dense_schur_inv(ops, d, tau, beta);
            CHECK(testing::max_abs(Eigen::MatrixXcd(got - expect)) <= 1e-10 * testing::max_abs(expect));
        }
    }

    TEST_CASE("pressure Schur approximation spectrum with and without wind") {
        // Measured at levels 1-2 over the blocks of n_t = 15, T = 10, nu = 1e-2,
        // beta in {1e-1, 1e-3, 1e-4}, then frozen with a small margin.
        const double frozen_lo = 0.35, frozen_hi = 1.0;
        for (bool wind : {false, true}) {
            double lo = 1e300, hi = 0.0;
            for (int level = 1; level <= 2; ++level) {
                const auto ops = assemble_operators(build_hierarchy(level, level), level, 1e-2,
                                                    wind ? VectorField(cavity_wind) : VectorField{});
                const TimeGrid grid(15, 10.0);
                const auto spec = circulant_spectrum(grid);
                for (double beta : {1e-1, 1e-3, 1e-4})
                    for (std::size_t j = 0; j < spec.size(); j += 3) {
                        const Eigen::MatrixXcd X = dense_schur_inv(ops, spec.d[j], grid.tau(), beta) *
                                                   dense_pressure_schur(ops, spec.d[j], grid.tau(), beta);
                        for (complex ev : eigenvalues(X)) {
                            lo = std::min(lo, std::abs(ev));
                            hi = std::max(hi, std::abs(ev));
                        }
                    }
            }
            MESSAGE(std::string(wind ? "wind" : "no wind") << ": |eig(S_hat^{-1} S)| in [" << lo << ", " << hi << "]");
            CHECK(lo >= frozen_lo);
            CHECK(hi <= frozen_hi);
        }
    }

    TEST_CASE("block preconditioner with exact inner solves clusters the spectrum") {
        const auto ops = assemble_operators(build_hierarchy(1, 1), 1, 1e-2, cavity_wind);
        const double tau = 10.0 / 15.0;
        // Measured over beta in {1e-1, 1e-3, 1e-4} and five shifts at level 1, then frozen.
        const double frozen_lo = 0.4, frozen_hi = 1.0 + 1e-6;
        double lo = 1e300, hi = 0.0;
        for (double beta : {1e-1, 1e-3, 1e-4})
            for (complex d : sample_d(11)) {
                const OseenBlockContext ctx(ops, d, tau, beta, exact_oseen_solvers(ops, d, tau, beta), 50);
                const Eigen::MatrixXcd P = dense_map(ctx.size(), [&](auto r, auto y) { ctx.apply_Puz_inv(r, y); });
                const Eigen::MatrixXcd G = dense_map(ctx.size(), [&](auto r, auto y) { ctx.apply_G(r, y); });
                for (complex ev : eigenvalues(P * G)) {
                    lo = std::min(lo, std::abs(ev));
                    hi = std::max(hi, std::abs(ev));
                }
            }
        MESSAGE("|eig(P_uz^{-1} G)| in [" << lo << ", " << hi << "]");
        CHECK(lo >= frozen_lo);
        CHECK(hi <= frozen_hi);
    }

    TEST_CASE("production block preconditioner is linear and maps zero to zero") {
        const auto levels = build_level_operators(1, 2, 1e-2, cavity_wind);
        const TimeGrid grid(15, 10.0);
        InnerSettings settings;
        const auto contexts = build_oseen_contexts(levels, grid, 1e-3, settings);
        const auto& ctx = contexts[4];
        const std::size_t n = ctx.size();
        const auto r1 = testing::random_complex_vector(n, 12), r2 = testing::random_complex_vector(n, 13);
        const complex a(0.3, -1.7);
        std::vector<complex> comb(n), y1(n), y2(n), yc(n), z(n);
        for (std::size_t i = 0; i < n; ++i) comb[i] = a * r1[i] + r2[i];
        ctx.apply_Puz_inv(r1, y1);
        ctx.apply_Puz_inv(r2, y2);
        ctx.apply_Puz_inv(comb, yc);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(yc[i] - a * y1[i] - y2[i]));
            scale = std::max(scale, std::abs(yc[i]));
        }
        CHECK(diff <= 1e-12 * scale);
        ctx.apply_Puz_inv(std::vector<complex>(n), z);
        for (complex v : z) CHECK(v == complex{0.0});
    }

    TEST_CASE("without wind the Oseen path solves the Stokes system") {
        const auto levels = build_level_operators(1, 2, 1e-2);
        const TimeGrid grid(8, 10.0);
        const double beta = 1e-3;
        InnerSettings settings;
        const BlockLayout L{grid.blocks(), levels.finest().n_v, levels.finest().n_p};
        const AllAtOnceOperator A(levels.finest(), grid, beta);
        const auto b = build_rhs(stokes_manufactured(beta, grid, 1e-2), levels.finest());
        const LinearOperator<real> Aop = [&](std::span<const real> x, std::span<real> y) {
            BlockVector<real> xv(L, std::vector<real>(x.begin(), x.end())), yv(L);
            A.apply(xv, yv);
            std::copy(yv.data().begin(), yv.data().end(), y.begin());
        };
        KrylovConfig cfg;
        cfg.tol = 1e-9;
        cfg.restart = 10;
        cfg.max_iters = 100;

        const auto oseen = build_oseen_contexts(levels, grid, beta, settings);
        CirculantPreconditioner Po(L, oseen_block_solver(oseen, settings));
        const auto xo = fgmres<real>(Aop, Po.as_operator(), b.data(), cfg);
        const auto stokes = build_stokes_contexts(levels, grid, beta, settings);
        CirculantPreconditioner Ps(L, stokes_block_solver(stokes, StokesVariant::nonlinear, settings));
        const auto xs = fgmres<real>(Aop, Ps.as_operator(), b.data(), cfg);
        MESSAGE("outer iterations: Oseen path " << xo.iterations << ", Stokes path " << xs.iterations);
        REQUIRE(xo.converged);
        REQUIRE(xs.converged);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < xo.x.size(); ++i) {
            diff = std::max(diff, std::abs(xo.x[i] - xs.x[i]));
            scale = std::max(scale, std::abs(xs.x[i]));
        }
        MESSAGE("max difference " << diff / scale << " relative");
        CHECK(diff <= 1e-5 * scale);
    }

    TEST_CASE("nonlinear Oseen preconditioner on the cavity problem") {
        const auto levels = build_level_operators(1, 2, 1e-2, cavity_wind);
        const TimeGrid grid(15, 10.0);
        const double beta = 1e-3;
        InnerSettings settings;
        const BlockLayout L{grid.blocks(), levels.finest().n_v, levels.finest().n_p};
        const AllAtOnceOperator A(levels.finest(), grid, beta);
        const auto b = build_rhs(oseen_cavity(beta, grid), levels.finest());
        const LinearOperator<real> Aop = [&](std::span<const real> x, std::span<real> y) {
            BlockVector<real> xv(L, std::vector<real>(x.begin(), x.end())), yv(L);
            A.apply(xv, yv);
            std::copy(yv.data().begin(), yv.data().end(), y.begin());
        };
        KrylovConfig cfg;
        cfg.tol = 1e-6;
        cfg.restart = 10;
        const auto contexts = build_oseen_contexts(levels, grid, beta, settings);
        CirculantPreconditioner P(L, oseen_block_solver(contexts, settings));
        const auto res = fgmres<real>(Aop, P.as_operator(), b.data(), cfg);
        MESSAGE("level 2, n_t 15: " << res.iterations << " outer, " << P.stats().average_inner() << " inner on average");
        CHECK(res.converged);
        CHECK(res.iterations <= 6);
        CHECK(P.stats().inner_failures == 0);
        CHECK(P.stats().max_imag_ratio <= 1e-10);
    }
}
