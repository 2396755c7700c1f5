#include <doctest.h>

#include <functional>
#include <memory>

#include "pintflow/mesh/levels.hpp"
#include "pintflow/precond/circulant_preconditioner.hpp"
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

DiscreteOperators scalar_operators(double m, double l, double b) {
    DiscreteOperators o;
    o.n_v = 1;
    o.n_p = 1;
    const auto one = [](double v) { return SparseMatrix<real>::from_triplets(1, 1, std::vector<Triplet<real>>{{0, 0, v}}); };
    o.M = one(m);
    o.L = o.Lt = one(l);
    o.B = o.Bt = one(b);
    o.nu = 1.0;
    return o;
}

std::vector<complex> random_blocks_d(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0), v(-1.0, 1.0);
    std::vector<complex> d{0.0, 2.0};
    for (int k = 0; k < 3; ++k) d.emplace_back(u(rng), v(rng));
    return d;
}

/// Dense Schur approximation inverse (1 + c1) K_p^{-1} + nu c2 R M_full^{-1} R^T, where
/// R x = x_kept - x_0 maps full Q1 values to the pinned representation.
Eigen::MatrixXd schur_approx_inverse(const DiscreteOperators& o, const BlockConstants& c) {
    const Eigen::MatrixXd Kp = to_dense(o.K_p), Mf = to_dense(o.M_p_full);
    const auto np = static_cast<Eigen::Index>(o.n_p);
    Eigen::MatrixXd R(np, np + 1);
    for (Eigen::Index i = 0; i < np; ++i)
        for (Eigen::Index j = 0; j <= np; ++j) R(i, j) = (j == i + 1 ? 1.0 : 0.0) - (j == 0 ? 1.0 : 0.0);
    return (1.0 + c.c1) * Kp.inverse() + o.nu * c.c2 * R * Mf.inverse() * R.transpose();
}

/// Extreme eigenvalues of S_hat^{-1} B W^{-1} B^T.
std::pair<double, double> commutator_interval(const DiscreteOperators& o, const BlockConstants& c) {
    const Eigen::MatrixXd W = to_dense(linear_combination<real, real>({{1.0 + c.c1, &o.M}, {c.c2, &o.L}}));
    const Eigen::MatrixXd B = to_dense(o.B);
    Eigen::MatrixXd S = B * W.llt().solve(B.transpose());
    S = 0.5 * (S + S.transpose());
    Eigen::MatrixXd Shat = schur_approx_inverse(o, c).inverse();
    Shat = 0.5 * (Shat + Shat.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Shat);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

TEST_SUITE("precond_stokes") {
    TEST_CASE("block constants on simple inputs") {
        const auto c0 = block_constants(0.0, 1.0, 1.0);
        CHECK(c0.c1 == 0.0);
        CHECK(c0.c2 == doctest::Approx(1.0).epsilon(1e-15));
        const auto c2 = block_constants(2.0, 1.0, 1.0);
        CHECK(c2.c1 == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(c2.c2 == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(block_constants(complex(0.3, 0.7), 0.2, 1e-3).c2 == block_constants(complex(1.9, 0.7), 0.2, 1e-3).c2);
        CHECK_THROWS_AS(block_constants(1.0, 0.0, 1.0), ConfigError);
    }

    TEST_CASE("transforms on one-dimensional blocks match the hand-written pattern") {
        const auto o = scalar_operators(2.0, 3.0, 0.5);
        const complex d(0.4, -0.9);
        const double tau = 0.3, beta = 1e-2;
        const StokesBlockContext ctx(o, d, tau, beta, {});
        const double s = std::sqrt(tau), dc = d.imag(), c2 = ctx.constants().c2, c1 = ctx.constants().c1;
        const complex i(0.0, 1.0);
        Eigen::MatrixXcd Tl = Eigen::MatrixXcd::Zero(4, 4), Tr = Eigen::MatrixXcd::Zero(4, 4);
        Tl(0, 0) = s;
        Tl(1, 0) = dc / s * i;
        Tl(1, 1) = s / c2;
        Tl(2, 2) = s * c2;
        Tl(3, 2) = dc * c2 / s * i;
        Tl(3, 3) = s;
        Tr(0, 0) = s;
        Tr(0, 1) = -dc / s * i;
        Tr(1, 1) = s / c2;
        Tr(2, 2) = s * c2;
        Tr(2, 3) = -dc * c2 / s * i;
        Tr(3, 3) = s;
        CHECK(testing::max_abs(Eigen::MatrixXcd(dense_map(4, [&](auto x, auto y) { ctx.apply_Tl(x, y); }) - Tl)) <= 1e-15);
        CHECK(testing::max_abs(Eigen::MatrixXcd(dense_map(4, [&](auto x, auto y) { ctx.apply_Tr(x, y); }) - Tr)) <= 1e-15);

        Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(4, 4);
        const double X = c1 * 2.0 + c2 * 3.0;
        Z << 2.0, X, 0.0, 0.5, X, -2.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0;
        CHECK(testing::max_abs(Eigen::MatrixXcd(dense_map(4, [&](auto x, auto y) { ctx.apply_Z<complex>(x, y); }) - Z)) <= 1e-14);
    }

    TEST_CASE("real d gives diagonal transforms") {
        const auto o = scalar_operators(1.0, 1.0, 1.0);
        const StokesBlockContext ctx(o, 1.5, 0.25, 1e-3, {});
        const Eigen::MatrixXcd Tl = dense_map(4, [&](auto x, auto y) { ctx.apply_Tl(x, y); });
        const Eigen::MatrixXcd off = Tl - Eigen::MatrixXcd(Tl.diagonal().asDiagonal());
        CHECK(testing::max_abs(off) == 0.0);
        CHECK(Tl.imag().cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("transform inverses round trip") {
        const auto mesh = build_hierarchy(2, 2);
        const auto ops = assemble_operators(mesh, 2, 1e-2);
        const StokesBlockContext ctx(ops, complex(0.8, -1.1), 10.0 / 15.0, 1e-4, {});
        const auto r = testing::random_complex_vector(ctx.size(), 1);
        std::vector<complex> a(ctx.size()), b(ctx.size());
        ctx.apply_Tl_inv(r, a);
        ctx.apply_Tl(a, b);
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(b[i] - r[i]) <= 1e-13 * (1.0 + std::abs(r[i])));
        ctx.apply_Tr_inv(r, a);
        ctx.apply_Tr(a, b);
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(b[i] - r[i]) <= 1e-13 * (1.0 + std::abs(r[i])));
    }

    TEST_CASE("G = T_l Z T_r for random blocks at level 1") {
        const auto mesh = build_hierarchy(1, 1);
        const auto ops = assemble_operators(mesh, 1, 1.0);
        for (double beta : {1e-1, 1e-4}) {
            for (complex d : random_blocks_d(2)) {
                const double tau = 0.4;
                const StokesBlockContext ctx(ops, d, tau, beta, {});
                const std::size_t n = ctx.size();
                const Eigen::MatrixXcd G = testing::block_G_oracle(ops, d, tau, beta);
                const Eigen::MatrixXcd prod = dense_map(n, [&](auto x, auto y) { ctx.apply_Tl(x, y); }) *
                                              dense_map(n, [&](auto x, auto y) { ctx.apply_Z<complex>(x, y); }) *
                                              dense_map(n, [&](auto x, auto y) { ctx.apply_Tr(x, y); });
                CHECK(testing::max_abs(Eigen::MatrixXcd(prod - G)) <= 1e-10 * testing::max_abs(G));
                CHECK(testing::max_abs(Eigen::MatrixXcd(dense_map(n, [&](auto x, auto y) { ctx.apply_G(x, y); }) - G)) <=
                      1e-13 * testing::max_abs(G));
            }
        }
    }

    TEST_CASE("Z is real symmetric") {
        const auto mesh = build_hierarchy(2, 2);
        const auto ops = assemble_operators(mesh, 2, 1e-2);
        const StokesBlockContext ctx(ops, complex(1.2, 0.6), 0.5, 1e-3, {});
        const auto x = testing::random_vector(ctx.size(), 3), y = testing::random_vector(ctx.size(), 4);
        std::vector<double> Zx(ctx.size()), Zy(ctx.size());
        ctx.apply_Z<real>(x, Zx);
        ctx.apply_Z<real>(y, Zy);
        double a = 0.0, b = 0.0, s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            a += x[i] * Zy[i];
            b += y[i] * Zx[i];
            s += std::abs(x[i] * Zy[i]);
        }
        CHECK(std::abs(a - b) <= 1e-12 * s);
        const std::vector<double> zero(ctx.size(), 0.0);
        ctx.apply_Z<real>(zero, Zx);
        for (double v : Zx) CHECK(v == 0.0);
    }

    TEST_CASE("exact block-diagonal preconditioner: positive definite, block diagonal, bounded spectrum") {
        const auto mesh = build_hierarchy(1, 1);
        const auto ops = assemble_operators(mesh, 1, 1.0);
        const double lo = 1.0 / std::sqrt(12.0), hi = 0.5 * (1.0 + std::sqrt(5.0));
        for (double beta : {1e-1, 1e-3, 1e-4}) {
            for (complex d : random_blocks_d(5)) {
                const StokesBlockContext ctx(ops, d, 0.5, beta, {});
                const PhatExact P(ops, ctx.constants());
                const Eigen::MatrixXd Pd = P.dense();
                CHECK(testing::max_abs(Eigen::MatrixXd(Pd - Pd.transpose())) <= 1e-12 * testing::max_abs(Pd));
                CHECK(Eigen::LLT<Eigen::MatrixXd>(Pd).info() == Eigen::Success);

                const std::size_t n = ctx.size();
                const Eigen::MatrixXcd Z = dense_map(n, [&](auto x, auto y) { ctx.apply_Z<complex>(x, y); });
                const Eigen::MatrixXcd Pinv = dense_map(n, [&](auto x, auto y) { P.apply_inv(x, y); });
                for (complex ev : dense_eigs(DenseComplexMatrix(Pinv * Z))) {
                    CHECK(std::abs(ev) >= lo - 1e-8);
                    CHECK(std::abs(ev) <= hi + 1e-8);
                }
                // a vector supported on the lambda field stays there
                std::vector<complex> r(n, 0.0), y(n);
                for (std::size_t i = 0; i < ops.n_v; ++i) r[ops.n_v + i] = 1.0 + static_cast<double>(i);
                P.apply_inv(r, y);
                for (std::size_t i = 0; i < n; ++i) {
                    if (i < ops.n_v || i >= 2 * ops.n_v) CHECK(y[i] == complex(0.0));
                }
            }
        }
    }

    TEST_CASE("practical block preconditioner with exact inner solves is diag(W, W, S_hat, S_hat)^{-1}") {
        const auto mesh = build_hierarchy(1, 1);
        const auto ops = assemble_operators(mesh, 1, 1e-2);
        const complex d(0.6, 0.9);
        const double tau = 10.0 / 15.0, beta = 1e-3;
        const auto c = block_constants(d, tau, beta);
        const StokesBlockContext ctx(ops, d, tau, beta, exact_stokes_solvers(ops, c));
        const Eigen::MatrixXd W = to_dense(linear_combination<real, real>({{1.0 + c.c1, &ops.M}, {c.c2, &ops.L}}));
        const Eigen::MatrixXd Si = schur_approx_inverse(ops, c);
        const auto nv = static_cast<Eigen::Index>(ops.n_v), np = static_cast<Eigen::Index>(ops.n_p);
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2 * (nv + np), 2 * (nv + np));
        expect.block(0, 0, nv, nv) = W.inverse();
        expect.block(nv, nv, nv, nv) = W.inverse();
        expect.block(2 * nv, 2 * nv, np, np) = Si;
        expect.block(2 * nv + np, 2 * nv + np, np, np) = Si;
        const Eigen::MatrixXcd got = dense_map(ctx.size(), [&](auto x, auto y) { ctx.apply_Ptilde_inv(x, y); });
        CHECK(testing::max_abs(Eigen::MatrixXcd(got - expect.cast<complex>())) <= 1e-10 * testing::max_abs(expect));
    }

    TEST_CASE("production block preconditioner is linear") {
        const auto levels = build_level_operators(1, 3, 1e-2);
        const TimeGrid grid(15, 10.0);
        InnerSettings settings;
        const auto contexts = build_stokes_contexts(levels, grid, 1e-3, settings);
        const auto& ctx = contexts[3];
        const auto r1 = testing::random_complex_vector(ctx.size(), 5), r2 = testing::random_complex_vector(ctx.size(), 6);
        const complex a(1.5, -0.5);
        std::vector<complex> comb(ctx.size()), x1(ctx.size()), x2(ctx.size()), xc(ctx.size());
        for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = a * r1[i] + r2[i];
        ctx.solve_linear(r1, x1);
        ctx.solve_linear(r2, x2);
        ctx.solve_linear(comb, xc);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < comb.size(); ++i) {
            diff = std::max(diff, std::abs(xc[i] - a * x1[i] - x2[i]));
            scale = std::max(scale, std::abs(xc[i]));
        }
        CHECK(diff <= 1e-12 * scale);
    }

    TEST_CASE("commutator Schur approximation stays in a mesh-independent interval") {
        // Measured at levels 1-3 over the blocks of n_t = 15, T = 10, nu = 1e-2,
        // beta in {1e-1, 1e-3, 1e-4}, then frozen with a small margin.
        const double frozen_lo = 0.3, frozen_hi = 1.0;
        double lo = 1e300, hi = 0.0;
        for (int level = 1; level <= 3; ++level) {
            const auto mesh = build_hierarchy(level, level);
            const auto ops = assemble_operators(mesh, level, 1e-2);
            const TimeGrid grid(15, 10.0);
            const auto spec = circulant_spectrum(grid);
            for (double beta : {1e-1, 1e-3, 1e-4}) {
                for (std::size_t j = 0; j < spec.size(); j += 3) {
                    const auto [a, b] = commutator_interval(ops, block_constants(spec.d[j], grid.tau(), beta));
                    lo = std::min(lo, a);
                    hi = std::max(hi, b);
                }
            }
            MESSAGE("up to level " << level << ": eig(S_hat^{-1} S) in [" << lo << ", " << hi << "]");
        }
        CHECK(lo >= frozen_lo);
        CHECK(hi <= frozen_hi);
    }

    TEST_CASE("circulant preconditioner with exact block solves inverts the periodic matrix") {
        const auto mesh = build_hierarchy(1, 1);
        const auto ops = assemble_operators(mesh, 1, 1.0);
        const TimeGrid grid(6, 1.0);
        const double beta = 1e-2;
        const auto spec = circulant_spectrum(grid);
        auto lus = std::make_shared<std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>>>();
        for (complex d : spec.d) lus->emplace_back(testing::block_G_oracle(ops, d, grid.tau(), beta));
        const BlockSolver solver = [lus](std::size_t j, std::span<const complex> r, std::span<complex> y) {
            const Eigen::VectorXcd x =
                (*lus)[j].solve(Eigen::Map<const Eigen::VectorXcd>(r.data(), static_cast<Eigen::Index>(r.size())));
            std::copy(x.data(), x.data() + x.size(), y.begin());
            return BlockSolveStats{1, true};
        };
        const BlockLayout L{grid.blocks(), ops.n_v, ops.n_p};
        CirculantPreconditioner P(L, solver);
        const auto r = testing::random_vector(L.size(), 7);
        BlockVector<real> x(L);
        P.apply(BlockVector<real>(L, r), x);
        const Eigen::MatrixXd Pc = testing::kronecker_all_at_once(ops, grid.blocks(), grid.tau(), beta, true);
        const Eigen::VectorXd expect = Pc.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), Pc.rows()));
        double err = 0.0;
        for (Eigen::Index i = 0; i < expect.size(); ++i) err = std::max(err, std::abs(x.data()[static_cast<std::size_t>(i)] - expect(i)));
        CHECK(err <= 1e-10 * expect.cwiseAbs().maxCoeff());
        CHECK(P.stats().max_imag_ratio <= 1e-10);

        BlockVector<real> z(L);
        P.apply(BlockVector<real>(L), z);
        for (double v : z.data()) CHECK(v == 0.0);
    }

    TEST_CASE("linear all-at-once preconditioner: real output and GMRES count near 50") {
        const auto levels = build_level_operators(1, 3, 1e-2);
        const TimeGrid grid(15, 10.0);
        const double beta = 1e-3;
        InnerSettings settings;
        const auto contexts = build_stokes_contexts(levels, grid, beta, settings);
        const BlockLayout L{grid.blocks(), levels.finest().n_v, levels.finest().n_p};
        CirculantPreconditioner P(L, stokes_block_solver(contexts, StokesVariant::linear, settings));
        const AllAtOnceOperator A(levels.finest(), grid, beta);
        const auto prob = stokes_manufactured(beta, grid, 1e-2);
        const auto b = build_rhs(prob, levels.finest());
        const LinearOperator<real> Aop = [&](std::span<const real> x, std::span<real> y) {
            BlockVector<real> xv(L, std::vector<real>(x.begin(), x.end())), yv(L);
            A.apply(xv, yv);
            std::copy(yv.data().begin(), yv.data().end(), y.begin());
        };
        KrylovConfig cfg;
        cfg.tol = 1e-6;
        cfg.restart = 30;
        cfg.max_iters = 500;
        const auto res = gmres<real>(Aop, P.as_operator(), b.data(), cfg);
        MESSAGE("linear preconditioner, level 3, n_t 15, beta 1e-3: " << res.iterations << " GMRES iterations");
        CHECK(res.converged);
        CHECK(res.iterations >= 5);
        CHECK(res.iterations <= 500);
        CHECK(P.stats().max_imag_ratio <= 1e-10);
    }

    TEST_CASE("nonlinear preconditioner with a tight inner tolerance needs few outer iterations") {
        const auto levels = build_level_operators(1, 2, 1e-2);
        const TimeGrid grid(8, 10.0);
        const double beta = 1e-3;
        InnerSettings settings;
        settings.inner_tol = 1e-12;
        settings.inner_max_iters = 1000;
        settings.inner_restart = 200;
        const auto contexts = build_stokes_contexts(levels, grid, beta, settings);
        const BlockLayout L{grid.blocks(), levels.finest().n_v, levels.finest().n_p};
        CirculantPreconditioner P(L, stokes_block_solver(contexts, StokesVariant::nonlinear, settings));
        const AllAtOnceOperator A(levels.finest(), grid, beta);
        const auto b = build_rhs(stokes_manufactured(beta, grid, 1e-2), levels.finest());
        const LinearOperator<real> Aop = [&](std::span<const real> x, std::span<real> y) {
            BlockVector<real> xv(L, std::vector<real>(x.begin(), x.end())), yv(L);
            A.apply(xv, yv);
            std::copy(yv.data().begin(), yv.data().end(), y.begin());
        };
        KrylovConfig cfg;
        cfg.tol = 1e-6;
        cfg.restart = 10;
        const auto res = fgmres<real>(Aop, P.as_operator(), b.data(), cfg);
        CHECK(res.converged);
        CHECK(res.iterations <= 5);
        CHECK(P.stats().inner_failures == 0);

        P.reset_stats();
        BlockVector<real> z(L);
        P.apply(BlockVector<real>(L), z);
        for (double v : z.data()) CHECK(v == 0.0);
        long inner = 0;
        for (long k : P.stats().inner_iterations) inner += k;
        CHECK(inner == 0);
    }
}
