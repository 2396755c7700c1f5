#include "pintflow/spectra/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "pintflow/precond/stokes.hpp"

namespace pintflow {

namespace {

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> columns_of(const LinearOperator<T>& op, std::size_t n) {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    const auto nn = static_cast<Eigen::Index>(n);
    Mat D(nn, nn);
    std::vector<T> e(n, T{0}), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        e[k] = T{1};
        op(e, y);
        e[k] = T{0};
        for (std::size_t i = 0; i < n; ++i) D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = y[i];
    }
    return D;
}

/// Dense (P^{-1} X) for a circulant preconditioner, column by column.
DenseComplexMatrix precondition_columns(CirculantPreconditioner& P, const DenseMatrix& X) {
    const BlockLayout L = P.layout();
    const auto n = X.rows();
    DenseComplexMatrix out(n, X.cols());
    BlockVector<complex> r(L), y(L);
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i) r.data()[static_cast<std::size_t>(i)] = X(i, k);
        P.apply_complex(r, y);
        for (Eigen::Index i = 0; i < n; ++i) out(i, k) = y.data()[static_cast<std::size_t>(i)];
    }
    return out;
}

std::size_t count_abs_in(const std::vector<complex>& ev, double lo, double hi) {
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](complex z) {
        const double a = std::abs(z);
        return a >= lo && a <= hi;
    }));
}

}  // namespace

DenseMatrix dense_from_operator(const LinearOperator<real>& op, std::size_t n) { return columns_of<real>(op, n); }

DenseComplexMatrix dense_from_operator(const LinearOperator<complex>& op, std::size_t n) {
    return columns_of<complex>(op, n);
}

DenseMatrix dense_all_at_once(const AllAtOnceOperator& op) {
    const BlockLayout L = op.layout();
    if (L.size() > kDenseEigenLimit) throw UsageError("dense_all_at_once refused: system too large");
    const LinearOperator<real> f = [&](std::span<const real> x, std::span<real> y) {
        const BlockVector<real> xv(L, std::vector<real>(x.begin(), x.end()));
        const BlockVector<real> yv = op.apply(xv);
        std::copy(yv.data().begin(), yv.data().end(), y.begin());
    };
    return columns_of<real>(f, L.size());
}

DenseComplexMatrix dense_block_G(const DiscreteOperators& ops, complex d, double tau, double beta) {
    const LinearOperator<complex> f = [&](std::span<const complex> x, std::span<complex> y) {
        apply_block_G(ops, d, tau, beta, x, y);
    };
    return columns_of<complex>(f, 2 * (ops.n_v + ops.n_p));
}

BlockSolver exact_block_solver(const DiscreteOperators& ops, const CirculantSpectrum& spectrum, double tau,
                               double beta) {
    auto lus = std::make_shared<std::vector<Eigen::PartialPivLU<DenseComplexMatrix>>>();
    for (std::size_t j = 0; j < spectrum.size(); ++j) lus->emplace_back(dense_block_G(ops, spectrum.d[j], tau, beta));
    return [lus](std::size_t j, std::span<const complex> r, std::span<complex> y) {
        const auto n = static_cast<Eigen::Index>(r.size());
        const Eigen::Map<const Eigen::VectorXcd> rv(r.data(), n);
        Eigen::Map<Eigen::VectorXcd>(y.data(), n) = (*lus)[j].solve(rv);
        return BlockSolveStats{1, true};
    };
}

BlockBounds measure_block_bounds(const DiscreteOperators& ops, const CirculantSpectrum& spectrum, double tau,
                                 double beta) {
    BlockBounds out;
    out.a_hat = std::numeric_limits<double>::infinity();
    out.b_hat = 0.0;
    out.c = 1.0;
    out.d = 1.0;
    const DenseMatrix Bd = to_dense(ops.B);
    const DenseMatrix Kp = to_dense(ops.K_p);
    const Eigen::PartialPivLU<DenseMatrix> Kp_lu(Kp);
    const auto np = static_cast<Eigen::Index>(ops.n_p);
    const DenseMatrix Kp_inv = Kp_lu.solve(DenseMatrix::Identity(np, np));
    const DenseMatrix Mp_inv = pinned_quotient_inverse(to_dense(ops.M_p_full));

    for (std::size_t j = 0; j < spectrum.size(); ++j) {
        const BlockConstants c = block_constants(spectrum.d[j], tau, beta);
        const StokesBlockContext ctx(ops, spectrum.d[j], tau, beta, StokesInnerSolvers{});
        const LinearOperator<real> z = [&](std::span<const real> x, std::span<real> y) { ctx.apply_Z<real>(x, y); };
        const DenseMatrix Z = columns_of<real>(z, ctx.size());
        const PhatExact phat(ops, c);
        const DenseMatrix P = phat.dense();
        const DenseMatrix PinvZ = P.llt().solve(Z);
        for (complex ev : dense_eigs(PinvZ)) {
            out.a_hat = std::min(out.a_hat, std::abs(ev));
            out.b_hat = std::max(out.b_hat, std::abs(ev));
        }

        const DenseMatrix W = to_dense(linear_combination<real, real>({{1.0 + c.c1, &ops.M}, {c.c2, &ops.L}}));
        const DenseMatrix S = Bd * W.llt().solve(Bd.transpose());
        const DenseMatrix Shat_inv = (1.0 + c.c1) * Kp_inv + ops.nu * c.c2 * Mp_inv;
        for (complex ev : dense_eigs(DenseMatrix(Shat_inv * S))) {
            out.c = std::min(out.c, ev.real());
            out.d = std::max(out.d, ev.real());
        }
    }
    return out;
}

SpectralSummary verify_eigenvalue_counts(const DiscreteOperators& ops, const TimeGrid& grid, double beta,
                                      PreconditionedSpectra* spectra) {
    if (ops.has_wind) throw UsageError("verify_eigenvalue_counts: Stokes operators expected");
    const double tau = grid.tau();
    const CirculantSpectrum spec = circulant_spectrum(grid);
    const AllAtOnceOperator A_op(ops, grid, beta, false), PC_op(ops, grid, beta, true);
    const BlockLayout L = A_op.layout();
    if (L.size() > kDenseEigenLimit) throw UsageError("verify_eigenvalue_counts refused: system too large");

    SpectralSummary s;
    s.n_t = grid.n_t;
    s.beta = beta;
    s.n_v = ops.n_v;
    s.n_p = ops.n_p;
    s.N = L.size();
    s.bounds = measure_block_bounds(ops, spec, tau, beta);

    const DenseMatrix A = dense_all_at_once(A_op);
    const DenseMatrix PC = dense_all_at_once(PC_op);

    CirculantPreconditioner exact(L, exact_block_solver(ops, spec, tau, beta));

    std::vector<StokesBlockContext> ctx;
    std::vector<std::shared_ptr<const PhatExact>> phat;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const BlockConstants c = block_constants(spec.d[j], tau, beta);
        ctx.emplace_back(ops, spec.d[j], tau, beta, exact_stokes_solvers(ops, c));
        phat.push_back(std::make_shared<const PhatExact>(ops, c));
    }
    CirculantPreconditioner hat(L, [&](std::size_t j, std::span<const complex> r, std::span<complex> y) {
        std::vector<complex> a(r.size()), b(r.size());
        ctx[j].apply_Tl_inv(r, a);
        phat[j]->apply_inv(a, b);
        ctx[j].apply_Tr_inv(b, y);
        return BlockSolveStats{1, true};
    });
    CirculantPreconditioner tilde(L, [&](std::size_t j, std::span<const complex> r, std::span<complex> y) {
        return ctx[j].solve_linear(r, y);
    });

    PreconditionedSpectra local;
    PreconditionedSpectra& sp = spectra ? *spectra : local;
    sp.PC_A = dense_eigs(precondition_columns(exact, A));
    sp.Phat_A = dense_eigs(precondition_columns(hat, A));
    sp.Ptilde_PC = dense_eigs(precondition_columns(tilde, PC));
    sp.Ptilde_A = dense_eigs(precondition_columns(tilde, A));

    s.unit_count = static_cast<std::size_t>(std::count_if(sp.PC_A.begin(), sp.PC_A.end(),
                                                          [&](complex z) { return std::abs(z - 1.0) < s.unit_tol; }));
    s.unit_bound = s.N - 2 * s.n_v;

    const BlockBounds& b = s.bounds;
    s.phat_count = count_abs_in(sp.Phat_A, b.a_hat - s.interval_tol, b.b_hat + s.interval_tol);
    s.phat_bound = s.N - 4 * s.n_v;
    const double lo = b.a_hat * b.c, hi = b.b_hat * b.d;
    s.ptilde_count = count_abs_in(sp.Ptilde_A, lo - s.interval_tol, hi + s.interval_tol);
    s.ptilde_bound = s.N - 4 * s.n_v;

    s.product_min = std::numeric_limits<double>::infinity();
    s.product_max = 0.0;
    for (complex z : sp.Ptilde_PC) {
        s.product_min = std::min(s.product_min, std::abs(z));
        s.product_max = std::max(s.product_max, std::abs(z));
    }
    s.product_inside = s.product_min >= lo - s.product_tol && s.product_max <= hi + s.product_tol;

    s.unit_fraction = static_cast<double>(s.unit_count) / static_cast<double>(s.N);
    s.unit_fraction_threshold = 1.0 - 1.0 / static_cast<double>(grid.blocks()) -
                                2.0 * static_cast<double>(s.n_v) / static_cast<double>(s.N);
    return s;
}

void write_spectra_csv(const std::string& path, const PreconditionedSpectra& spectra) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.precision(17);
    out << "operator,index,real,imag,abs\n";
    auto emit = [&](const char* name, const std::vector<complex>& ev) {
        for (std::size_t i = 0; i < ev.size(); ++i) {
            out << name << ',' << i << ',' << ev[i].real() << ',' << ev[i].imag() << ',' << std::abs(ev[i]) << '\n';
        }
    };
    emit("PC_inv_A", spectra.PC_A);
    emit("Phat_inv_A", spectra.Phat_A);
    emit("Ptilde_inv_PC", spectra.Ptilde_PC);
    emit("Ptilde_inv_A", spectra.Ptilde_A);
}

}  // namespace pintflow
