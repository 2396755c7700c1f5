#include "pintflow/precond/circulant_preconditioner.hpp"

#include <chrono>
#include <numeric>

#include "pintflow/time/circulant.hpp"

namespace pintflow {

double CirculantStats::average_inner() const {
    if (applications == 0 || inner_iterations.empty()) return 0.0;
    const long total = std::accumulate(inner_iterations.begin(), inner_iterations.end(), 0L);
    return static_cast<double>(total) / (static_cast<double>(applications) * static_cast<double>(inner_iterations.size()));
}

CirculantPreconditioner::CirculantPreconditioner(BlockLayout layout, BlockSolver solver, WorkerPool* pool)
    : layout_(layout), solver_(std::move(solver)), pool_(pool) {
    reset_stats();
}

void CirculantPreconditioner::reset_stats() {
    stats_ = CirculantStats{};
    stats_.inner_iterations.assign(layout_.blocks, 0);
}

BlockVector<complex> CirculantPreconditioner::solve_blocks(const BlockVector<complex>& rhat) {
    using clock = std::chrono::steady_clock;
    const std::size_t S = layout_.block_system_size();
    const std::vector<complex> rb = to_block_diagonal_order(rhat);
    std::vector<complex> yb(rb.size());
    std::vector<BlockSolveStats> per_block(layout_.blocks);

    const auto t0 = clock::now();
    block_parallel_for(pool_, layout_.blocks, [&](std::size_t j) {
        per_block[j] = solver_(j, std::span<const complex>(rb).subspan(j * S, S), std::span<complex>(yb).subspan(j * S, S));
    });
    stats_.block_seconds += std::chrono::duration<double>(clock::now() - t0).count();

    ++stats_.applications;
    for (std::size_t j = 0; j < layout_.blocks; ++j) {
        stats_.inner_iterations[j] += per_block[j].iterations;
        if (!per_block[j].converged) ++stats_.inner_failures;
    }
    return from_block_diagonal_order<complex>(layout_, yb);
}

void CirculantPreconditioner::apply_complex(const BlockVector<complex>& r, BlockVector<complex>& x) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    const BlockVector<complex> rhat = block_fft_forward(r);
    stats_.fft_seconds += std::chrono::duration<double>(clock::now() - t0).count();
    const BlockVector<complex> yhat = solve_blocks(rhat);
    t0 = clock::now();
    x = block_fft_inverse(yhat);
    stats_.fft_seconds += std::chrono::duration<double>(clock::now() - t0).count();
}

void CirculantPreconditioner::apply(const BlockVector<real>& r, BlockVector<real>& x) {
    using clock = std::chrono::steady_clock;
    if (!(r.layout() == layout_)) throw UsageError("CirculantPreconditioner: layout mismatch");
    auto t0 = clock::now();
    const BlockVector<complex> rhat = block_fft_forward(r);
    stats_.fft_seconds += std::chrono::duration<double>(clock::now() - t0).count();
    const BlockVector<complex> yhat = solve_blocks(rhat);
    t0 = clock::now();
    const BlockVector<complex> y = block_fft_inverse(yhat);
    stats_.fft_seconds += std::chrono::duration<double>(clock::now() - t0).count();

    if (!(x.layout() == layout_)) x = BlockVector<real>(layout_);
    double imag2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        x.data()[i] = y.data()[i].real();
        imag2 += y.data()[i].imag() * y.data()[i].imag();
    }
    const double rn = norm2(r.data());
    if (rn > 0.0) stats_.max_imag_ratio = std::max(stats_.max_imag_ratio, std::sqrt(imag2) / rn);
}

LinearOperator<real> CirculantPreconditioner::as_operator() {
    return [this](std::span<const real> in, std::span<real> out) {
        const BlockVector<real> r(layout_, std::vector<real>(in.begin(), in.end()));
        BlockVector<real> x(layout_);
        apply(r, x);
        std::copy(x.data().begin(), x.data().end(), out.begin());
    };
}

}  // namespace pintflow
