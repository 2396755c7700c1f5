#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pintflow/driver/parallel.hpp"
#include "pintflow/linalg/block_vector.hpp"
#include "pintflow/precond/block_system.hpp"

namespace pintflow {

/// Solves (approximately) G_j y = r for one Fourier block j; r and y are in
/// block order (v, lambda, p, mu).
using BlockSolver = std::function<BlockSolveStats(std::size_t j, std::span<const complex> r, std::span<complex> y)>;

struct CirculantStats {
    long applications = 0;
    std::vector<long> inner_iterations;  // per block, summed over applications
    long inner_failures = 0;
    double fft_seconds = 0.0;
    double block_seconds = 0.0;
    double max_imag_ratio = 0.0;  // max ||Im x|| / ||r|| of the back-transformed result

    /// Average inner iterations per block solve.
    double average_inner() const;
};

/// Block-circulant preconditioner: time FFT, permutation into independent
/// blocks, per-block solves on the worker pool, inverse permutation and FFT.
/// The block solver decides between the linear and the nonlinear variant.
class CirculantPreconditioner {
public:
    CirculantPreconditioner(BlockLayout layout, BlockSolver solver, WorkerPool* pool = nullptr);

    const BlockLayout& layout() const noexcept { return layout_; }
    void apply(const BlockVector<real>& r, BlockVector<real>& x);
    /// Complex input/output, no realness assumption (used by verification).
    void apply_complex(const BlockVector<complex>& r, BlockVector<complex>& x);

    LinearOperator<real> as_operator();

    const CirculantStats& stats() const noexcept { return stats_; }
    void reset_stats();

private:
    BlockVector<complex> solve_blocks(const BlockVector<complex>& rhat);

    BlockLayout layout_;
    BlockSolver solver_;
    WorkerPool* pool_;
    CirculantStats stats_;
};

}  // namespace pintflow
