#pragma once

#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/LU>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/sparse.hpp"
#include "pintflow/mesh/levels.hpp"

namespace pintflow {

struct MultigridConfig {
    int cycles = 4;
    int pre_sweeps = 2;
    int post_sweeps = 2;
    double omega = 1.0;

    void validate() const {
        if (cycles < 1) throw ConfigError("multigrid cycles must be >= 1");
        if (pre_sweeps < 0 || post_sweeps < 0) throw ConfigError("smoothing sweeps must be >= 0");
        if (!(omega > 0.0 && omega < 2.0)) throw ConfigError("SOR relaxation must lie in (0, 2)");
    }
};

/// One SOR sweep on A x = b, in place. forward = false runs the rows in
/// reverse order. omega = 1 is Gauss-Seidel.
template <class T, class X>
void sor_sweep(const SparseMatrix<T>& A, std::span<const X> b, std::span<X> x, double omega, bool forward) {
    const std::size_t n = A.rows();
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& va = A.values();
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t i = forward ? s : n - 1 - s;
        X sum = b[i];
        T diag{0};
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            if (ci[k] == i) {
                diag = va[k];
            } else {
                sum -= va[k] * x[ci[k]];
            }
        }
        x[i] = (1.0 - omega) * x[i] + omega * sum / diag;
    }
}

/// Geometric V-cycle multigrid, a fixed number of cycles from a zero guess.
/// Level 0 is the coarsest and is solved with a dense LU factorisation.
/// Pre-smoothing runs forward SOR sweeps, post-smoothing backward sweeps.
/// A single-level plan reduces to the exact dense solve.
template <class T>
class MultigridPlan {
public:
    using Dense = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using DenseVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    static constexpr std::size_t kMaxCoarseSize = 2000;

    MultigridPlan() = default;

    /// prolongations[l] maps level l to level l + 1.
    MultigridPlan(std::vector<SparseMatrix<T>> levels, std::vector<SparseMatrix<real>> prolongations,
                  MultigridConfig cfg)
        : A_(std::move(levels)), P_(std::move(prolongations)), cfg_(cfg) {
        cfg_.validate();
        if (A_.empty() || P_.size() + 1 != A_.size()) throw UsageError("MultigridPlan: level/transfer mismatch");
        for (std::size_t l = 0; l < P_.size(); ++l) {
            if (P_[l].rows() != A_[l + 1].rows() || P_[l].cols() != A_[l].rows()) {
                throw UsageError("MultigridPlan: transfer shape mismatch on level " + std::to_string(l));
            }
            R_.push_back(P_[l].transpose());
        }
        const auto nc = static_cast<Eigen::Index>(A_[0].rows());
        if (static_cast<std::size_t>(nc) > kMaxCoarseSize) throw ConfigError("MultigridPlan: coarse level too large");
        Dense D = Dense::Zero(nc, nc);
        for (const auto& t : A_[0].triplets()) {
            D(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
        }
        auto lu = std::make_shared<Eigen::FullPivLU<Dense>>(D);
        if (!lu->isInvertible()) {
            throw NumericalError("MultigridPlan: coarse matrix (" + std::to_string(nc) + " unknowns) is singular, rank " +
                                 std::to_string(lu->rank()));
        }
        coarse_ = std::move(lu);
    }

    std::size_t size() const { return A_.empty() ? 0 : A_.back().rows(); }
    std::size_t num_levels() const { return A_.size(); }
    const MultigridConfig& config() const { return cfg_; }
    const SparseMatrix<T>& level_matrix(std::size_t l) const { return A_[l]; }

    /// x = result of cfg.cycles V-cycles for A x = r from x = 0. A real plan
    /// also accepts complex vectors.
    template <class X>
    void apply(std::span<const X> r, std::span<X> x) const {
        const std::size_t n = size();
        if (r.size() != n || x.size() != n) throw UsageError("MultigridPlan::apply: size mismatch");
        std::fill(x.begin(), x.end(), X{0});
        const std::size_t top = A_.size() - 1;
        if (top == 0) {
            coarse_solve<X>(r, x);
            return;
        }
        for (int c = 0; c < cfg_.cycles; ++c) vcycle<X>(top, r, x);
    }

private:
    template <class X>
    void coarse_solve(std::span<const X> b, std::span<X> x) const {
        const auto n = static_cast<Eigen::Index>(b.size());
        if constexpr (std::is_same_v<T, X>) {
            DenseVec rhs(n);
            for (Eigen::Index i = 0; i < n; ++i) rhs(i) = b[static_cast<std::size_t>(i)];
            const DenseVec sol = coarse_->solve(rhs);
            for (Eigen::Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = sol(i);
        } else {
            static_assert(!is_complex_v<T> && is_complex_v<X>, "complex plan needs complex vectors");
            Eigen::MatrixXd rhs(n, 2);
            for (Eigen::Index i = 0; i < n; ++i) {
                rhs(i, 0) = b[static_cast<std::size_t>(i)].real();
                rhs(i, 1) = b[static_cast<std::size_t>(i)].imag();
            }
            const Eigen::MatrixXd sol = coarse_->solve(rhs);
            for (Eigen::Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = X(sol(i, 0), sol(i, 1));
        }
    }

    template <class X>
    void vcycle(std::size_t l, std::span<const X> b, std::span<X> x) const {
        if (l == 0) {
            coarse_solve<X>(b, x);
            return;
        }
        const SparseMatrix<T>& A = A_[l];
        for (int s = 0; s < cfg_.pre_sweeps; ++s) sor_sweep<T, X>(A, b, x, cfg_.omega, true);
        std::vector<X> res(A.rows());
        A.template multiply<X, X>(std::span<const X>(x.data(), x.size()), std::span<X>(res));
        for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
        std::vector<X> rc(A_[l - 1].rows()), xc(A_[l - 1].rows(), X{0});
        R_[l - 1].template multiply<X, X>(std::span<const X>(res), std::span<X>(rc));
        vcycle<X>(l - 1, rc, xc);
        P_[l - 1].template multiply_add<X, X>(1.0, std::span<const X>(xc), x);
        for (int s = 0; s < cfg_.post_sweeps; ++s) sor_sweep<T, X>(A, b, x, cfg_.omega, false);
    }

    std::vector<SparseMatrix<T>> A_;
    std::vector<SparseMatrix<real>> P_;
    std::vector<SparseMatrix<real>> R_;
    MultigridConfig cfg_{};
    std::shared_ptr<const Eigen::FullPivLU<Dense>> coarse_;
};

/// MG for the scalar velocity operator alpha M_s + gamma L_s, re-assembled on
/// every level with the same constants. Apply it per velocity component.
/// With transpose_convection the plan is for alpha M_s + gamma L_s^T.
template <class T>
MultigridPlan<T> velocity_multigrid(const LevelOperators& levels, T alpha, T gamma, const MultigridConfig& cfg,
                                    bool transpose_convection = false) {
    std::vector<SparseMatrix<T>> A;
    std::vector<SparseMatrix<real>> P;
    for (std::size_t l = 0; l < levels.num_levels(); ++l) {
        const auto& o = levels.ops[l];
        const SparseMatrix<real> Ls = linear_combination<real, real>({{o.nu, &o.K_s}, {transpose_convection ? -1.0 : 1.0, &o.N_s}});
        A.push_back(linear_combination<T, real>({{alpha, &o.M_s}, {gamma, &Ls}}));
        if (l + 1 < levels.num_levels()) P.push_back(levels.transfers[l].velocity);
    }
    return MultigridPlan<T>(std::move(A), std::move(P), cfg);
}

/// MG for the pinned pressure Laplacian K_p.
MultigridPlan<real> pressure_laplacian_multigrid(const LevelOperators& levels, const MultigridConfig& cfg);

/// Applies a scalar-space plan to both halves of a velocity vector.
template <class T, class X>
void apply_componentwise(const MultigridPlan<T>& plan, std::span<const X> r, std::span<X> x) {
    const std::size_t n = plan.size();
    if (r.size() != 2 * n || x.size() != 2 * n) throw UsageError("apply_componentwise: size mismatch");
    plan.apply(r.subspan(0, n), x.subspan(0, n));
    plan.apply(r.subspan(n, n), x.subspan(n, n));
}

}  // namespace pintflow
