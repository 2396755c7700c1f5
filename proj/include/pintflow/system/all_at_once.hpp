#pragma once

#include <span>

#include "pintflow/linalg/block_vector.hpp"
#include "pintflow/mesh/fem.hpp"
#include "pintflow/time/circulant.hpp"

namespace pintflow {

/// Matrix-free all-at-once optimality system for the interior time points.
/// With x = (v, p, lambda, mu) in field-major order, block j of each row is
///   v-row:      tau M v_j + M (lambda_j - lambda_{j+1}) + tau L^T lambda_j + tau B^T mu_j
///   p-row:      tau B lambda_j
///   lambda-row: M (v_j - v_{j-1}) + tau L v_j + tau B^T p_j - (tau/beta) M lambda_j
///   mu-row:     tau B v_j
/// with v_{-1} = lambda_{n} = 0. The periodic variant wraps the time shifts
/// cyclically, which replaces the backward-Euler difference matrix E by the
/// circulant C and gives the preconditioner P_C.
class AllAtOnceOperator {
public:
    AllAtOnceOperator(const DiscreteOperators& ops, TimeGrid grid, double beta, bool periodic = false);

    const DiscreteOperators& ops() const noexcept { return *ops_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    double beta() const noexcept { return beta_; }
    bool periodic() const noexcept { return periodic_; }
    BlockLayout layout() const { return {grid_.blocks(), ops_->n_v, ops_->n_p}; }

    template <class T>
    void apply(const BlockVector<T>& x, BlockVector<T>& y) const;

    template <class T>
    BlockVector<T> apply(const BlockVector<T>& x) const {
        BlockVector<T> y(layout());
        apply(x, y);
        return y;
    }

private:
    const DiscreteOperators* ops_;
    TimeGrid grid_;
    double beta_;
    bool periodic_;
};

template <class T>
void AllAtOnceOperator::apply(const BlockVector<T>& x, BlockVector<T>& y) const {
    const BlockLayout L = layout();
    if (!(x.layout() == L) || !(y.layout() == L)) throw UsageError("AllAtOnceOperator::apply: layout mismatch");
    const DiscreteOperators& o = *ops_;
    const double tau = grid_.tau();
    const std::size_t n = L.blocks;
    std::vector<T> diff(L.nv);

    for (std::size_t j = 0; j < n; ++j) {
        const auto vj = x.block(Field::v, j);
        const auto pj = x.block(Field::p, j);
        const auto lj = x.block(Field::lambda, j);
        const auto mj = x.block(Field::mu, j);

        // v-row
        {
            auto out = y.block(Field::v, j);
            const bool has_next = (j + 1 < n) || periodic_;
            const auto lnext = x.block(Field::lambda, (j + 1) % n);
            for (std::size_t i = 0; i < L.nv; ++i) diff[i] = lj[i] - (has_next ? lnext[i] : T{0});
            o.M.multiply<T, T>(std::span<const T>(diff), out);
            o.M.multiply_add<T, T>(tau, vj, out);
            o.Lt.multiply_add<T, T>(tau, lj, out);
            o.Bt.multiply_add<T, T>(tau, mj, out);
        }
        // p-row
        {
            auto out = y.block(Field::p, j);
            o.B.multiply<T, T>(lj, out);
            for (auto& v : out) v *= tau;
        }
        // lambda-row
        {
            auto out = y.block(Field::lambda, j);
            const bool has_prev = (j > 0) || periodic_;
            const auto vprev = x.block(Field::v, (j + n - 1) % n);
            for (std::size_t i = 0; i < L.nv; ++i) diff[i] = vj[i] - (has_prev ? vprev[i] : T{0});
            o.M.multiply<T, T>(std::span<const T>(diff), out);
            o.L.multiply_add<T, T>(tau, vj, out);
            o.Bt.multiply_add<T, T>(tau, pj, out);
            o.M.multiply_add<T, T>(-tau / beta_, lj, out);
        }
        // mu-row
        {
            auto out = y.block(Field::mu, j);
            o.B.multiply<T, T>(vj, out);
            for (auto& v : out) v *= tau;
        }
    }
}

}  // namespace pintflow
