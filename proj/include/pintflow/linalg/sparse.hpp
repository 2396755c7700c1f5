#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/scalar.hpp"

namespace pintflow {

template <class T>
struct Triplet {
    std::size_t row;
    std::size_t col;
    T value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing in
/// every row and no explicit zeros are stored once constructed through
/// from_triplets or the validating constructor.
template <class T>
class SparseMatrix {
public:
    using value_type = T;

    SparseMatrix() : row_ptr_(1, 0) {}

    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, std::vector<T> values)
        : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
          values_(std::move(values)) {
        if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
            row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
            throw UsageError("SparseMatrix: inconsistent CSR arrays");
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            if (row_ptr_[i] > row_ptr_[i + 1]) throw UsageError("SparseMatrix: row_ptr not monotone");
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_idx_[k] >= cols_) throw UsageError("SparseMatrix: column out of range");
                if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                    throw UsageError("SparseMatrix: columns not strictly increasing");
                }
            }
        }
    }

    /// Sums duplicates and drops entries that end up exactly zero.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<Triplet<T>> entries) {
        for (const auto& e : entries) {
            if (e.row >= rows || e.col >= cols) throw UsageError("from_triplets: index out of range");
        }
        std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<std::size_t> rp(rows + 1, 0);
        std::vector<std::size_t> ci;
        std::vector<T> vals;
        ci.reserve(entries.size());
        vals.reserve(entries.size());
        std::size_t k = 0;
        while (k < entries.size()) {
            const std::size_t r = entries[k].row;
            const std::size_t c = entries[k].col;
            T sum{};
            while (k < entries.size() && entries[k].row == r && entries[k].col == c) {
                sum += entries[k].value;
                ++k;
            }
            if (sum != T{}) {
                ci.push_back(c);
                vals.push_back(sum);
                ++rp[r + 1];
            }
        }
        std::partial_sum(rp.begin(), rp.end(), rp.begin());
        return SparseMatrix(rows, cols, std::move(rp), std::move(ci), std::move(vals));
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<std::size_t> rp(n + 1);
        std::iota(rp.begin(), rp.end(), std::size_t{0});
        std::vector<std::size_t> ci(n);
        std::iota(ci.begin(), ci.end(), std::size_t{0});
        return SparseMatrix(n, n, std::move(rp), std::move(ci), std::vector<T>(n, T{1}));
    }

    static SparseMatrix zero(std::size_t rows, std::size_t cols) {
        return SparseMatrix(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {});
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<T>& values() const noexcept { return values_; }

    /// y = A x. Real matrices may act on complex vectors.
    template <class X, class Y>
    void multiply(std::span<const X> x, std::span<Y> y) const {
        check_shapes(x.size(), y.size());
        for (std::size_t i = 0; i < rows_; ++i) {
            Y s{};
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
            y[i] = s;
        }
    }

    /// y += alpha A x
    template <class X, class Y, class A>
    void multiply_add(A alpha, std::span<const X> x, std::span<Y> y) const {
        check_shapes(x.size(), y.size());
        for (std::size_t i = 0; i < rows_; ++i) {
            Y s{};
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
            y[i] += alpha * s;
        }
    }

    T at(std::size_t i, std::size_t j) const {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return T{};
        return values_[static_cast<std::size_t>(it - col_idx_.begin())];
    }

    std::vector<T> diagonal() const {
        std::vector<T> d(std::min(rows_, cols_), T{});
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
        return d;
    }

    bool is_diagonal() const {
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_idx_[k] != i) return false;
            }
        }
        return true;
    }

    SparseMatrix transpose() const { return transposed(false); }

    /// Conjugate transpose; equals transpose() for real scalars.
    SparseMatrix adjoint() const { return transposed(true); }

    SparseMatrix scaled(T alpha) const {
        SparseMatrix out = *this;
        for (auto& v : out.values_) v *= alpha;
        return out;
    }

    template <class U>
    SparseMatrix<U> cast() const {
        return SparseMatrix<U>(rows_, cols_, row_ptr_, col_idx_,
                               std::vector<U>(values_.begin(), values_.end()));
    }

    /// Keeps the listed rows and columns (in the given order); used for
    /// Dirichlet elimination and pressure pinning.
    SparseMatrix submatrix(std::span<const std::size_t> keep_rows,
                           std::span<const std::size_t> keep_cols) const {
        std::vector<std::ptrdiff_t> col_map(cols_, -1);
        for (std::size_t k = 0; k < keep_cols.size(); ++k) {
            col_map[keep_cols[k]] = static_cast<std::ptrdiff_t>(k);
        }
        std::vector<Triplet<T>> t;
        for (std::size_t r = 0; r < keep_rows.size(); ++r) {
            const std::size_t i = keep_rows[r];
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                const auto c = col_map[col_idx_[k]];
                if (c >= 0) t.push_back({r, static_cast<std::size_t>(c), values_[k]});
            }
        }
        return from_triplets(keep_rows.size(), keep_cols.size(), std::move(t));
    }

    std::vector<Triplet<T>> triplets() const {
        std::vector<Triplet<T>> t;
        t.reserve(nnz());
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                t.push_back({i, col_idx_[k], values_[k]});
            }
        }
        return t;
    }

    /// Max absolute row sum.
    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(values_[k]);
            m = std::max(m, s);
        }
        return m;
    }

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_ptr_ == b.row_ptr_ &&
               a.col_idx_ == b.col_idx_ && a.values_ == b.values_;
    }

private:
    void check_shapes(std::size_t nx, std::size_t ny) const {
        if (nx != cols_ || ny != rows_) {
            throw UsageError("spmv: shape mismatch (" + std::to_string(rows_) + "x" +
                             std::to_string(cols_) + " matrix, x=" + std::to_string(nx) +
                             ", y=" + std::to_string(ny) + ")");
        }
    }

    SparseMatrix transposed(bool conjugate) const {
        std::vector<std::size_t> rp(cols_ + 1, 0);
        for (auto c : col_idx_) ++rp[c + 1];
        std::partial_sum(rp.begin(), rp.end(), rp.begin());
        std::vector<std::size_t> ci(nnz());
        std::vector<T> vals(nnz());
        std::vector<std::size_t> next(rp.begin(), rp.end() - 1);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                const std::size_t dst = next[col_idx_[k]]++;
                ci[dst] = i;
                vals[dst] = conjugate ? conj_if(values_[k]) : values_[k];
            }
        }
        return SparseMatrix(cols_, rows_, std::move(rp), std::move(ci), std::move(vals));
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<T> values_;
};

template <class T, class X>
auto spmv(const SparseMatrix<T>& A, std::span<const X> x) {
    using Y = decltype(T{} * X{});
    std::vector<Y> y(A.rows());
    A.template multiply<X, Y>(x, y);
    return y;
}

template <class T, class X>
auto spmv(const SparseMatrix<T>& A, const std::vector<X>& x) {
    return spmv(A, std::span<const X>(x));
}

/// sum_k coeff_k * A_k over the union sparsity pattern. All matrices must have
/// the same shape. The coefficient type decides the result scalar.
template <class T, class U>
SparseMatrix<T> linear_combination(const std::vector<std::pair<T, const SparseMatrix<U>*>>& terms) {
    if (terms.empty()) throw UsageError("linear_combination: no terms");
    const std::size_t rows = terms.front().second->rows();
    const std::size_t cols = terms.front().second->cols();
    std::vector<Triplet<T>> t;
    for (const auto& [coeff, A] : terms) {
        if (A->rows() != rows || A->cols() != cols) throw UsageError("linear_combination: shape mismatch");
        if (coeff == T{}) continue;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t k = A->row_ptr()[i]; k < A->row_ptr()[i + 1]; ++k) {
                t.push_back({i, A->col_idx()[k], coeff * T(A->values()[k])});
            }
        }
    }
    return SparseMatrix<T>::from_triplets(rows, cols, std::move(t));
}

/// Block diagonal with `copies` copies of A (I_copies ⊗ A).
template <class T>
SparseMatrix<T> block_diagonal_copies(const SparseMatrix<T>& A, std::size_t copies) {
    std::vector<Triplet<T>> t;
    t.reserve(A.nnz() * copies);
    for (std::size_t c = 0; c < copies; ++c) {
        for (const auto& e : A.triplets()) {
            t.push_back({c * A.rows() + e.row, c * A.cols() + e.col, e.value});
        }
    }
    return SparseMatrix<T>::from_triplets(A.rows() * copies, A.cols() * copies, std::move(t));
}

/// Horizontal concatenation [A_0, A_1, ...].
template <class T>
SparseMatrix<T> hstack(const std::vector<const SparseMatrix<T>*>& blocks) {
    std::vector<Triplet<T>> t;
    std::size_t offset = 0;
    const std::size_t rows = blocks.front()->rows();
    for (const auto* B : blocks) {
        if (B->rows() != rows) throw UsageError("hstack: row mismatch");
        for (const auto& e : B->triplets()) t.push_back({e.row, e.col + offset, e.value});
        offset += B->cols();
    }
    return SparseMatrix<T>::from_triplets(rows, offset, std::move(t));
}

}  // namespace pintflow
