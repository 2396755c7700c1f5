#include "pintflow/inner/dense_solver.hpp"

#include <memory>

#include "pintflow/linalg/dense.hpp"

namespace pintflow {

LinearOperator<complex> dense_real_solver(const SparseMatrix<real>& A) {
    if (A.rows() > kDenseEigenLimit) throw UsageError("dense solver refused: matrix too large");
    auto lu = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(to_dense(A));
    const auto n = static_cast<Eigen::Index>(A.rows());
    return [lu, n](std::span<const complex> r, std::span<complex> y) {
        Eigen::MatrixXd rhs(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            rhs(i, 0) = r[static_cast<std::size_t>(i)].real();
            rhs(i, 1) = r[static_cast<std::size_t>(i)].imag();
        }
        const Eigen::MatrixXd sol = lu->solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = complex(sol(i, 0), sol(i, 1));
    };
}

LinearOperator<complex> dense_complex_solver(const SparseMatrix<complex>& A) {
    if (A.rows() > kDenseEigenLimit) throw UsageError("dense solver refused: matrix too large");
    auto lu = std::make_shared<Eigen::PartialPivLU<DenseComplexMatrix>>(to_dense(A));
    const auto n = static_cast<Eigen::Index>(A.rows());
    return [lu, n](std::span<const complex> r, std::span<complex> y) {
        Eigen::VectorXcd rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) rhs(i) = r[static_cast<std::size_t>(i)];
        const Eigen::VectorXcd sol = lu->solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = sol(i);
    };
}

}  // namespace pintflow
