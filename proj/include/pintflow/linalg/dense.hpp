#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pintflow/linalg/scalar.hpp"
#include "pintflow/linalg/sparse.hpp"

namespace pintflow {

using DenseMatrix = Eigen::MatrixXd;
using DenseComplexMatrix = Eigen::MatrixXcd;

/// Dense eigenvalue routines are verification-only and refuse anything larger.
inline constexpr std::size_t kDenseEigenLimit = 6000;

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> to_dense(const SparseMatrix<T>& A) {
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> D =
        Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            static_cast<Eigen::Index>(A.rows()), static_cast<Eigen::Index>(A.cols()));
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
            D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(A.col_idx()[k])) = A.values()[k];
        }
    }
    return D;
}

/// Eigenvalues of a general complex matrix, sorted by real part descending
/// (ties by imaginary part descending). Throws NumericalError if the QR
/// iteration does not converge and UsageError above kDenseEigenLimit.
std::vector<complex> dense_eigs(const DenseComplexMatrix& A);
std::vector<complex> dense_eigs(const DenseMatrix& A);

/// Eigenvalues of a Hermitian/symmetric matrix, ascending.
std::vector<double> dense_symmetric_eigs(const DenseMatrix& A);

/// Smallest singular value.
double smallest_singular_value(const DenseMatrix& A);

}  // namespace pintflow
