#include "pintflow/linalg/dense.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pintflow/errors.hpp"

namespace pintflow {
namespace {

void guard(Eigen::Index n) {
    if (static_cast<std::size_t>(n) > kDenseEigenLimit) {
        throw UsageError("dense eigensolver refused: dimension " + std::to_string(n) + " exceeds " +
                         std::to_string(kDenseEigenLimit));
    }
}

std::vector<complex> sorted(const Eigen::VectorXcd& ev) {
    std::vector<complex> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const complex& a, const complex& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return out;
}

}  // namespace

std::vector<complex> dense_eigs(const DenseComplexMatrix& A) {
    if (A.rows() != A.cols()) throw UsageError("dense_eigs: matrix not square");
    guard(A.rows());
    Eigen::ComplexEigenSolver<DenseComplexMatrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense_eigs: complex QR iteration did not converge (n=" +
                             std::to_string(A.rows()) + ", max iterations " +
                             std::to_string(solver.getMaxIterations()) + ")");
    }
    return sorted(solver.eigenvalues());
}

std::vector<complex> dense_eigs(const DenseMatrix& A) {
    if (A.rows() != A.cols()) throw UsageError("dense_eigs: matrix not square");
    guard(A.rows());
    Eigen::EigenSolver<DenseMatrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense_eigs: real QR iteration did not converge (n=" +
                             std::to_string(A.rows()) + ")");
    }
    return sorted(solver.eigenvalues());
}

std::vector<double> dense_symmetric_eigs(const DenseMatrix& A) {
    guard(A.rows());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("dense_symmetric_eigs: no convergence");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double smallest_singular_value(const DenseMatrix& A) {
    Eigen::JacobiSVD<DenseMatrix> svd(A);
    const auto& s = svd.singularValues();
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

}  // namespace pintflow
