#pragma once

#include "pintflow/krylov/gmres.hpp"
#include "pintflow/linalg/sparse.hpp"

namespace pintflow {

/// Exact solver for a small real matrix through a dense LU factorisation,
/// acting on complex vectors. Verification only.
LinearOperator<complex> dense_real_solver(const SparseMatrix<real>& A);

/// Same for a complex matrix.
LinearOperator<complex> dense_complex_solver(const SparseMatrix<complex>& A);

}  // namespace pintflow
