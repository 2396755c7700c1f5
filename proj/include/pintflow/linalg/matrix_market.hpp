#pragma once

#include <iosfwd>
#include <string>

#include "pintflow/linalg/sparse.hpp"

namespace pintflow {

/// MatrixMarket coordinate format ("general" symmetry, real or complex field).
void write_matrix_market(std::ostream& os, const SparseMatrix<real>& A);
void write_matrix_market(std::ostream& os, const SparseMatrix<complex>& A);
void write_matrix_market(const std::string& path, const SparseMatrix<real>& A);
void write_matrix_market(const std::string& path, const SparseMatrix<complex>& A);

SparseMatrix<real> read_matrix_market_real(std::istream& is);
SparseMatrix<complex> read_matrix_market_complex(std::istream& is);
SparseMatrix<real> read_matrix_market_real(const std::string& path);
SparseMatrix<complex> read_matrix_market_complex(const std::string& path);

}  // namespace pintflow
