#include "pintflow/linalg/matrix_market.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace pintflow {
namespace {

template <class T>
void write_impl(std::ostream& os, const SparseMatrix<T>& A) {
    os << "%%MatrixMarket matrix coordinate " << (is_complex_v<T> ? "complex" : "real") << " general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
    os << std::setprecision(17);
    for (const auto& e : A.triplets()) {
        os << e.row + 1 << ' ' << e.col + 1 << ' ';
        if constexpr (is_complex_v<T>) {
            os << e.value.real() << ' ' << e.value.imag() << '\n';
        } else {
            os << e.value << '\n';
        }
    }
    if (!os) throw InputError("MatrixMarket: write failed");
}

template <class T>
SparseMatrix<T> read_impl(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0) {
        throw InputError("MatrixMarket: missing banner");
    }
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix" || format != "coordinate") throw InputError("MatrixMarket: only coordinate matrices");
    const bool file_complex = field == "complex";
    if (!file_complex && field != "real" && field != "integer") {
        throw InputError("MatrixMarket: unsupported field '" + field + "'");
    }
    if (file_complex && !is_complex_v<T>) throw InputError("MatrixMarket: complex data read as real");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") throw InputError("MatrixMarket: unsupported symmetry");

    while (std::getline(is, line) && (line.empty() || line[0] == '%')) {
    }
    std::istringstream dims(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(dims >> rows >> cols >> nnz)) throw InputError("MatrixMarket: bad size line");

    std::vector<Triplet<T>> t;
    t.reserve(symmetric ? 2 * nnz : nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t i = 0, j = 0;
        double re = 0.0, im = 0.0;
        if (!(is >> i >> j >> re)) throw InputError("MatrixMarket: truncated entries");
        if (file_complex && !(is >> im)) throw InputError("MatrixMarket: truncated complex entry");
        if (i == 0 || j == 0 || i > rows || j > cols) throw InputError("MatrixMarket: index out of range");
        T v{};
        if constexpr (is_complex_v<T>) {
            v = T(re, im);
        } else {
            v = re;
        }
        t.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
    }
    return SparseMatrix<T>::from_triplets(rows, cols, std::move(t));
}

template <class T>
void write_file(const std::string& path, const SparseMatrix<T>& A) {
    std::ofstream os(path);
    if (!os) throw InputError("MatrixMarket: cannot open " + path);
    write_impl(os, A);
}

template <class T>
SparseMatrix<T> read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("MatrixMarket: cannot open " + path);
    return read_impl<T>(is);
}

}  // namespace

void write_matrix_market(std::ostream& os, const SparseMatrix<real>& A) { write_impl(os, A); }
void write_matrix_market(std::ostream& os, const SparseMatrix<complex>& A) { write_impl(os, A); }
void write_matrix_market(const std::string& path, const SparseMatrix<real>& A) { write_file(path, A); }
void write_matrix_market(const std::string& path, const SparseMatrix<complex>& A) { write_file(path, A); }
SparseMatrix<real> read_matrix_market_real(std::istream& is) { return read_impl<real>(is); }
SparseMatrix<complex> read_matrix_market_complex(std::istream& is) { return read_impl<complex>(is); }
SparseMatrix<real> read_matrix_market_real(const std::string& path) { return read_file<real>(path); }
SparseMatrix<complex> read_matrix_market_complex(const std::string& path) { return read_file<complex>(path); }

}  // namespace pintflow
