#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "pintflow/linalg/dense.hpp"
#include "pintflow/mesh/fem.hpp"
#include "pintflow/system/all_at_once.hpp"

namespace testing {

using pintflow::complex;
using pintflow::real;

inline std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline std::vector<complex> random_complex_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<complex> v(n);
    for (auto& x : v) x = complex(u(rng), u(rng));
    return v;
}

/// Unitary DFT matrix F[j][k] = exp(-2 pi i jk / n) / sqrt(n).
inline Eigen::MatrixXcd dft_matrix(std::size_t n) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd F(nn, nn);
    for (Eigen::Index j = 0; j < nn; ++j) {
        for (Eigen::Index k = 0; k < nn; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n);
            F(j, k) = std::polar(1.0, ang) / std::sqrt(static_cast<double>(n));
        }
    }
    return F;
}

/// Backward-Euler difference matrix (1 on the diagonal, -1 below); with
/// periodic = true the circulant that also couples the last block to the first.
inline Eigen::MatrixXd difference_matrix(std::size_t n, bool periodic) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(nn, nn);
    for (Eigen::Index j = 1; j < nn; ++j) E(j, j - 1) = -1.0;
    if (periodic) E(0, nn - 1) = -1.0;
    return E;
}

/// Kronecker-product assembly of the all-at-once matrix in field-major order
/// (v, p, lambda, mu):
///   [ tau I (x) M        0               E^T (x) M + tau I (x) L^T   tau I (x) B^T ]
///   [ 0                  0               tau I (x) B                 0             ]
///   [ E (x) M + tau I (x) L  tau I (x) B^T  -(tau/beta) I (x) M        0             ]
///   [ tau I (x) B        0               0                           0             ]
inline Eigen::MatrixXd kronecker_all_at_once(const pintflow::DiscreteOperators& o, std::size_t blocks, double tau,
                                             double beta, bool periodic) {
    using Eigen::kroneckerProduct;
    using Eigen::MatrixXd;
    const MatrixXd E = difference_matrix(blocks, periodic);
    const auto nb = static_cast<Eigen::Index>(blocks);
    const MatrixXd I = MatrixXd::Identity(nb, nb);
    const MatrixXd M = pintflow::to_dense(o.M), L = pintflow::to_dense(o.L), B = pintflow::to_dense(o.B);
    const auto nv = static_cast<Eigen::Index>(o.n_v) * nb, np = static_cast<Eigen::Index>(o.n_p) * nb;
    MatrixXd A = MatrixXd::Zero(2 * (nv + np), 2 * (nv + np));
    const Eigen::Index ov = 0, op = nv, ol = nv + np, om = 2 * nv + np;
    A.block(ov, ov, nv, nv) = tau * MatrixXd(kroneckerProduct(I, M));
    A.block(ov, ol, nv, nv) = MatrixXd(kroneckerProduct(E.transpose(), M)) + tau * MatrixXd(kroneckerProduct(I, L.transpose()));
    A.block(ov, om, nv, np) = tau * MatrixXd(kroneckerProduct(I, B.transpose()));
    A.block(op, ol, np, nv) = tau * MatrixXd(kroneckerProduct(I, B));
    A.block(ol, ov, nv, nv) = MatrixXd(kroneckerProduct(E, M)) + tau * MatrixXd(kroneckerProduct(I, L));
    A.block(ol, op, nv, np) = tau * MatrixXd(kroneckerProduct(I, B.transpose()));
    A.block(ol, ol, nv, nv) = -(tau / beta) * MatrixXd(kroneckerProduct(I, M));
    A.block(om, ov, np, nv) = tau * MatrixXd(kroneckerProduct(I, B));
    return A;
}

/// Eigenvalue of the circulant with first column (1, -1, 0, ...) for
/// frequency k, evaluated directly as a DFT sum.
inline complex circulant_eigenvalue(std::size_t n, std::size_t k) {
    complex s = 1.0;
    s -= std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    return s;
}

/// G_j in block order (v, lambda, p, mu), assembled from its four block rows.
inline Eigen::MatrixXcd block_G_oracle(const pintflow::DiscreteOperators& o, complex d, double tau, double beta) {
    const Eigen::MatrixXcd M = pintflow::to_dense(o.M).cast<complex>(), L = pintflow::to_dense(o.L).cast<complex>(),
                           B = pintflow::to_dense(o.B).cast<complex>();
    const auto nv = static_cast<Eigen::Index>(o.n_v), np = static_cast<Eigen::Index>(o.n_p);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(2 * (nv + np), 2 * (nv + np));
    G.block(0, 0, nv, nv) = tau * M;
    G.block(0, nv, nv, nv) = std::conj(d) * M + tau * L.transpose();
    G.block(0, 2 * nv + np, nv, np) = tau * B.transpose();
    G.block(nv, 0, nv, nv) = d * M + tau * L;
    G.block(nv, nv, nv, nv) = -(tau / beta) * M;
    G.block(nv, 2 * nv, nv, np) = tau * B.transpose();
    G.block(2 * nv, nv, np, nv) = tau * B;
    G.block(2 * nv + np, 0, np, nv) = tau * B;
    return G;
}

/// Field-major index of entry (block j, field slot s, dof i) where the block
/// system order is (v, lambda, p, mu).
inline std::vector<std::size_t> block_order_permutation(std::size_t blocks, std::size_t nv, std::size_t np) {
    std::vector<std::size_t> perm;
    const std::size_t off_v = 0, off_p = blocks * nv, off_l = blocks * (nv + np), off_m = blocks * (2 * nv + np);
    for (std::size_t j = 0; j < blocks; ++j) {
        for (std::size_t i = 0; i < nv; ++i) perm.push_back(off_v + j * nv + i);
        for (std::size_t i = 0; i < nv; ++i) perm.push_back(off_l + j * nv + i);
        for (std::size_t i = 0; i < np; ++i) perm.push_back(off_p + j * np + i);
        for (std::size_t i = 0; i < np; ++i) perm.push_back(off_m + j * np + i);
    }
    return perm;
}

/// Block-diagonal unitary time DFT acting on a field-major vector.
inline Eigen::MatrixXcd time_dft_operator(std::size_t blocks, std::size_t nv, std::size_t np) {
    const Eigen::MatrixXcd F = dft_matrix(blocks);
    const auto nb = static_cast<Eigen::Index>(blocks);
    const auto v = static_cast<Eigen::Index>(nv), p = static_cast<Eigen::Index>(np);
    const Eigen::Index N = 2 * nb * (v + p);
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(N, N);
    Eigen::Index off = 0;
    for (Eigen::Index n : {v, p, v, p}) {
        T.block(off, off, nb * n, nb * n) = Eigen::kroneckerProduct(F, Eigen::MatrixXcd::Identity(n, n));
        off += nb * n;
    }
    return T;
}

/// Columns of the matrix-free operator, one unit vector at a time.
inline Eigen::MatrixXd columns_of(const pintflow::AllAtOnceOperator& A) {
    const auto L = A.layout();
    const auto N = static_cast<Eigen::Index>(L.size());
    Eigen::MatrixXd D(N, N);
    pintflow::BlockVector<real> e(L), y(L);
    for (Eigen::Index c = 0; c < N; ++c) {
        std::fill(e.data().begin(), e.data().end(), 0.0);
        e.data()[static_cast<std::size_t>(c)] = 1.0;
        A.apply(e, y);
        for (Eigen::Index r = 0; r < N; ++r) D(r, c) = y.data()[static_cast<std::size_t>(r)];
    }
    return D;
}

inline double max_abs(const Eigen::MatrixXcd& A) { return A.cwiseAbs().maxCoeff(); }
inline double max_abs(const Eigen::MatrixXd& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace testing
