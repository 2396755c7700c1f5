#include "pintflow/precond/block_system.hpp"

namespace pintflow {

LinearOperator<complex> pinned_quotient_solver(LinearOperator<complex> full_solve, std::size_t n_p) {
    return [solve = std::move(full_solve), n_p](std::span<const complex> r, std::span<complex> y) {
        if (r.size() != n_p || y.size() != n_p) throw UsageError("pinned_quotient_solver: size mismatch");
        std::vector<complex> rf(n_p + 1), xf(n_p + 1);
        complex sum{0.0};
        for (std::size_t i = 0; i < n_p; ++i) {
            rf[i + 1] = r[i];
            sum += r[i];
        }
        rf[0] = -sum;
        solve(rf, xf);
        for (std::size_t i = 0; i < n_p; ++i) y[i] = xf[i + 1] - xf[0];
    };
}

Eigen::MatrixXd pinned_quotient_inverse(const Eigen::MatrixXd& A_full) {
    const Eigen::Index nf = A_full.rows(), np = nf - 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nf, np);
    J.row(0).setConstant(-1.0);
    J.bottomRows(np).setIdentity();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(np, nf);
    R.col(0).setConstant(-1.0);
    R.rightCols(np).setIdentity();
    return R * A_full.partialPivLu().solve(J);
}

}  // namespace pintflow
