#include "pintflow/inner/chebyshev.hpp"

namespace pintflow {

std::pair<double, double> mass_spectral_bounds(MassElement element) {
    switch (element) {
        case MassElement::Q1: return {0.25, 2.25};
        case MassElement::Q2: return {0.25, 1.5625};
    }
    return {0.0, 0.0};
}

ChebyshevPlan::ChebyshevPlan(SparseMatrix<real> matrix, int iterations, double lambda_lo, double lambda_hi)
    : A_(std::move(matrix)), iterations_(iterations), lo_(lambda_lo), hi_(lambda_hi) {
    if (A_.rows() != A_.cols()) throw UsageError("ChebyshevPlan: matrix not square");
    if (iterations < 1) throw ConfigError("Chebyshev iteration count must be >= 1");
    if (!(lambda_lo > 0.0 && lambda_lo < lambda_hi)) {
        throw ConfigError("Chebyshev bounds must satisfy 0 < lo < hi");
    }
    inv_diag_ = A_.diagonal();
    for (auto& v : inv_diag_) {
        if (!(v > 0.0)) throw ConfigError("ChebyshevPlan: matrix diagonal must be positive");
        v = 1.0 / v;
    }
    diagonal_ = A_.is_diagonal();
}

ChebyshevPlan::ChebyshevPlan(SparseMatrix<real> matrix, int iterations, MassElement element)
    : ChebyshevPlan(std::move(matrix), iterations, mass_spectral_bounds(element).first,
                    mass_spectral_bounds(element).second) {}

}  // namespace pintflow
