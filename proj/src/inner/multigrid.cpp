#include "pintflow/inner/multigrid.hpp"

namespace pintflow {

MultigridPlan<real> pressure_laplacian_multigrid(const LevelOperators& levels, const MultigridConfig& cfg) {
    std::vector<SparseMatrix<real>> A;
    std::vector<SparseMatrix<real>> P;
    for (std::size_t l = 0; l < levels.num_levels(); ++l) {
        A.push_back(levels.ops[l].K_p);
        if (l + 1 < levels.num_levels()) P.push_back(levels.transfers[l].pressure);
    }
    return MultigridPlan<real>(std::move(A), std::move(P), cfg);
}

}  // namespace pintflow
