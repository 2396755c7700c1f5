#include "pintflow/mesh/levels.hpp"

namespace pintflow {

LevelOperators build_level_operators(int coarsest_level, int finest_level, double nu, const VectorField& wind) {
    LevelOperators out{build_hierarchy(coarsest_level, finest_level), {}, {}};
    for (int l = coarsest_level; l <= finest_level; ++l) {
        out.ops.push_back(assemble_operators(out.mesh, l, nu, wind));
        if (l < finest_level) out.transfers.push_back(build_transfer(out.mesh, l));
    }
    return out;
}

}  // namespace pintflow
