#pragma once

#include <vector>

#include "pintflow/mesh/fem.hpp"
#include "pintflow/mesh/hierarchy.hpp"

namespace pintflow {

/// Operators and transfers on every level of a hierarchy, coarsest first.
/// transfers[i] maps level (coarsest + i) to (coarsest + i + 1).
struct LevelOperators {
    MeshHierarchy mesh;
    std::vector<DiscreteOperators> ops;
    std::vector<TransferOperators> transfers;

    const DiscreteOperators& finest() const { return ops.back(); }
    std::size_t num_levels() const { return ops.size(); }
};

LevelOperators build_level_operators(int coarsest_level, int finest_level, double nu, const VectorField& wind = {});

}  // namespace pintflow
