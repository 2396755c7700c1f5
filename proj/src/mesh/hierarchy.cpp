#include "pintflow/mesh/hierarchy.hpp"

#include <string>

#include "pintflow/errors.hpp"

namespace pintflow {

MeshHierarchy::MeshHierarchy(int coarsest, int finest) : coarsest_(coarsest), finest_(finest) {
    if (coarsest < 1 || coarsest > finest || finest > kMaxLevel) {
        throw ConfigError("mesh levels must satisfy 1 <= coarsest <= finest <= " + std::to_string(kMaxLevel) +
                          " (got " + std::to_string(coarsest) + ", " + std::to_string(finest) + ")");
    }
    for (int l = coarsest; l <= finest; ++l) {
        const std::size_t n = std::size_t{1} << l;
        grids_.push_back(UniformGrid{l, n, 2.0 / static_cast<double>(n)});
    }
}

const UniformGrid& MeshHierarchy::grid(int level) const {
    if (level < coarsest_ || level > finest_) {
        throw ConfigError("level " + std::to_string(level) + " not in hierarchy");
    }
    return grids_[static_cast<std::size_t>(level - coarsest_)];
}

MeshHierarchy build_hierarchy(int coarsest_level, int finest_level) {
    return MeshHierarchy(coarsest_level, finest_level);
}

}  // namespace pintflow
